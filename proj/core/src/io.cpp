#include "vibronic/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "vibronic/errors.hpp"

namespace vib::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(s.substr(start)));
            return out;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
}

double parse_double(const std::string& tok, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
        throw ConfigError("io", "non-numeric cell '" + tok + "' in " + path);
    return v;
}

}  // namespace

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& comments,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), path_(path), n_cols_(columns.size()) {
    if (!out_) throw ConfigError("io", "cannot open " + path + " for writing");
    for (const auto& c : comments) out_ << "# " << c << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i)
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != n_cols_)
        throw ConfigError("io", "row width mismatch writing " + path_);
    for (std::size_t i = 0; i < values.size(); ++i)
        out_ << format_g17(values[i]) << (i + 1 < values.size() ? "," : "");
    out_ << '\n';
    if (!out_) throw ConfigError("io", "write failed on " + path_);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("io", "cannot open " + path);
    CsvTable t;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(trim(line.substr(1)));
            continue;
        }
        if (!have_columns) {
            t.columns = split(line, ',');
            have_columns = true;
            continue;
        }
        const auto toks = split(line, ',');
        if (toks.size() != t.columns.size())
            throw ConfigError("io", "ragged row in " + path);
        std::vector<double> row(toks.size());
        for (std::size_t i = 0; i < toks.size(); ++i) row[i] = parse_double(toks[i], path);
        t.rows.push_back(std::move(row));
    }
    if (!have_columns) throw ConfigError("io", "no column header in " + path);
    return t;
}

std::vector<std::pair<double, double>> read_two_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("io", "cannot open " + path);
    std::vector<std::pair<double, double>> data;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double a = 0, b = 0;
        if (!(ss >> a >> b))
            throw ConfigError("io", "expected two numbers per line in " + path);
        data.emplace_back(a, b);
    }
    if (data.empty()) throw ConfigError("io", "no data rows in " + path);
    return data;
}

void write_two_column(const std::string& path, const std::vector<std::string>& comments,
                      const std::vector<std::pair<double, double>>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io", "cannot open " + path + " for writing");
    for (const auto& c : comments) out << "# " << c << '\n';
    for (const auto& [a, b] : data) out << format_g17(a) << ' ' << format_g17(b) << '\n';
    if (!out) throw ConfigError("io", "write failed on " + path);
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

constexpr char kScanMagic[8] = {'V', 'I', 'B', 'S', 'C', 'N', '0', '1'};

struct ScanHeader {
    char magic[8];
    std::int64_t n_states, nx, nr;
    double x_min, x_dr, r_min, r_dr;
};

}  // namespace

bool load_scan_cache(const std::string& path, const Grid1D& x_grid, const Grid1D& r_grid,
                     int n_states, ElectronicScan& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    ScanHeader h{};
    in.read(reinterpret_cast<char*>(&h), sizeof h);
    if (!in || std::memcmp(h.magic, kScanMagic, 8) != 0) return false;
    if (h.n_states != n_states || h.nx != x_grid.n_points || h.nr != r_grid.n_points)
        return false;
    if (h.x_min != x_grid.r_min || h.x_dr != x_grid.delta_r || h.r_min != r_grid.r_min ||
        h.r_dr != r_grid.delta_r)
        return false;

    out.x_grid = x_grid;
    out.r_grid = r_grid;
    out.n_states = n_states;
    out.energies.resize(n_states, r_grid.n_points);
    in.read(reinterpret_cast<char*>(out.energies.data()),
            std::streamsize(sizeof(double)) * out.energies.size());
    out.states.assign(std::size_t(n_states),
                      Eigen::MatrixXd(x_grid.n_points, r_grid.n_points));
    for (auto& m : out.states)
        in.read(reinterpret_cast<char*>(m.data()), std::streamsize(sizeof(double)) * m.size());
    return bool(in);
}

void save_scan_cache(const std::string& path, const ElectronicScan& scan) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("io", "cannot open " + path + " for writing");
    ScanHeader h{};
    std::memcpy(h.magic, kScanMagic, 8);
    h.n_states = scan.n_states;
    h.nx = scan.x_grid.n_points;
    h.nr = scan.r_grid.n_points;
    h.x_min = scan.x_grid.r_min;
    h.x_dr = scan.x_grid.delta_r;
    h.r_min = scan.r_grid.r_min;
    h.r_dr = scan.r_grid.delta_r;
    out.write(reinterpret_cast<const char*>(&h), sizeof h);
    out.write(reinterpret_cast<const char*>(scan.energies.data()),
              std::streamsize(sizeof(double)) * scan.energies.size());
    for (const auto& m : scan.states)
        out.write(reinterpret_cast<const char*>(m.data()),
                  std::streamsize(sizeof(double)) * m.size());
    if (!out) throw ConfigError("io", "write failed on " + path);
}

}  // namespace vib::io
