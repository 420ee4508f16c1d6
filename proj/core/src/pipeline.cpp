#include "vibronic/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vibronic/bo.hpp"
#include "vibronic/born_huang.hpp"
#include "vibronic/diabatic.hpp"
#include "vibronic/errors.hpp"
#include "vibronic/io.hpp"
#include "vibronic/schmidt.hpp"
#include "vibronic/version.hpp"

namespace fs = std::filesystem;

namespace vib {

namespace {

constexpr const char* kModule = "pipeline_cli";
const double kNan = std::numeric_limits<double>::quiet_NaN();

// Every accepted configuration key. Environment overrides follow the same
// list as VIBRONIC_<SECTION>_<KEY>.
const char* const kSchema[] = {
    "run.model",
    "run.picture",
    "run.n_states",
    "run.threads",
    "run.entropy_base",
    "run.cache_dir",
    "grid_x.min",
    "grid_x.max",
    "grid_x.n",
    "grid_r.min",
    "grid_r.max",
    "grid_r.n",
    "nuclear.surfaces",
    "nuclear.cutoffs",
    "nuclear.bound_by_edge",
    "analysis.full_density",
    "analysis.simplified",
    "analysis.perturbative",
    "analysis.schmidt_modes",
    "analysis.schmidt_state",
    "h2p.reference_curve",
    "shin_metiu.l",
    "shin_metiu.z_alpha",
    "shin_metiu.z_beta",
    "shin_metiu.z_gamma",
    "shin_metiu.rc_alpha",
    "shin_metiu.rc_beta",
    "shin_metiu.rc_gamma",
    "shin_metiu.mass",
    "shin_metiu.domain_margin",
    "born_huang.channel_cutoff",
    "born_huang.lambda_json",
    "born_huang.report_states",
};

std::string env_name(const std::string& key) {
    std::string name = "VIBRONIC_";
    for (char c : key) name += (c == '.' || c == '-') ? '_' : char(std::toupper(c));
    return name;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(kModule, key + ": expected a number, got '" + v + "'");
    return d;
}

int to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    long n = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(kModule, key + ": expected an integer, got '" + v + "'");
    return int(n);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError(kModule, key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t pos = v.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(v.substr(start)));
            break;
        }
        out.push_back(trim(v.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

int round_up_odd(const std::string& key, int n) {
    if (n % 2 == 0) {
        std::fprintf(stderr, "[pipeline_cli] warning: %s=%d is even, using %d\n", key.c_str(), n,
                     n + 1);
        return n + 1;
    }
    return n;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_g17(v[i]);
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string grid_text(const GridSpec& g) {
    return io::format_g17(g.lo) + ":" + io::format_g17(g.hi) + ":" + std::to_string(g.n);
}

}  // namespace

std::string RunConfig::canonical() const {
    // threads and cache_dir are runtime resources, not part of the science.
    std::string s;
    for (const auto& [k, v] : effective) s += k + "=" + v + "\n";
    return s;
}

std::string RunConfig::hash() const { return io::hex16(io::fnv1a64(canonical())); }

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(kModule, "cannot open config file " + path);

    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty() || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(kModule, path + ":" + std::to_string(lineno) +
                                               ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(kModule,
                              path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (section.empty())
            throw ConfigError(kModule, path + ":" + std::to_string(lineno) + ": key '" + key +
                                           "' outside any [section]");
        kv[section + "." + key] = trim(line.substr(eq + 1));
    }
    return run_config_from_map(std::move(kv));
}

RunConfig run_config_from_map(std::map<std::string, std::string> kv) {
    std::set<std::string> schema(std::begin(kSchema), std::end(kSchema));
    for (const auto& [k, v] : kv)
        if (!schema.count(k)) throw ConfigError(kModule, "unknown config key '" + k + "'");

    for (const char* key : kSchema)
        if (const char* v = std::getenv(env_name(key).c_str())) kv[key] = v;

    auto has = [&](const char* k) { return kv.count(k) != 0; };
    auto str = [&](const char* k, const std::string& dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : it->second;
    };
    auto num = [&](const char* k, double dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : to_double(k, it->second);
    };
    auto integer = [&](const char* k, int dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : to_int(k, it->second);
    };
    auto boolean = [&](const char* k, bool dflt) {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : to_bool(k, it->second);
    };

    RunConfig cfg;
    cfg.model = str("run.model", "");
    if (cfg.model != "h2p" && cfg.model != "shin_metiu")
        throw ConfigError(kModule, "run.model: unknown model '" + cfg.model +
                                       "' (expected h2p or shin_metiu)");
    const bool h2p = cfg.model == "h2p";

    cfg.picture = str("run.picture", "adiabatic");
    if (cfg.picture != "adiabatic" && cfg.picture != "diabatic" && cfg.picture != "born_huang")
        throw ConfigError(kModule, "run.picture: unknown picture '" + cfg.picture +
                                       "' (expected adiabatic, diabatic or born_huang)");
    if (h2p && cfg.picture != "adiabatic")
        throw ConfigError(kModule,
                          "run.picture: model h2p supports only the adiabatic picture");

    cfg.n_states = integer("run.n_states", 3);
    if (cfg.n_states < 1) throw ConfigError(kModule, "run.n_states: must be >= 1");
    if (cfg.picture != "adiabatic" && cfg.n_states < 3)
        throw ConfigError(kModule, "run.n_states: picture " + cfg.picture + " needs >= 3");

    cfg.threads = integer("run.threads", 1);
    if (cfg.threads < 1) throw ConfigError(kModule, "run.threads: must be >= 1");

    const std::string base = str("run.entropy_base", "e");
    if (base != "e" && base != "2")
        throw ConfigError(kModule, "run.entropy_base: expected 'e' or '2', got '" + base + "'");
    cfg.entropy_base = base[0];
    cfg.cache_dir = str("run.cache_dir", "");

    cfg.grid_x.lo = num("grid_x.min", h2p ? -30.0 : -22.0);
    cfg.grid_x.hi = num("grid_x.max", h2p ? 30.0 : 22.0);
    cfg.grid_x.n = round_up_odd("grid_x.n", integer("grid_x.n", 501));
    cfg.grid_r.lo = num("grid_r.min", h2p ? 0.4 : -8.9);
    cfg.grid_r.hi = num("grid_r.max", h2p ? 40.0 : 8.9);
    cfg.grid_r.n = round_up_odd("grid_r.n", integer("grid_r.n", h2p ? 1601 : 1001));
    for (const auto* g : {&cfg.grid_x, &cfg.grid_r}) {
        if (!(g->lo < g->hi)) throw ConfigError(kModule, "grid bounds: min must be below max");
        if (g->n < 3) throw ConfigError(kModule, "grid n: need at least 3 points");
    }

    if (has("nuclear.surfaces")) {
        for (const auto& t : split_list(kv["nuclear.surfaces"]))
            cfg.surfaces.push_back(to_int("nuclear.surfaces", t));
    } else if (h2p) {
        cfg.surfaces = {0, 2};
    } else {
        cfg.surfaces = {0, 1, 2};
    }
    if (has("nuclear.cutoffs")) {
        for (const auto& t : split_list(kv["nuclear.cutoffs"]))
            cfg.cutoffs.push_back(to_double("nuclear.cutoffs", t));
    } else if (h2p) {
        cfg.cutoffs = {-0.5, -0.23};
    } else {
        cfg.cutoffs.assign(cfg.surfaces.size(), -0.15);
    }
    if (cfg.surfaces.size() != cfg.cutoffs.size())
        throw ConfigError(kModule, "nuclear.cutoffs: need one cutoff per surface");
    for (int s : cfg.surfaces)
        if (s < 0 || s >= cfg.n_states)
            throw ConfigError(kModule, "nuclear.surfaces: surface " + std::to_string(s) +
                                           " outside [0, n_states)");
    cfg.bound_by_edge = boolean("nuclear.bound_by_edge", h2p);

    cfg.full_density = boolean("analysis.full_density", true);
    cfg.simplified = boolean("analysis.simplified", false);
    cfg.perturbative = boolean("analysis.perturbative", false);
    cfg.schmidt_modes = integer("analysis.schmidt_modes", 0);
    cfg.schmidt_state = integer("analysis.schmidt_state", 0);
    if (cfg.schmidt_modes < 0 || cfg.schmidt_state < 0)
        throw ConfigError(kModule, "analysis.schmidt_modes/schmidt_state: must be >= 0");

    cfg.reference_curve = str("h2p.reference_curve", "");
    if (h2p && cfg.reference_curve.empty())
        throw ConfigError(kModule, "h2p.reference_curve: required for model h2p");

    cfg.sm.L = num("shin_metiu.l", cfg.sm.L);
    cfg.sm.z_alpha = num("shin_metiu.z_alpha", cfg.sm.z_alpha);
    cfg.sm.z_beta = num("shin_metiu.z_beta", cfg.sm.z_beta);
    cfg.sm.z_gamma = num("shin_metiu.z_gamma", cfg.sm.z_gamma);
    cfg.sm.rc_alpha = num("shin_metiu.rc_alpha", cfg.sm.rc_alpha);
    cfg.sm.rc_beta = num("shin_metiu.rc_beta", cfg.sm.rc_beta);
    cfg.sm.rc_gamma = num("shin_metiu.rc_gamma", cfg.sm.rc_gamma);
    cfg.sm.moving_ion_mass = num("shin_metiu.mass", cfg.sm.moving_ion_mass);
    cfg.sm.domain_margin = num("shin_metiu.domain_margin", cfg.sm.domain_margin);
    if (!h2p) {
        const double limit = cfg.sm.L / 2.0 - cfg.sm.domain_margin;
        if (cfg.grid_r.lo <= -limit || cfg.grid_r.hi >= limit)
            throw ConfigError(kModule, "grid_r: range must stay inside |R| < " +
                                           io::format_g17(limit) + " for shin_metiu");
    } else {
        if (cfg.grid_r.lo <= 0.0)
            throw ConfigError(kModule, "grid_r.min: must be positive for h2p");
    }

    cfg.channel_cutoff = num("born_huang.channel_cutoff", -0.15);
    cfg.lambda_json = boolean("born_huang.lambda_json", false);
    cfg.report_states = integer("born_huang.report_states", 0);
    if (cfg.report_states < 0)
        throw ConfigError(kModule, "born_huang.report_states: must be >= 0");

    auto& eff = cfg.effective;
    eff["run.model"] = cfg.model;
    eff["run.picture"] = cfg.picture;
    eff["run.n_states"] = std::to_string(cfg.n_states);
    eff["run.entropy_base"] = std::string(1, cfg.entropy_base);
    eff["grid_x.min"] = io::format_g17(cfg.grid_x.lo);
    eff["grid_x.max"] = io::format_g17(cfg.grid_x.hi);
    eff["grid_x.n"] = std::to_string(cfg.grid_x.n);
    eff["grid_r.min"] = io::format_g17(cfg.grid_r.lo);
    eff["grid_r.max"] = io::format_g17(cfg.grid_r.hi);
    eff["grid_r.n"] = std::to_string(cfg.grid_r.n);
    eff["nuclear.surfaces"] = join_ints(cfg.surfaces);
    eff["nuclear.cutoffs"] = join_doubles(cfg.cutoffs);
    eff["nuclear.bound_by_edge"] = cfg.bound_by_edge ? "1" : "0";
    eff["analysis.full_density"] = cfg.full_density ? "1" : "0";
    eff["analysis.simplified"] = cfg.simplified ? "1" : "0";
    eff["analysis.perturbative"] = cfg.perturbative ? "1" : "0";
    eff["analysis.schmidt_modes"] = std::to_string(cfg.schmidt_modes);
    eff["analysis.schmidt_state"] = std::to_string(cfg.schmidt_state);
    if (h2p) {
        eff["h2p.reference_curve"] = cfg.reference_curve;
    } else {
        eff["shin_metiu.l"] = io::format_g17(cfg.sm.L);
        eff["shin_metiu.z_alpha"] = io::format_g17(cfg.sm.z_alpha);
        eff["shin_metiu.z_beta"] = io::format_g17(cfg.sm.z_beta);
        eff["shin_metiu.z_gamma"] = io::format_g17(cfg.sm.z_gamma);
        eff["shin_metiu.rc_alpha"] = io::format_g17(cfg.sm.rc_alpha);
        eff["shin_metiu.rc_beta"] = io::format_g17(cfg.sm.rc_beta);
        eff["shin_metiu.rc_gamma"] = io::format_g17(cfg.sm.rc_gamma);
        eff["shin_metiu.mass"] = io::format_g17(cfg.sm.moving_ion_mass);
        eff["shin_metiu.domain_margin"] = io::format_g17(cfg.sm.domain_margin);
    }
    if (cfg.picture == "born_huang") {
        eff["born_huang.channel_cutoff"] = io::format_g17(cfg.channel_cutoff);
        eff["born_huang.lambda_json"] = cfg.lambda_json ? "1" : "0";
        eff["born_huang.report_states"] = std::to_string(cfg.report_states);
    }
    return cfg;
}

namespace {

// Everything a run shares between output files.
struct RunContext {
    const RunConfig& cfg;
    std::string out;
    std::string cache;
    Grid1D xg;
    Grid1D rg;
    H2pModel h2p;
    ShinMetiuModel sm;
    double fgh_mass = 0.0;
    ElectronicScan scan;
    std::vector<std::string> header;
    double entropy_div = 1.0;
};

std::string model_signature(const RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    if (c.model == "h2p") {
        std::string table;
        for (const auto& [r, a] : ctx.h2p.softening_table)
            table += io::format_g17(r) + "," + io::format_g17(a) + ";";
        return "h2p|za=" + io::format_g17(ctx.h2p.z_alpha) + "|zb=" +
               io::format_g17(ctx.h2p.z_beta) + "|mu=" +
               io::format_g17(ctx.h2p.electron_reduced_mass) + "|table=" +
               io::hex16(io::fnv1a64(table));
    }
    const ShinMetiuModel& m = ctx.sm;
    return "sm|l=" + io::format_g17(m.L) + "|z=" + io::format_g17(m.z_alpha) + "," +
           io::format_g17(m.z_beta) + "," + io::format_g17(m.z_gamma) + "|rc=" +
           io::format_g17(m.rc_alpha) + "," + io::format_g17(m.rc_beta) + "," +
           io::format_g17(m.rc_gamma) + "|mass=" + io::format_g17(m.moving_ion_mass);
}

void prepare_model(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    if (c.model == "h2p") {
        const auto reference = io::read_two_column(c.reference_curve);
        const std::string input_hash =
            io::hex16(io::fnv1a64(io::read_file_bytes(c.reference_curve) + "|x=" +
                                  grid_text(c.grid_x)));
        const std::string calib_path = ctx.cache + "/calib_" + input_hash + ".dat";
        if (fs::exists(calib_path)) {
            ctx.h2p.softening_table = io::read_two_column(calib_path);
            std::fprintf(stderr, "[pipeline_cli] calibration cache hit: %s\n",
                         calib_path.c_str());
        } else {
            ctx.h2p.softening_table = calibrate_softening(ctx.h2p, reference, ctx.xg);
            io::write_two_column(calib_path,
                                 {"softening table a(R)", "inputs=" + input_hash,
                                  "x_grid=" + grid_text(c.grid_x)},
                                 ctx.h2p.softening_table);
        }
        ctx.fgh_mass = ctx.h2p.nuclear_fgh_mass();
    } else {
        ctx.sm = c.sm;
        ctx.fgh_mass = ctx.sm.nuclear_fgh_mass();
    }
}

void prepare_scan(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    const std::string sig = model_signature(ctx) + "|x=" + grid_text(c.grid_x) +
                            "|r=" + grid_text(c.grid_r) + "|ns=" + std::to_string(c.n_states);
    const std::string path = ctx.cache + "/scan_" + io::hex16(io::fnv1a64(sig)) + ".bin";
    if (io::load_scan_cache(path, ctx.xg, ctx.rg, c.n_states, ctx.scan)) {
        std::fprintf(stderr, "[pipeline_cli] scan cache hit: %s\n", path.c_str());
        return;
    }
    const ElectronicProblem prob = c.model == "h2p" ? electronic_problem(ctx.h2p)
                                                    : electronic_problem(ctx.sm);
    ctx.scan = scan_electronic(prob, ctx.xg, ctx.rg, c.n_states, c.threads);
    io::save_scan_cache(path, ctx.scan);
}

void write_pec(const RunContext& ctx) {
    std::vector<std::string> cols = {"R"};
    for (int s = 0; s < ctx.cfg.n_states; ++s) cols.push_back("V" + std::to_string(s));
    io::CsvWriter w(ctx.out + "/pec.csv", ctx.header, cols);
    std::vector<double> row(cols.size());
    for (int j = 0; j < ctx.rg.n_points; ++j) {
        row[0] = ctx.rg.point(j);
        for (int s = 0; s < ctx.cfg.n_states; ++s) row[s + 1] = ctx.scan.energies(s, j);
        w.row(row);
    }
    std::printf("wrote %s/pec.csv (%d points, %d surfaces)\n", ctx.out.c_str(),
                ctx.rg.n_points, ctx.cfg.n_states);
}

double ladder_cutoff(const RunContext& ctx, int surface, double requested) {
    if (!ctx.cfg.bound_by_edge) return requested;
    const double edge = ctx.scan.energies(surface, ctx.rg.n_points - 1);
    return std::min(requested, edge);
}

void write_vibronic(const RunContext& ctx,
                    const std::vector<std::vector<VibronicState>>& ladders) {
    io::CsvWriter w(ctx.out + "/vibronic.csv", ctx.header,
                    {"surface", "m", "energy", "nodes"});
    for (const auto& ladder : ladders)
        for (const auto& st : ladder)
            w.row({double(st.surface), double(st.m), st.energy, double(count_nodes(st.chi))});
}

// One entropy row per vibronic state; analyses that are toggled off or fail
// extraction record nan.
void write_entropy(const RunContext& ctx,
                   const std::vector<std::vector<VibronicState>>& ladders,
                   const std::vector<Eigen::MatrixXd>* electronic_override) {
    const RunConfig& c = ctx.cfg;
    auto header = ctx.header;
    header.push_back("entropy_base=" + std::string(1, c.entropy_base));
    io::CsvWriter w(ctx.out + "/entropy.csv", header,
                    {"surface", "m", "energy", "s_full", "s_simplified", "s_two_eigenvalue",
                     "lambda_max"});

    const bool adiabatic_frame = electronic_override == nullptr;
    if (!adiabatic_frame && (c.simplified || c.perturbative))
        std::fprintf(stderr,
                     "[pipeline_cli] warning: simplified/perturbative analyses need the "
                     "adiabatic picture; skipped\n");

    for (const auto& ladder : ladders) {
        for (const auto& st : ladder) {
            double s_full = kNan, s_simpl = kNan, s_two = kNan, lam = kNan;
            if (c.full_density) {
                Eigen::MatrixXd psi =
                    adiabatic_frame
                        ? bo_total_wavefunction(ctx.scan, st)
                        : Eigen::MatrixXd((*electronic_override)[st.surface] *
                                          st.chi.values.asDiagonal());
                s_full = schmidt_entropy(psi) / ctx.entropy_div;
            }
            if (adiabatic_frame && (c.simplified || c.perturbative)) {
                try {
                    const auto points = simplified_vibrational(st);
                    const auto sd = simplified_density(points, ctx.scan, st.surface, st);
                    if (c.simplified) s_simpl = sd.entropy / ctx.entropy_div;
                    if (c.perturbative) {
                        lam = perturbative_lambda_max(sd);
                        s_two = two_eigenvalue_entropy(lam) / ctx.entropy_div;
                    }
                } catch (const ExtractionError& e) {
                    std::fprintf(stderr, "[pipeline_cli] warning: surface %d m=%d: %s\n",
                                 st.surface, st.m, e.what());
                }
            }
            w.row({double(st.surface), double(st.m), st.energy, s_full, s_simpl, s_two, lam});
        }
    }
}

void export_schmidt_modes(const RunContext& ctx,
                          const std::vector<std::vector<VibronicState>>& ladders,
                          const std::vector<Eigen::MatrixXd>* electronic_override) {
    const RunConfig& c = ctx.cfg;
    if (c.schmidt_modes <= 0) return;
    const std::string dir = ctx.out + "/schmidt_modes";
    fs::create_directories(dir);

    for (const auto& ladder : ladders) {
        for (const auto& st : ladder) {
            if (st.m != c.schmidt_state) continue;
            Eigen::MatrixXd psi = electronic_override == nullptr
                                      ? bo_total_wavefunction(ctx.scan, st)
                                      : Eigen::MatrixXd((*electronic_override)[st.surface] *
                                                        st.chi.values.asDiagonal());
            const SchmidtResult res = schmidt_decompose(psi);
            const int k = std::min<int>(c.schmidt_modes, int(res.lambdas.size()));
            const std::string stem =
                dir + "/s" + std::to_string(st.surface) + "_m" + std::to_string(st.m);

            {
                io::CsvWriter w(stem + "_spectrum.csv", ctx.header, {"index", "lambda"});
                for (int i = 0; i < res.lambdas.size(); ++i) w.row({double(i), res.lambdas(i)});
            }
            std::vector<std::string> cols = {"x"};
            for (int i = 0; i < k; ++i) cols.push_back("mode" + std::to_string(i));
            {
                io::CsvWriter w(stem + "_electronic.csv", ctx.header, cols);
                std::vector<double> row(cols.size());
                for (int i = 0; i < ctx.xg.n_points; ++i) {
                    row[0] = ctx.xg.point(i);
                    for (int q = 0; q < k; ++q) row[q + 1] = res.electronic_modes(i, q);
                    w.row(row);
                }
            }
            cols[0] = "R";
            {
                io::CsvWriter w(stem + "_nuclear.csv", ctx.header, cols);
                std::vector<double> row(cols.size());
                for (int j = 0; j < ctx.rg.n_points; ++j) {
                    row[0] = ctx.rg.point(j);
                    for (int q = 0; q < k; ++q) row[q + 1] = res.nuclear_modes(j, q);
                    w.row(row);
                }
            }
        }
    }
}

void print_crossings(const RunContext& ctx) {
    for (int s = 0; s + 1 < ctx.cfg.n_states; ++s) {
        const CrossingInfo info = find_crossing(ctx.scan, s, s + 1);
        std::printf("crossing %d/%d: R=%s gap=%s mid=%s\n", s, s + 1,
                    io::format_g17(info.r).c_str(), io::format_g17(info.gap).c_str(),
                    io::format_g17(info.energy_mid).c_str());
    }
}

std::vector<std::vector<VibronicState>> adiabatic_ladders(const RunContext& ctx) {
    std::vector<std::vector<VibronicState>> ladders;
    for (std::size_t i = 0; i < ctx.cfg.surfaces.size(); ++i) {
        const int s = ctx.cfg.surfaces[i];
        const double cut = ladder_cutoff(ctx, s, ctx.cfg.cutoffs[i]);
        ladders.push_back(solve_nuclear(ctx.scan, s, ctx.fgh_mass, cut));
        std::printf("surface %d: %zu states below %s\n", s, ladders.back().size(),
                    io::format_g17(cut).c_str());
    }
    return ladders;
}

void run_adiabatic(RunContext& ctx) {
    const auto ladders = adiabatic_ladders(ctx);
    write_vibronic(ctx, ladders);
    write_entropy(ctx, ladders, nullptr);
    export_schmidt_modes(ctx, ladders, nullptr);
}

void run_diabatic(RunContext& ctx) {
    const CouplingField a = nac_hellmann_feynman(ctx.scan, ctx.sm);
    const RotationFit fit = fit_rotation_angles(a, ctx.scan);
    std::printf("theta: K=%s K0=%s Rc=%s Gamma=%s rms=%s\n",
                io::format_g17(fit.theta.model.K).c_str(),
                io::format_g17(fit.theta.model.K0).c_str(),
                io::format_g17(fit.theta.model.r_c).c_str(),
                io::format_g17(fit.theta.model.gamma).c_str(),
                io::format_g17(fit.theta.rms_residual).c_str());
    std::printf("phi: K=%s K0=%s Rc=%s Gamma=%s rms=%s\n",
                io::format_g17(fit.phi.model.K).c_str(),
                io::format_g17(fit.phi.model.K0).c_str(),
                io::format_g17(fit.phi.model.r_c).c_str(),
                io::format_g17(fit.phi.model.gamma).c_str(),
                io::format_g17(fit.phi.rms_residual).c_str());

    const DiabaticField field = diabatic_field(ctx.scan, fit.theta.model, fit.phi.model);

    auto header = ctx.header;
    header.push_back("theta=" + io::format_g17(fit.theta.model.K) + ":" +
                     io::format_g17(fit.theta.model.K0) + ":" +
                     io::format_g17(fit.theta.model.r_c) + ":" +
                     io::format_g17(fit.theta.model.gamma));
    header.push_back("phi=" + io::format_g17(fit.phi.model.K) + ":" +
                     io::format_g17(fit.phi.model.K0) + ":" +
                     io::format_g17(fit.phi.model.r_c) + ":" +
                     io::format_g17(fit.phi.model.gamma));
    {
        io::CsvWriter w(ctx.out + "/couplings.csv", header,
                        {"R", "V1D", "V2D", "V3D", "V12", "V13", "V23", "A12", "A13", "A23"});
        for (int j = 0; j < ctx.rg.n_points; ++j)
            w.row({ctx.rg.point(j), field.diagonal(0, j), field.diagonal(1, j),
                   field.diagonal(2, j), field.off_diagonal(0, j), field.off_diagonal(1, j),
                   field.off_diagonal(2, j), a.comp(0, 1)(j), a.comp(0, 2)(j),
                   a.comp(1, 2)(j)});
    }

    std::vector<std::vector<VibronicState>> ladders;
    for (std::size_t i = 0; i < ctx.cfg.surfaces.size(); ++i) {
        const int s = ctx.cfg.surfaces[i];
        ladders.push_back(diabatic_nuclear_solve(field.diagonal.row(s).transpose(), ctx.rg,
                                                 ctx.fgh_mass, ctx.cfg.cutoffs[i], s));
        std::printf("diabat %d: %zu states below %s\n", s, ladders.back().size(),
                    io::format_g17(ctx.cfg.cutoffs[i]).c_str());
    }
    write_vibronic(ctx, ladders);

    const auto diabats = diabatic_states(ctx.scan, fit.theta.model, fit.phi.model);
    write_entropy(ctx, ladders, &diabats);
    export_schmidt_modes(ctx, ladders, &diabats);
}

void run_born_huang(RunContext& ctx) {
    const RunConfig& c = ctx.cfg;
    std::vector<std::vector<VibronicState>> per_surface;
    for (int s = 0; s < c.n_states; ++s) {
        per_surface.push_back(solve_nuclear(ctx.scan, s, ctx.fgh_mass, c.channel_cutoff));
        std::printf("surface %d: %zu channels below %s\n", s, per_surface.back().size(),
                    io::format_g17(c.channel_cutoff).c_str());
    }
    write_vibronic(ctx, per_surface);

    const BhBasis basis = make_bh_basis(per_surface, ctx.rg);
    const CouplingField a = nac_hellmann_feynman(ctx.scan, ctx.sm);
    const CouplingField b = second_order_b(a);
    const SymmetricMatrix h = assemble_bh_matrix(basis, a, b, ctx.fgh_mass);

    const int total = int(basis.channels.size());
    const int n_report = c.report_states == 0 ? total : std::min(c.report_states, total);
    const BhSolution sol = solve_bh(h, n_report);
    std::printf("coupled basis: %d channels, reporting %d states\n", total, n_report);

    auto header = ctx.header;
    header.push_back("channel_cutoff=" + io::format_g17(c.channel_cutoff));
    header.push_back("entropy_base=" + std::string(1, c.entropy_base));
    io::CsvWriter w(ctx.out + "/bh_report.csv", header,
                    {"state", "energy", "entropy", "dominant_surface", "dominant_m",
                     "dominant_weight", "w0", "w1", "w2"});
    for (int i = 0; i < n_report; ++i) {
        const Eigen::VectorXd lam = sol.lambda.row(i);
        const Eigen::MatrixXd psi = bh_total_wavefunction(ctx.scan, basis, lam);
        const double s = schmidt_entropy(psi) / ctx.entropy_div;
        const int dom = sol.dominant_channel[i];
        const Eigen::VectorXd wsurf = surface_weights(basis, lam, std::max(3, c.n_states));
        w.row({double(i), sol.energies(i), s, double(basis.channels[dom].surface),
               double(basis.channels[dom].m), lam(dom) * lam(dom), wsurf(0), wsurf(1),
               wsurf(2)});
    }

    if (c.lambda_json) {
        nlohmann::ordered_json j;
        j["version"] = kVersion;
        j["config"] = c.hash();
        j["channel_cutoff"] = c.channel_cutoff;
        auto& channels = j["channels"] = nlohmann::ordered_json::array();
        for (int q = 0; q < total; ++q)
            channels.push_back({{"surface", basis.channels[q].surface},
                                {"m", basis.channels[q].m},
                                {"energy", basis.diagonal_energies(q)}});
        auto& states = j["states"] = nlohmann::ordered_json::array();
        for (int i = 0; i < n_report; ++i) {
            std::vector<double> lam(sol.lambda.row(i).begin(), sol.lambda.row(i).end());
            states.push_back({{"energy", sol.energies(i)}, {"lambda", lam}});
        }
        std::ofstream out(ctx.out + "/bh_lambda.json", std::ios::binary);
        if (!out) throw ConfigError(kModule, "cannot open bh_lambda.json for writing");
        out << j.dump(2) << '\n';
    }
}

}  // namespace

void run_pipeline(const RunConfig& cfg, const std::string& out_dir) {
    RunContext ctx{cfg,
                   out_dir,
                   cfg.cache_dir.empty() ? out_dir + "/cache" : cfg.cache_dir,
                   Grid1D::from_range(cfg.grid_x.lo, cfg.grid_x.hi, cfg.grid_x.n),
                   Grid1D::from_range(cfg.grid_r.lo, cfg.grid_r.hi, cfg.grid_r.n),
                   {},
                   cfg.sm,
                   0.0,
                   {},
                   {},
                   cfg.entropy_base == '2' ? std::log(2.0) : 1.0};
    fs::create_directories(ctx.out);
    fs::create_directories(ctx.cache);

    ctx.header = {
        "model=" + cfg.model + " picture=" + cfg.picture,
        std::string("version=") + kVersion + " config=" + cfg.hash(),
        "grid_x=" + grid_text(cfg.grid_x) + " grid_r=" + grid_text(cfg.grid_r),
    };

    prepare_model(ctx);
    prepare_scan(ctx);
    write_pec(ctx);
    if (cfg.n_states >= 2) print_crossings(ctx);

    if (cfg.picture == "adiabatic") {
        run_adiabatic(ctx);
    } else if (cfg.picture == "diabatic") {
        run_diabatic(ctx);
    } else {
        run_born_huang(ctx);
    }
}

namespace {

struct ToleranceRule {
    std::string file;
    std::string column;
    double tol;
};

std::vector<ToleranceRule> load_tolerances(const std::string& path) {
    std::vector<ToleranceRule> rules;
    if (path.empty()) return rules;
    std::ifstream in(path);
    if (!in) throw ConfigError(kModule, "cannot open tolerance file " + path);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        ToleranceRule r;
        if (!(ss >> r.file >> r.column >> r.tol))
            throw ConfigError(kModule, "expected '<file> <column> <tol>' in " + path);
        rules.push_back(r);
    }
    return rules;
}

double lookup_tolerance(const std::vector<ToleranceRule>& rules, const std::string& rel,
                        const std::string& column) {
    const std::string base = fs::path(rel).filename().string();
    for (const auto& r : rules) {
        const bool file_ok = r.file == "*" || r.file == rel || r.file == base;
        const bool col_ok = r.column == "*" || r.column == column;
        if (file_ok && col_ok) return r.tol;
    }
    return 1e-12;
}

bool cells_equal(double a, double b, double tol) {
    if (std::isnan(a) && std::isnan(b)) return true;
    if (a == b) return true;  // covers matching infinities
    return std::abs(a - b) <= tol;
}

}  // namespace

GoldenDiff diff_goldens(const std::string& out_dir, const std::string& golden_dir,
                        const std::string& tolerance_file) {
    const auto rules = load_tolerances(tolerance_file);
    GoldenDiff diff;
    std::ostringstream report;

    if (!fs::is_directory(golden_dir)) {
        diff.report = "golden directory not found: " + golden_dir + "\n";
        return diff;
    }

    std::vector<std::string> rels;
    for (const auto& e : fs::recursive_directory_iterator(golden_dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".csv" || ext == ".json")
            rels.push_back(fs::relative(e.path(), golden_dir).string());
    }
    std::sort(rels.begin(), rels.end());
    if (rels.empty()) {
        diff.report = "no golden files under " + golden_dir + "\n";
        return diff;
    }

    bool all_ok = true;
    for (const auto& rel : rels) {
        const std::string got = out_dir + "/" + rel;
        const std::string want = golden_dir + "/" + rel;
        if (!fs::exists(got)) {
            report << "FAIL " << rel << ": missing from output\n";
            all_ok = false;
            continue;
        }
        if (fs::path(rel).extension() == ".json") {
            const bool same = io::read_file_bytes(got) == io::read_file_bytes(want);
            report << (same ? "OK   " : "FAIL ") << rel
                   << (same ? "" : ": byte content differs") << "\n";
            all_ok = all_ok && same;
            continue;
        }

        io::CsvTable a, b;
        try {
            a = io::read_csv(want);
            b = io::read_csv(got);
        } catch (const Error& e) {
            report << "FAIL " << rel << ": " << e.what() << "\n";
            all_ok = false;
            continue;
        }
        if (a.columns != b.columns) {
            report << "FAIL " << rel << ": column set differs\n";
            all_ok = false;
            continue;
        }
        if (a.rows.size() != b.rows.size()) {
            report << "FAIL " << rel << ": " << a.rows.size() << " golden rows vs "
                   << b.rows.size() << "\n";
            all_ok = false;
            continue;
        }
        double worst = 0.0;
        std::size_t worst_row = 0, worst_col = 0;
        bool ok = true;
        for (std::size_t i = 0; i < a.rows.size() && ok; ++i) {
            for (std::size_t cidx = 0; cidx < a.columns.size(); ++cidx) {
                const double tol = lookup_tolerance(rules, rel, a.columns[cidx]);
                const double ga = a.rows[i][cidx], gb = b.rows[i][cidx];
                if (!cells_equal(ga, gb, tol)) {
                    report << "FAIL " << rel << ": " << a.columns[cidx] << " row " << i
                           << ": " << io::format_g17(ga) << " vs " << io::format_g17(gb)
                           << " (tol " << tol << ")\n";
                    ok = false;
                    all_ok = false;
                    break;
                }
                const double d = std::abs(ga - gb);
                if (!std::isnan(d) && d > worst) {
                    worst = d;
                    worst_row = i;
                    worst_col = cidx;
                }
            }
        }
        if (ok)
            report << "OK   " << rel << ": " << a.rows.size() << " rows, worst |diff| "
                   << io::format_g17(worst) << " (" << a.columns[worst_col] << " row "
                   << worst_row << ")\n";
    }
    diff.pass = all_ok;
    diff.report = report.str();
    return diff;
}

int run_calibration(const std::string& reference_path, const std::string& out_path,
                    const GridSpec& x_grid) {
    const auto reference = io::read_two_column(reference_path);
    const Grid1D xg = Grid1D::from_range(x_grid.lo, x_grid.hi, x_grid.n);
    H2pModel model;
    const auto table = calibrate_softening(model, reference, xg);
    const std::string input_hash =
        io::hex16(io::fnv1a64(io::read_file_bytes(reference_path) + "|x=" + grid_text(x_grid)));
    io::write_two_column(out_path,
                         {"softening table a(R)", "inputs=" + input_hash,
                          "x_grid=" + grid_text(x_grid)},
                         table);
    return int(table.size());
}

}  // namespace vib
