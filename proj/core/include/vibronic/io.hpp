#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "vibronic/bo.hpp"

namespace vib::io {

// Shortest round-trippable decimal form.
std::string format_g17(double v);

std::uint64_t fnv1a64(const std::string& s);
std::string hex16(std::uint64_t h);

// CSV with '#'-prefixed header comments, then a column-name row, then
// numeric rows at full precision. '\n' line ends only.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& comments,
              const std::vector<std::string>& columns);

    void row(const std::vector<double>& values);

private:
    std::ofstream out_;
    std::string path_;
    std::size_t n_cols_;
};

struct CsvTable {
    std::vector<std::string> comments;  // without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

std::vector<std::pair<double, double>> read_two_column(const std::string& path);

void write_two_column(const std::string& path, const std::vector<std::string>& comments,
                      const std::vector<std::pair<double, double>>& data);

std::string read_file_bytes(const std::string& path);

// Electronic scan cache, raw doubles keyed by the caller's filename hash.
// Load returns false on a missing file or a layout mismatch.
bool load_scan_cache(const std::string& path, const Grid1D& x_grid, const Grid1D& r_grid,
                     int n_states, ElectronicScan& out);
void save_scan_cache(const std::string& path, const ElectronicScan& scan);

}  // namespace vib::io
