#pragma once

#include <map>
#include <string>
#include <vector>

#include "vibronic/model_potentials.hpp"

namespace vib {

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;
};

// Flat key=value configuration, sections joined as "section.key". Any key can
// be overridden through the environment as VIBRONIC_<SECTION>_<KEY>. The
// canonical form covers every effective value, so the hash identifies the
// computation rather than the file spelling.
struct RunConfig {
    std::string model;    // "h2p" | "shin_metiu"
    std::string picture;  // "adiabatic" | "diabatic" | "born_huang"
    int n_states = 3;
    int threads = 1;
    char entropy_base = 'e';
    std::string cache_dir;  // empty: <out>/cache

    GridSpec grid_x;
    GridSpec grid_r;

    std::vector<int> surfaces;     // nuclear ladders to build
    std::vector<double> cutoffs;   // per entry in 'surfaces'
    bool bound_by_edge = false;    // cap each cutoff at the surface's edge value

    bool full_density = true;
    bool simplified = false;
    bool perturbative = false;
    int schmidt_modes = 0;  // modes exported per selected state; 0 disables
    int schmidt_state = 0;  // vibrational index selected for mode export

    std::string reference_curve;  // h2p only

    ShinMetiuModel sm;

    double channel_cutoff = -0.15;  // coupled-channel basis truncation
    bool lambda_json = false;
    int report_states = 0;  // coupled states reported; 0 means all

    std::map<std::string, std::string> effective;

    std::string canonical() const;
    std::string hash() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_map(std::map<std::string, std::string> kv);

void run_pipeline(const RunConfig& cfg, const std::string& out_dir);

struct GoldenDiff {
    bool pass = false;
    std::string report;
};

// Column-wise numeric comparison of every golden CSV against the run output.
// Tolerances come from an optional file of "<file> <column> <tol>" lines,
// '*' wildcards allowed, first match wins, default 1e-12.
GoldenDiff diff_goldens(const std::string& out_dir, const std::string& golden_dir,
                        const std::string& tolerance_file);

// Standalone softening calibration; writes a two-column table and returns
// the number of rows.
int run_calibration(const std::string& reference_path, const std::string& out_path,
                    const GridSpec& x_grid);

}  // namespace vib
