#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "vibronic/errors.hpp"
#include "vibronic/pipeline.hpp"
#include "vibronic/version.hpp"

int main(int argc, char** argv) {
    // Deterministic kernels regardless of the host's BLAS defaults; worker
    // parallelism is handled above the solver.
    setenv("OPENBLAS_NUM_THREADS", "1", 1);

    CLI::App app{"1D vibronic models: surfaces, wave functions, entanglement"};
    app.set_version_flag("--version", vib::kVersion);
    app.require_subcommand(1);

    std::string config, out = "out", entropy_base;
    int threads = 0;
    auto* run = app.add_subcommand("run", "execute a configured pipeline");
    run->add_option("--config", config, "config file (ini-style sections)")->required();
    run->add_option("--out", out, "output directory (default: out)");
    run->add_option("--threads", threads, "electronic scan worker threads");
    run->add_option("--entropy-base", entropy_base, "entropy units: e (nats) or 2 (bits)")
        ->check(CLI::IsMember({"e", "2"}));

    std::string got_dir, golden_dir, tol_file;
    auto* dg = app.add_subcommand("diff-goldens", "compare run output against golden files");
    dg->add_option("output", got_dir, "directory produced by 'run'")->required();
    dg->add_option("golden", golden_dir, "directory of golden files")->required();
    dg->add_option("--tolerances", tol_file, "per-file/column tolerance table");

    std::string reference, table_out;
    vib::GridSpec xg{-30.0, 30.0, 501};
    auto* cal = app.add_subcommand("calibrate-softening",
                                   "fit soft-core widths to a reference ground curve");
    cal->add_option("--reference", reference, "two-column reference curve R E")->required();
    cal->add_option("--out", table_out, "output table path")->required();
    cal->add_option("--x-min", xg.lo, "electronic grid minimum");
    cal->add_option("--x-max", xg.hi, "electronic grid maximum");
    cal->add_option("--x-n", xg.n, "electronic grid points (odd)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            vib::RunConfig cfg = vib::load_run_config(config);
            if (threads > 0) cfg.threads = threads;
            if (!entropy_base.empty()) cfg.entropy_base = entropy_base[0];
            vib::run_pipeline(cfg, out);
        } else if (dg->parsed()) {
            const vib::GoldenDiff diff = vib::diff_goldens(got_dir, golden_dir, tol_file);
            std::fputs(diff.report.c_str(), stdout);
            if (!diff.pass) return 1;
        } else {
            const int rows = vib::run_calibration(reference, table_out, xg);
            std::printf("wrote %s (%d rows)\n", table_out.c_str(), rows);
        }
    } catch (const vib::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const vib::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
