#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "gfront/harness.hpp"
#include "gfront/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gfront: effective Hamiltonians, Wulff shapes and front "
                 "propagation for the G-equation"};
    app.set_version_flag("--version", gfront::kVersion);

    std::string experiment, config_path, out_dir = "out";
    int threads = 0;
    if (const char* env = std::getenv("GFRONT_THREADS")) threads = std::atoi(env);

    app.add_option("experiment", experiment,
                   "diagnostics | hbar_table | enhancement | certificate | wulff | front | "
                   "error_rate | slow_table | area_fraction")
        ->required();
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--out", out_dir, "output directory (default: out)");
    app.add_option("--threads", threads, "worker threads (0 = auto; env GFRONT_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a config error
    }

    gfront::set_thread_count(threads);
    return gfront::run_experiment(experiment, config_path, out_dir);
}
