// Reproduces the pricing experiments from JSON configs or builtin scenarios.
//
//   cashdiv_bench run vellekoop7y --out table1.csv
//   cashdiv_bench run my_case.json --ref-space 4000 --ref-time 1000 --seed 7
//   cashdiv_bench timing --dividends 100 --options 1000 --methods BB-LB,BB

#include "cashdiv/bench.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

int run(const std::string& source, const std::string& out_path, std::size_t ref_space,
        std::size_t ref_time, const std::optional<std::uint64_t>& seed, unsigned threads) {
    auto sc = cashdiv::bench::load_scenario(source);
    if (ref_space) sc.reference.space_steps = ref_space;
    if (ref_time) sc.reference.time_steps = ref_time;
    if (seed) sc.mc.seed = *seed;
    sc.reference.validate();

    const auto rows = cashdiv::bench::run_scenario(sc, threads);
    if (out_path.empty() || out_path == "-") {
        cashdiv::bench::write_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return 1;
        }
        cashdiv::bench::write_csv(out, rows);
        std::cerr << "wrote " << rows.size() << " rows to " << out_path << "\n";
    }
    return 0;
}

int timing(std::size_t dividends, std::size_t options, const std::vector<std::string>& names, int repeats) {
    std::vector<cashdiv::bench::MethodSpec> methods;
    for (const auto& n : names) methods.push_back(cashdiv::bench::parse_method_spec(n));
    cashdiv::PricingConfig cfg;
    cfg.mc.paths = 100'000;
    const auto rows = cashdiv::bench::run_timing(dividends, options, methods, cfg, repeats);
    std::printf("method,dividends,options,seconds,seconds_half_dividends,ratio\n");
    for (const auto& r : rows) {
        std::printf("%s,%zu,%zu,%.6f,%.6f,%.3f\n", r.method.c_str(), r.dividends, r.options, r.seconds,
                    r.seconds_half, r.ratio);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"European options on stocks with discrete dividends: benchmark runs"};
    app.require_subcommand(1);

    std::string source, out_path;
    std::size_t ref_space = 0, ref_time = 0;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    auto* run_cmd = app.add_subcommand("run", "price a scenario and write a CSV report");
    run_cmd->add_option("scenario", source, "builtin name (vellekoop7y, single-div, gocsei10y, zhang-extreme) or JSON file")
        ->required();
    run_cmd->add_option("--out", out_path, "CSV output path (default: stdout)");
    run_cmd->add_option("--ref-space", ref_space, "reference FDM space steps");
    run_cmd->add_option("--ref-time", ref_time, "reference FDM time steps");
    run_cmd->add_option("--seed", seed, "Monte Carlo seed");
    run_cmd->add_option("--threads", threads, "worker threads (0: all cores)");

    std::size_t dividends = 100, options = 1000;
    std::vector<std::string> methods{"BB-LB", "BB"};
    int repeats = 1;
    auto* timing_cmd = app.add_subcommand("timing", "time a batch of calls for n and n/2 dividends");
    timing_cmd->add_option("--dividends", dividends, "number of dividends")->check(CLI::PositiveNumber);
    timing_cmd->add_option("--options", options, "number of options per batch")->check(CLI::PositiveNumber);
    timing_cmd->add_option("--methods", methods, "comma-separated methods")->delimiter(',');
    timing_cmd->add_option("--repeats", repeats, "timing repetitions, fastest kept")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run_cmd) return run(source, out_path, ref_space, ref_time, seed, threads);
        return timing(dividends, options, methods, repeats);
    } catch (const cashdiv::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
