#include "dsdivn/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{
    using namespace dsdivn;

    ScenarioConfig load(const std::string &path, std::optional<std::uint64_t> seed, std::optional<std::string> mode)
    {
        auto cfg = load_scenario(path);
        if (seed)
        {
            cfg.seed = *seed;
        }
        if (mode)
        {
            cfg.mode = parse_mode(*mode);
        }
        cfg.validate();
        return cfg;
    }

    void ensure_dir(const std::filesystem::path &dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
        {
            throw IoError("cannot create " + dir.string() + ": " + ec.message());
        }
    }

    void print_summary(const RunReport &r)
    {
        std::cout << "mode=" << to_string(r.config.mode) << " seed=" << r.config.seed << " sent=" << r.sent
                  << " received=" << r.received << " dropped=" << r.dropped << " in_flight=" << r.in_flight
                  << " invariant_violations=" << r.invariants.total() << '\n';
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Distributed SDN vehicular network simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::string out_dir;
    bool trace = false;
    auto *sim = app.add_subcommand("simulate", "Run one scenario");
    sim->add_option("--scenario", scenario, "Scenario JSON file")->required();
    sim->add_option("--seed", seed, "Override the scenario seed");
    sim->add_option("--mode", mode, "dsdivn | self-organized | no-fallback");
    sim->add_option("--out", out_dir, "Output directory for CSV files");
    sim->add_flag("--trace", trace, "Also write the message log (trace.tsv)");

    int seeds = 10;
    unsigned threads = 0;
    auto *fig4 = app.add_subcommand("fig4", "Failure comparison across the three recovery modes");
    fig4->add_option("--scenario", scenario, "Scenario JSON file")->required();
    fig4->add_option("--seeds", seeds, "Number of seeds starting at the scenario seed")->check(CLI::PositiveNumber);
    fig4->add_option("--threads", threads, "Worker threads (0 = all cores)");
    fig4->add_option("--out", out_dir, "Output directory")->required();

    std::vector<double> distances;
    std::vector<std::uint32_t> sizes;
    int reps = 20;
    double range = 300.0;
    auto *fig5 = app.add_subcommand("fig5", "Install time versus controller distance and request size");
    fig5->add_option("--distances", distances, "Distances in meters")->delimiter(',')->required();
    fig5->add_option("--sizes", sizes, "Request sizes in bytes")->delimiter(',')->required();
    fig5->add_option("--reps", reps, "Repetitions per cell")->check(CLI::PositiveNumber);
    fig5->add_option("--range", range, "Radio range in meters")->check(CLI::PositiveNumber);
    fig5->add_option("--out", out_dir, "Output directory")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try
    {
        if (*sim)
        {
            const auto cfg = load(scenario, seed, mode);
            const auto run = run_scenario(cfg, trace);
            print_summary(run.report);
            if (!out_dir.empty())
            {
                export_csv(run.report, out_dir);
                if (trace)
                {
                    write_trace(std::filesystem::path(out_dir) / "trace.tsv", run.trace);
                }
            }
        }
        else if (*fig4)
        {
            auto cfg = load(scenario, seed, std::nullopt);
            if (!cfg.failure)
            {
                throw ConfigError("fig4 needs a failure section in the scenario");
            }
            const auto exp = run_failure_experiment(cfg, seeds, threads);
            ensure_dir(out_dir);
            const std::filesystem::path dir(out_dir);
            write_pdr_csv(dir / "pdr.csv", exp.runs);
            write_mean_pdr_csv(dir / "pdr_mean.csv", exp.mean);
            std::vector<InstallSample> installs;
            std::map<std::string, std::uint64_t> counters;
            for (const auto &[m, runs] : exp.runs)
            {
                for (const auto &r : runs)
                {
                    installs.insert(installs.end(), r.installs.begin(), r.installs.end());
                    for (const auto &[name, v] : r.counters)
                    {
                        counters[std::string(to_string(m)) + "." + name] += v;
                    }
                    counters[std::string(to_string(m)) + ".invariants.violations"] += r.invariants.total();
                }
            }
            write_install_csv(dir / "install.csv", installs);
            write_counters_csv(dir / "counters.csv", counters);
            for (const auto &[m, series] : exp.mean)
            {
                const auto pre = mean_pdr(series, 30.0, cfg.failure->start_s);
                const auto during =
                    mean_pdr(series, cfg.failure->start_s, cfg.failure->start_s + cfg.failure->duration_s);
                std::cout << to_string(m) << ": pre=" << (pre ? format_number(*pre) : "n/a")
                          << " failure=" << (during ? format_number(*during) : "n/a") << '\n';
            }
        }
        else if (*fig5)
        {
            LinkModelParams link;
            link.loss_prob = 0.0;
            const auto cells = run_distance_sweep(distances, sizes, reps, link, range);
            ensure_dir(out_dir);
            write_sweep_csv(std::filesystem::path(out_dir) / "install.csv", cells);
            for (const auto &c : cells)
            {
                std::cout << format_number(c.distance_m) << " m, " << c.size_B << " B: "
                          << format_number(c.mean_elapsed_s) << " s\n";
            }
        }
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    catch (const IoError &e)
    {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
