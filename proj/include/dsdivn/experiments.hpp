#pragma once

#include "dsdivn/config.hpp"
#include "dsdivn/metrics.hpp"
#include "dsdivn/network.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

namespace dsdivn
{
    /// Raised when an output file cannot be written.
    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct ScenarioRun
    {
        RunReport report;
        std::vector<TraceLine> trace;
    };

    ScenarioRun run_scenario(const ScenarioConfig &cfg, bool trace = false);

    struct FailureExperiment
    {
        // keyed by mode, one report per seed in seed order
        std::map<Mode, std::vector<RunReport>> runs;
        std::map<Mode, std::vector<PdrWindow>> mean;
    };

    /// Runs every mode over seeds cfg.seed .. cfg.seed+seeds-1. `threads` = 0 uses the
    /// hardware concurrency.
    FailureExperiment run_failure_experiment(const ScenarioConfig &cfg, int seeds, unsigned threads = 0);

    /// Window-wise average of the defined per-run PDR values; null where no run defines one.
    std::vector<PdrWindow> mean_series(std::span<const RunReport> runs);

    struct SweepCell
    {
        double distance_m = 0.0;
        std::uint32_t size_B = 0;
        int reps = 0;
        double mean_elapsed_s = 0.0;
    };

    /// Request/install round trip over a static chain: requester at 0, relays every
    /// range/2, controller at `distance_m`.
    double measure_install(double distance_m, std::uint32_t size_B, const LinkModelParams &link, double range_m,
                           std::uint64_t seed = 0);

    /// Cells in distance-major order.
    std::vector<SweepCell> run_distance_sweep(std::span<const double> distances, std::span<const std::uint32_t> sizes,
                                              int reps, const LinkModelParams &link, double range_m);

    void write_pdr_csv(const std::filesystem::path &path, const std::map<Mode, std::vector<RunReport>> &runs);
    void write_mean_pdr_csv(const std::filesystem::path &path, const std::map<Mode, std::vector<PdrWindow>> &mean);
    void write_install_csv(const std::filesystem::path &path, std::span<const InstallSample> samples);
    void write_sweep_csv(const std::filesystem::path &path, std::span<const SweepCell> cells);
    void write_counters_csv(const std::filesystem::path &path, const std::map<std::string, std::uint64_t> &counters);
    void write_trace(const std::filesystem::path &path, std::span<const TraceLine> trace);

    /// pdr.csv, install.csv and counters.csv for one run.
    void export_csv(const RunReport &report, const std::filesystem::path &dir);

    /// Shortest round-trip decimal form, independent of the global locale.
    std::string format_number(double v);
} // namespace dsdivn
