#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsdivn
{
    /// Raised for malformed or inconsistent scenario input (CLI exit code 1).
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    enum class Mode
    {
        dsdivn,
        self_organized,
        no_fallback,
    };

    std::string_view to_string(Mode m);
    Mode parse_mode(std::string_view s);

    struct LinkModelParams
    {
        double bitrate_bps = 6e6;
        double per_hop_proc_s = 1e-3;
        double prop_speed_mps = 3e8;
        double loss_prob = 0.01;
    };

    struct ProtocolTimers
    {
        double hb_period_s = 0.2;
        double detect_timeout_s = 0.6;
        double advert_period_s = 1.0;
        double sync_period_s = 1.0;
        double view_period_s = 2.0;
        double monitor_period_s = 1.0;
        double maintenance_period_s = 1.0;
        double retry_period_s = 0.1;
        int max_retries = 3;
        double idle_timeout_s = 5.0;
        double hard_timeout_s = 30.0;
        double election_window_s = 0.1;
        double mobility_step_s = 0.1;
        double pdr_window_s = 1.0;
        // lifetime of one application flow (one destination) at a sender
        double flow_duration_s = 1.0;
        int buffer_per_key = 32;
        bool advert_enabled = true;
        bool piggyback_recovery_id = true;
    };

    struct FailureSpec
    {
        int target_segment = 0;
        int target_dir = +1;
        double start_s = 0.0;
        double duration_s = 0.0;
    };

    struct ScenarioConfig
    {
        double area_m = 1000.0;
        double segment_len_m = 150.0;
        int n_vehicles = 200;
        double v_min_mps = 10.0;
        double v_max_mps = 30.0;
        double tx_range_m = 300.0;
        double pkt_rate_hz = 5.0;
        double sim_duration_s = 120.0;
        Mode mode = Mode::dsdivn;
        ProtocolTimers timers;
        std::optional<FailureSpec> failure;
        LinkModelParams link;
        std::uint64_t seed = 1;

        int segment_count() const;

        /// Throws ConfigError when an invariant is violated.
        void validate() const;
    };

    ScenarioConfig parse_scenario(std::string_view json_text);
    ScenarioConfig load_scenario(const std::filesystem::path &path);
    std::string scenario_to_json(const ScenarioConfig &cfg);
} // namespace dsdivn
