#pragma once

#include "dsdivn/clustering.hpp"
#include "dsdivn/config.hpp"
#include "dsdivn/sim_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsdivn
{
    struct PdrWindow
    {
        double t_start = 0.0;
        double t_end = 0.0;
        std::uint64_t sent = 0;
        std::uint64_t received = 0;
        // empty when nothing was sent in the window
        std::optional<double> pdr;
    };

    struct InstallSample
    {
        double dist_m = 0.0;
        std::uint32_t size_B = 0;
        double elapsed_s = 0.0;
        DomainKey domain;
    };

    /// A controller that took over after a failure (recovery or re-election).
    struct TakeoverEvent
    {
        DomainKey domain;
        VehicleId controller = 0;
        double activated_at_s = 0.0;
        bool from_replica = false;
        bool election = false;
        std::optional<double> first_install_s;
    };

    struct InvariantTally
    {
        std::uint64_t checks = 0;
        std::uint64_t multi_active = 0;
        std::uint64_t adjacent_heads_unreachable = 0;
        std::uint64_t channel_mixing = 0;
        std::uint64_t expired_forwarding = 0;
        std::uint64_t mode_gated_messages = 0;
        std::uint64_t head_not_argmax = 0;

        std::uint64_t total() const
        {
            return multi_active + adjacent_heads_unreachable + channel_mixing + expired_forwarding +
                   mode_gated_messages + head_not_argmax;
        }
    };

    struct RunReport
    {
        ScenarioConfig config;
        std::vector<PdrWindow> pdr;
        std::vector<InstallSample> installs;
        std::map<std::string, std::uint64_t> counters;
        std::vector<TakeoverEvent> takeovers;
        InvariantTally invariants;
        std::uint64_t mobility_hash = 0;
        std::uint64_t traffic_hash = 0;

        std::uint64_t sent = 0;
        std::uint64_t received = 0;
        std::uint64_t dropped = 0;
        std::uint64_t in_flight = 0;
    };

    /// Bins application packets into fixed windows by send time.
    class PdrRecorder
    {
    public:
        PdrRecorder(double window_s, double duration_s);

        void on_send(SimTime sent_at);
        void on_delivered(SimTime sent_at);

        std::vector<PdrWindow> series() const;

    private:
        std::size_t index(SimTime t) const;

        double m_window;
        double m_duration;
        std::vector<std::uint64_t> m_sent;
        std::vector<std::uint64_t> m_received;
    };

    struct PacketOutcome
    {
        double sent_at_s = 0.0;
        bool delivered = false;
    };

    /// Batch form of PdrRecorder.
    std::vector<PdrWindow> record_traffic(std::span<const PacketOutcome> packets, double window_s, double duration_s);

    /// Mean of defined PDR values over windows intersecting [t0, t1).
    std::optional<double> mean_pdr(std::span<const PdrWindow> series, double t0, double t1);
} // namespace dsdivn
