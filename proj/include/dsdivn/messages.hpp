#pragma once

#include "dsdivn/clustering.hpp"
#include "dsdivn/flow_table.hpp"
#include "dsdivn/sim_time.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace dsdivn
{
    /// Monitored state of one vehicle as last reported to a controller.
    struct MemberRecord
    {
        VehicleId id = 0;
        double x_m = 0.0;
        double v_mps = 0.0;
        int dir = +1;
        SimTime seen;

        /// Constant-speed extrapolation to `now`.
        double position_at(SimTime now) const { return x_m + dir * v_mps * now.seconds_since(seen); }
    };

    /// Local view an active controller shares with its adjacent controllers.
    struct ViewSummary
    {
        DomainKey domain;
        VehicleId head = 0;
        double head_x_m = 0.0;
        std::vector<MemberRecord> members;
        SimTime received_at;
    };

    /// Replicated controller state. Compression is modeled by encoded_size_B only.
    struct KnowledgeBase
    {
        DomainKey domain;
        std::uint64_t term = 0;
        std::uint64_t version = 0;
        std::vector<MemberRecord> view;
        std::vector<ViewSummary> neighbors;
        CandidateList candidates;
        std::size_t installed_flows = 0;

        std::uint32_t encoded_size_B() const;
    };

    struct FlowRequest
    {
        VehicleId requester = 0;
        VehicleId dst = 0;
        std::uint32_t size_B = 100;
        double requester_x_m = 0.0;
        DomainKey domain;
        bool redirected = false;
    };

    struct FlowInstall
    {
        FlowEntry entry;
        std::uint64_t term = 0;
    };

    struct FlowReject
    {
        VehicleId dst = 0;
    };

    struct Heartbeat
    {
        VehicleId controller = 0;
        std::uint64_t term = 0;
        DomainKey domain;
    };

    struct CandidateAdvert
    {
        DomainKey domain;
        std::optional<VehicleId> recovery_id;
    };

    struct KbSync
    {
        KnowledgeBase kb;
    };

    struct ViewExchange
    {
        ViewSummary view;
    };

    struct MonitorReport
    {
        MemberRecord record;
        DomainKey domain;
    };

    /// Planned controller migration; carries the full controller state.
    struct Handover
    {
        KnowledgeBase kb;
        VehicleId from = 0;
    };

    struct ElectionCall
    {
        DomainKey domain;
        std::uint64_t term = 0;
    };

    struct ElectionBid
    {
        DomainKey domain;
        std::uint64_t term = 0;
        VehicleId bidder = 0;
        double residual_s = 0.0;
    };

    using ControlMessage = std::variant<FlowRequest, FlowInstall, FlowReject, Heartbeat, CandidateAdvert, KbSync,
                                        ViewExchange, MonitorReport, Handover, ElectionCall, ElectionBid>;

    std::string_view message_type(const ControlMessage &m);

    /// Modeled on-air size in bytes.
    std::uint32_t message_size_B(const ControlMessage &m);

    namespace sizes
    {
        inline constexpr std::uint32_t kFlowRequest = 100;
        inline constexpr std::uint32_t kFlowInstall = 80;
        inline constexpr std::uint32_t kFlowReject = 40;
        inline constexpr std::uint32_t kHeartbeat = 32;
        inline constexpr std::uint32_t kCandidateAdvert = 32;
        inline constexpr std::uint32_t kMonitorReport = 48;
        inline constexpr std::uint32_t kElection = 32;
        inline constexpr std::uint32_t kDataPacket = 512;
        inline constexpr std::uint32_t kKbHeader = 64;
        inline constexpr std::uint32_t kKbPerMember = 24;
        inline constexpr std::uint32_t kViewHeader = 32;
        inline constexpr std::uint32_t kViewPerMember = 16;
    } // namespace sizes
} // namespace dsdivn
