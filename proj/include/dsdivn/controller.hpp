#pragma once

#include "dsdivn/config.hpp"
#include "dsdivn/messages.hpp"

#include <map>
#include <set>
#include <optional>
#include <variant>

namespace dsdivn
{
    enum class ControllerStatus
    {
        standby,
        active,
        failed,
    };

    std::string_view to_string(ControllerStatus s);

    /// Mobile controller hosted by one vehicle; standby until its host is elected.
    struct ControllerState
    {
        VehicleId host = 0;
        DomainKey domain;
        ControllerStatus status = ControllerStatus::standby;
        // status to restore when an injected failure ends
        ControllerStatus status_before_failure = ControllerStatus::standby;
        std::uint64_t term = 0;
        std::map<VehicleId, MemberRecord> local_view;
        std::map<DomainKey, ViewSummary> neighbor_views;
        CandidateList candidates;
        std::uint64_t kb_version = 0;
        std::size_t installed_flows = 0;
        // replica held while this vehicle is a recovery candidate
        std::optional<KnowledgeBase> replica;
        // hosts this controller took over from; skipped as candidates until heard again
        std::set<VehicleId> suspects;
        // bumped on every status change; periodic timers carry the epoch they were armed in
        std::uint64_t epoch = 0;

        bool active() const { return status == ControllerStatus::active; }

        /// Copy of the current state with the next version number.
        KnowledgeBase snapshot(std::uint64_t version) const;

        /// Load local view, neighbor views and term from a replicated knowledge base.
        void seed_from(const KnowledgeBase &kb);
    };

    struct RouteParams
    {
        double range_m = 300.0;
        // neighbor views older than this are ignored
        double neighbor_stale_s = 6.0;
        Mode mode = Mode::dsdivn;
        double idle_timeout_s = 5.0;
        double hard_timeout_s = 30.0;
        bool piggyback_recovery_id = true;
    };

    using RouteResult = std::variant<FlowEntry, FlowReject>;

    /// Flow rule for `req` from the controller's local and neighbor views.
    ///
    /// A destination in direct range of the requester becomes the next hop. Otherwise the
    /// next hop is the known vehicle in the requester's range that gets closest to the
    /// destination (in-domain) or to the adjacent controller's head (out-of-domain).
    RouteResult compute_route(const ControllerState &ctrl, const FlowRequest &req, SimTime now, double host_x_m,
                              const RouteParams &params);

    /// Drop view records that are older than `max_age_s` or extrapolate outside the domain.
    void prune_views(ControllerState &ctrl, SimTime now, double segment_len_m, double max_age_s);
} // namespace dsdivn
