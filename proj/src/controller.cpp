#include "dsdivn/controller.hpp"

#include <algorithm>

#include <cmath>
#include <vector>

namespace dsdivn
{
    std::string_view to_string(ControllerStatus s)
    {
        switch (s)
        {
        case ControllerStatus::standby:
            return "standby";
        case ControllerStatus::active:
            return "active";
        case ControllerStatus::failed:
            return "failed";
        }
        return "?";
    }

    KnowledgeBase ControllerState::snapshot(std::uint64_t version) const
    {
        KnowledgeBase kb;
        kb.domain = domain;
        kb.term = term;
        kb.version = version;
        kb.view.reserve(local_view.size());
        for (const auto &[id, rec] : local_view)
        {
            kb.view.push_back(rec);
        }
        for (const auto &[key, summary] : neighbor_views)
        {
            kb.neighbors.push_back(summary);
        }
        kb.candidates = candidates;
        kb.installed_flows = installed_flows;
        return kb;
    }

    void ControllerState::seed_from(const KnowledgeBase &kb)
    {
        domain = kb.domain;
        local_view.clear();
        for (const auto &rec : kb.view)
        {
            local_view[rec.id] = rec;
        }
        neighbor_views.clear();
        for (const auto &n : kb.neighbors)
        {
            neighbor_views[n.domain] = n;
        }
        candidates = kb.candidates;
        installed_flows = kb.installed_flows;
        kb_version = kb.version;
    }

    namespace
    {
        struct Known
        {
            VehicleId id;
            double x;
        };
    } // namespace

    RouteResult compute_route(const ControllerState &ctrl, const FlowRequest &req, SimTime now, double host_x_m,
                              const RouteParams &params)
    {
        FlowEntry entry;
        entry.match = req.dst;
        entry.idle_timeout_s = params.idle_timeout_s;
        entry.hard_timeout_s = params.hard_timeout_s;
        if (params.mode == Mode::dsdivn && params.piggyback_recovery_id && !ctrl.candidates.empty())
        {
            entry.recovery_id = ctrl.candidates.front();
        }

        if (req.requester == req.dst)
        {
            entry.action = FlowAction::local();
            return entry;
        }

        std::vector<Known> known;
        known.push_back({ctrl.host, host_x_m});
        std::optional<double> dst_x;
        for (const auto &[id, rec] : ctrl.local_view)
        {
            const double x = rec.position_at(now);
            if (id != ctrl.host)
            {
                known.push_back({id, x});
            }
            if (id == req.dst)
            {
                dst_x = x;
            }
        }
        if (req.dst == ctrl.host)
        {
            dst_x = host_x_m;
        }

        // toward which point greedy progress is measured
        std::optional<double> aim_x = dst_x;
        for (const auto &[key, summary] : ctrl.neighbor_views)
        {
            if (now.seconds_since(summary.received_at) > params.neighbor_stale_s)
            {
                continue;
            }
            for (const auto &rec : summary.members)
            {
                const double x = rec.position_at(now);
                known.push_back({rec.id, x});
                if (!dst_x && rec.id == req.dst)
                {
                    dst_x = x;
                    aim_x = summary.head_x_m;
                }
            }
        }
        if (!dst_x)
        {
            return FlowReject{req.dst};
        }

        const double from = req.requester_x_m;
        if (std::abs(*dst_x - from) <= params.range_m)
        {
            entry.action = FlowAction::forward_to(req.dst);
            return entry;
        }

        std::optional<Known> best;
        double best_remaining = std::abs(*aim_x - from);
        for (const auto &k : known)
        {
            if (k.id == req.requester || std::abs(k.x - from) > params.range_m)
            {
                continue;
            }
            const double remaining = std::abs(*aim_x - k.x);
            if (remaining < best_remaining || (best && remaining == best_remaining && k.id < best->id))
            {
                best = k;
                best_remaining = remaining;
            }
        }
        if (!best)
        {
            return FlowReject{req.dst};
        }
        entry.action = FlowAction::forward_to(best->id);
        return entry;
    }

    void prune_views(ControllerState &ctrl, SimTime now, double segment_len_m, double max_age_s)
    {
        auto outside = [&](const MemberRecord &rec, const DomainKey &key) {
            const double x = rec.position_at(now);
            return x < 0.0 || segment_of(x, segment_len_m) != key.segment;
        };
        for (auto it = ctrl.local_view.begin(); it != ctrl.local_view.end();)
        {
            if (it->first == ctrl.host)
            {
                ++it;
                continue;
            }
            if (now.seconds_since(it->second.seen) > max_age_s)
            {
                it = ctrl.local_view.erase(it);
            }
            else if (outside(it->second, ctrl.domain))
            {
                // crossed into an adjacent domain we hold a view of: keep it reachable there
                const double x = it->second.position_at(now);
                if (x >= 0.0)
                {
                    const DomainKey into{segment_of(x, segment_len_m), ctrl.domain.dir};
                    if (auto nv = ctrl.neighbor_views.find(into); nv != ctrl.neighbor_views.end())
                    {
                        auto &members = nv->second.members;
                        if (std::none_of(members.begin(), members.end(),
                                         [&](const MemberRecord &r) { return r.id == it->first; }))
                        {
                            members.push_back(it->second);
                        }
                    }
                }
                it = ctrl.local_view.erase(it);
            }
            else
            {
                ++it;
            }
        }
        for (auto &[key, summary] : ctrl.neighbor_views)
        {
            std::erase_if(summary.members, [&](const MemberRecord &rec) { return outside(rec, key); });
        }
    }
} // namespace dsdivn
