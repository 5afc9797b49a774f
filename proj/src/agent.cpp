#include "dsdivn/network.hpp"

#include <algorithm>
#include <cmath>

namespace dsdivn
{
    // ---------------------------------------------------------------- messaging

    void Network::send_control(VehicleId from, VehicleId to, ControlMessage msg)
    {
        if (from == to)
        {
            m_sched.schedule_in(m_cfg.link.per_hop_proc_s,
                                [this, from, to, msg = std::move(msg)] { handle_control(to, from, msg); });
            return;
        }
        const auto size = message_size_B(msg);
        m_radio.transmit(Frame{from, to, size, Channel::control, Payload{std::move(msg)}});
    }

    void Network::broadcast_domain(VehicleId from, const DomainKey &d, const ControlMessage &msg)
    {
        const auto members = m_clustering.members(d);
        std::vector<VehicleId> receivers;
        receivers.reserve(members.size());
        for (auto m : members)
        {
            if (m != from)
            {
                receivers.push_back(m);
            }
        }
        m_radio.broadcast(from, receivers, msg);
    }

    void Network::on_frame(VehicleId at, const Frame &f)
    {
        if (const auto *pkt = std::get_if<DataPacket>(&f.payload))
        {
            handle_packet(at, *pkt);
            return;
        }
        handle_control(at, f.src, std::get<ControlMessage>(f.payload));
    }

    void Network::on_drop(const Frame &f, DropCause c)
    {
        if (const auto *pkt = std::get_if<DataPacket>(&f.payload))
        {
            if (c == DropCause::out_of_range)
            {
                // next hop moved away: forget the rule so the next packet asks again
                m_agents[f.src].table.erase(pkt->final_dst);
            }
            drop_packet(*pkt, std::string(to_string(c)));
            return;
        }
        bump("control_lost." + std::string(payload_type(f.payload)));
    }

    void Network::handle_control(VehicleId at, VehicleId from, const ControlMessage &msg)
    {
        auto &c = m_controllers[at];
        auto &a = m_agents[at];
        std::visit(
            [&](const auto &m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, FlowRequest>)
                {
                    ctrl_flow_request(at, m);
                }
                else if constexpr (std::is_same_v<T, FlowInstall>)
                {
                    agent_install(at, from, m);
                }
                else if constexpr (std::is_same_v<T, FlowReject>)
                {
                    agent_reject(at, m);
                }
                else if constexpr (std::is_same_v<T, Heartbeat>)
                {
                    if (auto it = m_handovers.find(at); it != m_handovers.end() && it->second.to == m.controller)
                    {
                        m_handovers.erase(it);
                    }
                    if (c.suspects.erase(m.controller) > 0)
                    {
                        refresh_candidates(at);
                    }
                    ctrl_heartbeat(at, m);
                    agent_heartbeat(at, m);
                }
                else if constexpr (std::is_same_v<T, CandidateAdvert>)
                {
                    if (a.domain == m.domain)
                    {
                        a.recovery_id = m.recovery_id;
                        a.table.set_recovery_id(m.recovery_id, m_sched.now());
                    }
                }
                else if constexpr (std::is_same_v<T, KbSync>)
                {
                    if (c.status == ControllerStatus::failed || domain_now(at) != m.kb.domain)
                    {
                        return;
                    }
                    const auto &r = c.replica;
                    if (!r || r->domain != m.kb.domain || m.kb.term > r->term ||
                        (m.kb.term == r->term && m.kb.version > r->version))
                    {
                        c.replica = m.kb;
                    }
                }
                else if constexpr (std::is_same_v<T, ViewExchange>)
                {
                    if (c.active() && m.view.domain != c.domain)
                    {
                        auto v = m.view;
                        v.received_at = m_sched.now();
                        c.neighbor_views[v.domain] = std::move(v);
                    }
                }
                else if constexpr (std::is_same_v<T, MonitorReport>)
                {
                    if (c.active() && m.domain == c.domain)
                    {
                        c.local_view[m.record.id] = m.record;
                    }
                }
                else if constexpr (std::is_same_v<T, Handover>)
                {
                    if (c.status == ControllerStatus::failed)
                    {
                        return;
                    }
                    if (c.active())
                    {
                        if (c.domain == m.kb.domain)
                        {
                            send_control(at, from, Heartbeat{at, c.term, c.domain});
                        }
                        return;
                    }
                    if (domain_now(at) != m.kb.domain)
                    {
                        bump("handovers_misdirected");
                        return;
                    }
                    c.seed_from(m.kb);
                    c.suspects.clear();
                    c.term = std::max(m.kb.term, a.domain == m.kb.domain ? a.controller_term : 0) + 1;
                    set_status(at, ControllerStatus::active);
                    bump("handovers_completed");
                    start_controller(at);
                    send_control(at, from, Heartbeat{at, c.term, c.domain});
                }
                else if constexpr (std::is_same_v<T, ElectionCall>)
                {
                    if (a.domain == m.domain && (!a.election_term || *a.election_term < m.term))
                    {
                        join_election(at, m.term);
                    }
                }
                else if constexpr (std::is_same_v<T, ElectionBid>)
                {
                    if (a.domain == m.domain && a.election_term == m.term)
                    {
                        a.bids[m.bidder] = m.residual_s;
                    }
                }
            },
            msg);
    }

    // ---------------------------------------------------------------- controller side

    void Network::ctrl_flow_request(VehicleId at, const FlowRequest &req)
    {
        auto &c = m_controllers[at];
        if (c.status == ControllerStatus::failed)
        {
            return;
        }
        if (!c.active())
        {
            if (m_cfg.mode == Mode::dsdivn && req.redirected && domain_now(at) == req.domain)
            {
                activate_recovery(at);
            }
            if (!c.active())
            {
                bump("requests_ignored");
                return;
            }
        }
        const auto now = m_sched.now();
        prune_views(c, now, m_cfg.segment_len_m, 3 * m_cfg.timers.monitor_period_s);
        const auto result = compute_route(c, req, now, x_of(at), m_route);
        if (const auto *entry = std::get_if<FlowEntry>(&result))
        {
            ++c.installed_flows;
            bump("flow_installs");
            send_control(at, req.requester, FlowInstall{*entry, c.term});
        }
        else
        {
            bool known = c.local_view.contains(req.dst);
            for (const auto &[d, view] : c.neighbor_views)
            {
                known = known || std::any_of(view.members.begin(), view.members.end(),
                                             [&](const MemberRecord &r) { return r.id == req.dst; });
            }
            bump(known ? "flow_rejects.no_path" : "flow_rejects.unknown_dst");
            send_control(at, req.requester, std::get<FlowReject>(result));
        }
    }

    void Network::ctrl_heartbeat(VehicleId at, const Heartbeat &hb)
    {
        const auto &c = m_controllers[at];
        if (!c.active() || c.domain != hb.domain || hb.controller == at)
        {
            return;
        }
        if (hb.term > c.term || (hb.term == c.term && hb.controller < at))
        {
            demote(at);
        }
    }

    // ---------------------------------------------------------------- member side

    void Network::agent_domain_changed(VehicleId v, const DomainKey &d)
    {
        auto &a = m_agents[v];
        a.domain = d;
        a.controller.reset();
        a.controller_term = 0;
        a.recovery_id.reset();
        a.lost_controller.reset();
        a.table.set_recovery_id(std::nullopt, m_sched.now());
        a.last_heartbeat = m_sched.now();
        a.presumed_failed = false;
        a.redirect_mode = false;
        a.join_report_due = true;
        a.election_term.reset();
        a.election_decided = false;
        a.bids.clear();
    }

    void Network::agent_heartbeat(VehicleId v, const Heartbeat &hb)
    {
        auto &a = m_agents[v];
        if (hb.domain != a.domain)
        {
            return;
        }
        const auto now = m_sched.now();
        if (a.controller == hb.controller)
        {
            a.controller_term = std::max(a.controller_term, hb.term);
            a.last_heartbeat = now;
            a.presumed_failed = false;
            a.redirect_mode = false;
            return;
        }
        const bool adopt = !a.controller || a.presumed_failed || hb.term > a.controller_term ||
                           (hb.term == a.controller_term && hb.controller < *a.controller);
        if (!adopt)
        {
            return;
        }
        a.controller = hb.controller;
        a.controller_term = hb.term;
        a.last_heartbeat = now;
        a.presumed_failed = false;
        a.redirect_mode = false;
        if (a.join_report_due)
        {
            a.join_report_due = false;
            const auto &me = m_mobility.at(v);
            send_control(v, hb.controller, MonitorReport{MemberRecord{v, me.x_m, me.v_mps, me.dir, now}, a.domain});
        }
        std::vector<VehicleId> dsts;
        for (auto &[dst, p] : a.pending)
        {
            p.retries = 0;
            p.redirected = false;
            p.target.reset();
            dsts.push_back(dst);
        }
        for (auto dst : dsts)
        {
            send_request(v, dst);
        }
    }

    void Network::agent_install(VehicleId v, VehicleId from, const FlowInstall &msg)
    {
        auto &a = m_agents[v];
        const auto now = m_sched.now();
        a.table.install(msg.entry, now);
        if (m_cfg.mode == Mode::dsdivn && m_cfg.timers.piggyback_recovery_id && msg.entry.recovery_id &&
            a.controller == from)
        {
            a.recovery_id = msg.entry.recovery_id;
        }
        const auto dst = msg.entry.match;
        if (auto it = a.pending.find(dst); it != a.pending.end())
        {
            m_installs.push_back(InstallSample{it->second.dist_m.value_or(0.0), sizes::kFlowRequest,
                                               now.seconds_since(it->second.started), a.domain});
            a.pending.erase(it);
        }
        for (auto it = m_takeovers.rbegin(); it != m_takeovers.rend(); ++it)
        {
            if (it->controller == from)
            {
                if (!it->first_install_s)
                {
                    it->first_install_s = now.seconds();
                }
                break;
            }
        }
        for (auto &pkt : a.table.take_buffered(dst))
        {
            handle_packet(v, pkt);
        }
    }

    void Network::agent_reject(VehicleId v, const FlowReject &msg)
    {
        auto &a = m_agents[v];
        if (a.pending.erase(msg.dst) > 0 || a.table.buffered(msg.dst) > 0)
        {
            drop_buffered(v, msg.dst, "rejected");
        }
    }

    void Network::send_data(VehicleId src, VehicleId dst)
    {
        DataPacket pkt;
        pkt.id = m_next_packet++;
        pkt.origin = src;
        pkt.final_dst = dst;
        pkt.created = m_sched.now();
        pkt.in_scope = !m_observed || domain_now(src) == *m_observed;
        ++m_sent;
        if (pkt.in_scope)
        {
            m_pdr.on_send(pkt.created);
        }
        for (std::uint64_t word : {pkt.id, std::uint64_t{src}, std::uint64_t{dst},
                                   static_cast<std::uint64_t>(pkt.created.ticks())})
        {
            m_traffic_hash = (m_traffic_hash ^ word) * 0x100000001B3ULL;
        }
        handle_packet(src, pkt);
    }

    void Network::handle_packet(VehicleId at, DataPacket pkt)
    {
        if (pkt.final_dst == at)
        {
            deliver(pkt);
            return;
        }
        if (pkt.hops >= kHopBudget)
        {
            drop_packet(pkt, "hop_budget");
            return;
        }
        auto &a = m_agents[at];
        const auto now = m_sched.now();
        if (const auto *entry = a.table.lookup(pkt.final_dst, now))
        {
            if (now.seconds_since(entry->installed_at) >= entry->hard_timeout_s)
            {
                ++m_inv.expired_forwarding;
            }
            if (entry->action.kind != FlowAction::Kind::next_hop)
            {
                drop_packet(pkt, "local_mismatch");
                return;
            }
            ++pkt.hops;
            m_radio.transmit_one_hop(Frame{at, entry->action.next_hop, sizes::kDataPacket, Channel::data, Payload{pkt}});
            return;
        }
        if (auto evicted = a.table.buffer(pkt.final_dst, pkt))
        {
            drop_packet(*evicted, "buffer_overflow");
        }
        if (a.pending.contains(pkt.final_dst))
        {
            bump("requests_coalesced");
            return;
        }
        a.pending[pkt.final_dst].started = now;
        send_request(at, pkt.final_dst);
    }

    void Network::send_request(VehicleId v, VehicleId dst)
    {
        auto &a = m_agents[v];
        auto &p = a.pending.at(dst);
        const auto gen = ++p.generation;
        const auto target = p.target ? p.target : a.controller;
        if (target)
        {
            if (!p.dist_m)
            {
                p.dist_m = std::abs(x_of(v) - x_of(*target));
            }
            FlowRequest req;
            req.requester = v;
            req.dst = dst;
            req.size_B = sizes::kFlowRequest;
            req.requester_x_m = x_of(v);
            req.domain = a.domain;
            req.redirected = p.redirected || a.redirect_mode;
            bump("flow_requests");
            send_control(v, *target, req);
        }
        m_sched.schedule_in(m_cfg.timers.retry_period_s, [this, v, dst, gen] { request_retry(v, dst, gen); });
    }

    void Network::request_retry(VehicleId v, VehicleId dst, std::uint64_t generation)
    {
        auto &a = m_agents[v];
        auto it = a.pending.find(dst);
        if (it == a.pending.end() || it->second.generation != generation)
        {
            return;
        }
        auto &p = it->second;
        if (p.retries < m_cfg.timers.max_retries)
        {
            ++p.retries;
            bump("request_retries");
            send_request(v, dst);
            return;
        }
        const auto current = p.target ? p.target : a.controller;
        if (m_cfg.mode == Mode::dsdivn && a.recovery_id && !p.redirected && a.recovery_id != current)
        {
            p.redirected = true;
            p.target = a.recovery_id;
            p.retries = 0;
            bump("request_redirects");
            send_request(v, dst);
            return;
        }
        a.pending.erase(it);
        drop_buffered(v, dst, "request_timeout");
    }

    void Network::drop_buffered(VehicleId v, VehicleId dst, const std::string &cause)
    {
        for (const auto &pkt : m_agents[v].table.take_buffered(dst))
        {
            drop_packet(pkt, cause);
        }
    }

    void Network::deliver(const DataPacket &pkt)
    {
        ++m_received;
        if (pkt.in_scope)
        {
            m_pdr.on_delivered(pkt.created);
        }
    }

    void Network::drop_packet(const DataPacket &, const std::string &cause)
    {
        ++m_dropped;
        bump("drop." + cause);
    }

    // ---------------------------------------------------------------- failure detection

    void Network::arm_detection(VehicleId v)
    {
        auto &a = m_agents[v];
        if (a.detect_armed)
        {
            return;
        }
        a.detect_armed = true;
        auto at = a.last_heartbeat.after(m_cfg.timers.detect_timeout_s);
        if (at < m_sched.now())
        {
            at = m_sched.now();
        }
        m_sched.schedule(at, [this, v] { detection_check(v); });
    }

    void Network::detection_check(VehicleId v)
    {
        auto &a = m_agents[v];
        a.detect_armed = false;
        const auto now = m_sched.now();
        if (now.seconds_since(a.last_heartbeat) >= m_cfg.timers.detect_timeout_s - 1e-9)
        {
            a.last_heartbeat = now;
            on_failure_detected(v);
        }
        arm_detection(v);
    }

    void Network::on_failure_detected(VehicleId v)
    {
        auto &a = m_agents[v];
        a.presumed_failed = true;
        if (a.controller && *a.controller != v)
        {
            a.lost_controller = a.controller;
        }
        bump("failure_detections");
        switch (m_cfg.mode)
        {
        case Mode::dsdivn: {
            if (!a.recovery_id || a.recovery_id == a.controller)
            {
                return;
            }
            const auto r = *a.recovery_id;
            a.controller = r;
            a.redirect_mode = true;
            bump("redirects");
            if (r == v)
            {
                activate_recovery(v);
            }
            std::vector<VehicleId> dsts;
            for (auto &[dst, p] : a.pending)
            {
                p.retries = 0;
                p.target.reset();
                dsts.push_back(dst);
            }
            for (auto dst : dsts)
            {
                send_request(v, dst);
            }
            return;
        }
        case Mode::self_organized:
            start_election(v);
            return;
        case Mode::no_fallback:
            return;
        }
    }

    // ---------------------------------------------------------------- self-organized election

    void Network::start_election(VehicleId v)
    {
        auto &a = m_agents[v];
        const auto term = a.controller_term + 1;
        if (a.election_term && *a.election_term >= term)
        {
            return;
        }
        bump("election_calls");
        join_election(v, term);
        broadcast_domain(v, a.domain, ElectionCall{a.domain, term});
    }

    void Network::join_election(VehicleId v, std::uint64_t term)
    {
        auto &a = m_agents[v];
        a.election_term = term;
        a.election_decided = false;
        a.bids.clear();
        if (m_controllers[v].status != ControllerStatus::failed)
        {
            const auto &me = m_mobility.at(v);
            const double bid = residual_time(me, m_cfg.segment_len_m);
            a.bids[v] = bid;
            broadcast_domain(v, a.domain, ElectionBid{a.domain, term, v, bid});
        }
        m_sched.schedule_in(m_cfg.timers.election_window_s, [this, v, term] { decide_election(v, term); });
    }

    void Network::decide_election(VehicleId v, std::uint64_t term)
    {
        auto &a = m_agents[v];
        if (a.election_term != term || a.election_decided)
        {
            return;
        }
        a.election_decided = true;
        std::optional<VehicleId> winner;
        double best = -1;
        for (const auto &[id, bid] : a.bids)
        {
            // map order gives the lowest id on ties
            if (!winner || bid > best)
            {
                winner = id;
                best = bid;
            }
        }
        auto &c = m_controllers[v];
        if (winner != v || c.status != ControllerStatus::standby)
        {
            return;
        }
        c.domain = a.domain;
        adopt_suspects(v);
        c.local_view.clear();
        c.neighbor_views.clear();
        c.replica.reset();
        c.term = std::max(term, a.controller_term + 1);
        set_status(v, ControllerStatus::active);
        bump("elections_won");
        m_takeovers.push_back(TakeoverEvent{a.domain, v, m_sched.now().seconds(), false, true, std::nullopt});
        start_controller(v);
    }
} // namespace dsdivn
