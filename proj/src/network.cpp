#include "dsdivn/network.hpp"

#include <algorithm>
#include <cmath>

namespace dsdivn
{
    namespace
    {
        std::vector<VehicleState> spawn_for(const ScenarioConfig &cfg)
        {
            cfg.validate();
            RandomStream rng(cfg.seed, "fleet");
            return spawn_fleet(cfg, rng);
        }
    } // namespace

    Network::Network(const ScenarioConfig &cfg, NetworkOptions opts) : Network(cfg, spawn_for(cfg), opts) {}

    Network::Network(const ScenarioConfig &cfg, std::vector<VehicleState> fleet, NetworkOptions opts)
        : m_cfg(cfg), m_opts(opts), m_traffic_rng(cfg.seed, "traffic"), m_control_rng(cfg.seed, "control"),
          m_mobility(cfg.area_m, cfg.segment_len_m, cfg.v_min_mps, cfg.v_max_mps, std::move(fleet),
                     RandomStream(cfg.seed, "mobility")),
          m_clustering(cfg.segment_len_m), m_radio(m_sched, *this, cfg.link, cfg.tx_range_m, RandomStream(cfg.seed, "link")),
          m_pdr(cfg.timers.pdr_window_s, cfg.sim_duration_s)
    {
        m_route.range_m = cfg.tx_range_m;
        m_route.neighbor_stale_s = 3 * cfg.timers.view_period_s;
        m_route.mode = cfg.mode;
        m_route.idle_timeout_s = cfg.timers.idle_timeout_s;
        m_route.hard_timeout_s = cfg.timers.hard_timeout_s;
        m_route.piggyback_recovery_id = cfg.timers.piggyback_recovery_id;
        m_radio.enable_trace(opts.trace);
        m_radio.on_receive([this](VehicleId at, const Frame &f) { on_frame(at, f); });
        m_radio.on_drop([this](const Frame &f, DropCause c) { on_drop(f, c); });
        if (cfg.failure)
        {
            m_observed = DomainKey{SegmentId{cfg.failure->target_segment}, cfg.failure->target_dir};
        }
        init();
    }

    void Network::init()
    {
        const auto n = m_mobility.fleet().size();
        m_controllers.resize(n);
        AgentState blank;
        blank.table = FlowTable(static_cast<std::size_t>(m_cfg.timers.buffer_per_key));
        m_agents.assign(n, blank);
        for (VehicleId v = 0; v < n; ++v)
        {
            m_controllers[v].host = v;
            m_agents[v].domain = domain_now(v);
            m_agents[v].join_report_due = true;
        }

        const auto changes = m_clustering.rebuild(m_mobility.fleet());
        for (VehicleId v = 0; v < n; ++v)
        {
            arm_detection(v);
        }
        for (const auto &c : changes)
        {
            if (c.new_head)
            {
                activate_fresh(*c.new_head, c.domain);
            }
        }

        const auto &t = m_cfg.timers;
        if (m_opts.move_vehicles)
        {
            m_sched.schedule_in(t.mobility_step_s, [this] { mobility_tick(); });
        }
        m_sched.schedule_in(t.maintenance_period_s, [this] { maintenance_tick(); });
        if (m_opts.auto_traffic)
        {
            for (VehicleId v = 0; v < n; ++v)
            {
                const double phase = m_traffic_rng.uniform01() / m_cfg.pkt_rate_hz;
                m_sched.schedule_in(phase, [this, v] { traffic_tick(v); });
            }
        }
        for (VehicleId v = 0; v < n; ++v)
        {
            const double phase = m_control_rng.uniform01() * t.monitor_period_s;
            m_sched.schedule_in(phase, [this, v] { monitor_tick(v); });
        }

        if (m_cfg.failure && m_cfg.failure->duration_s > 0)
        {
            const auto spec = *m_cfg.failure;
            m_sched.schedule(SimTime::from_seconds(spec.start_s), [this, spec] {
                const DomainKey target{SegmentId{spec.target_segment}, spec.target_dir};
                auto actives = active_controllers(target);
                std::optional<VehicleId> victim;
                if (!actives.empty())
                {
                    victim = actives.front();
                }
                else
                {
                    victim = m_clustering.head(target);
                }
                if (!victim)
                {
                    throw ConfigError("failure target domain " + to_string(target) + " is empty at start_s");
                }
                fail_controller(*victim, spec.duration_s);
            });
        }
    }

    DomainKey Network::domain_now(VehicleId v) const
    {
        return domain_of(m_mobility.at(v), m_cfg.segment_len_m);
    }

    std::optional<Position> Network::position_of(VehicleId id) const
    {
        if (id >= m_mobility.fleet().size())
        {
            return std::nullopt;
        }
        return Position{m_mobility.at(id).x_m, 0.0};
    }

    std::vector<NodePosition> Network::snapshot() const
    {
        std::vector<NodePosition> out;
        out.reserve(m_mobility.fleet().size());
        for (const auto &v : m_mobility.fleet())
        {
            out.push_back({v.id, Position{v.x_m, 0.0}});
        }
        return out;
    }

    std::vector<VehicleId> Network::active_controllers(const DomainKey &d) const
    {
        std::vector<VehicleId> out;
        if (auto it = m_active.find(d); it != m_active.end())
        {
            out.assign(it->second.begin(), it->second.end());
        }
        return out;
    }

    std::uint64_t Network::counter(const std::string &name) const
    {
        auto it = m_counters.find(name);
        return it == m_counters.end() ? 0 : it->second;
    }

    std::size_t Network::stale_recovery_ids(const DomainKey &d) const
    {
        const auto actives = active_controllers(d);
        if (actives.empty())
        {
            return 0;
        }
        const auto &c = m_controllers[actives.front()];
        std::optional<VehicleId> rank0;
        if (!c.candidates.empty())
        {
            rank0 = c.candidates.front();
        }
        std::size_t stale = 0;
        for (auto m : m_clustering.members(d))
        {
            if (m != c.host && m_agents[m].recovery_id != rank0)
            {
                ++stale;
            }
        }
        return stale;
    }

    void Network::run_until(double t_s)
    {
        m_sched.run_until(SimTime::from_seconds(t_s));
    }

    RunReport Network::run()
    {
        run_until(m_cfg.sim_duration_s);
        for (auto &[d, since] : m_multi_active_since)
        {
            if (m_sched.now().seconds_since(since) > m_cfg.timers.detect_timeout_s)
            {
                ++m_inv.multi_active;
            }
        }
        m_multi_active_since.clear();
        return report();
    }

    RunReport Network::report() const
    {
        RunReport r;
        r.config = m_cfg;
        r.pdr = m_pdr.series();
        r.installs = m_installs;
        r.counters = m_counters;
        for (const auto &[type, n] : m_radio.sent_by_type())
        {
            r.counters["msg." + type] = n;
        }
        r.takeovers = m_takeovers;
        r.invariants = m_inv;
        r.invariants.channel_mixing = m_radio.isolation_violations();
        if (m_cfg.mode != Mode::dsdivn)
        {
            r.invariants.mode_gated_messages = m_radio.sent_count("KbSync") + m_radio.sent_count("CandidateAdvert");
        }
        r.mobility_hash = m_mobility.trace_hash();
        r.traffic_hash = m_traffic_hash;
        r.sent = m_sent;
        r.received = m_received;
        r.dropped = m_dropped;
        r.in_flight = m_sent - m_received - m_dropped;
        r.counters["packets.sent"] = m_sent;
        r.counters["packets.received"] = m_received;
        r.counters["packets.dropped"] = m_dropped;
        r.counters["packets.in_flight"] = r.in_flight;
        return r;
    }

    // ---------------------------------------------------------------- periodic drivers

    void Network::mobility_tick()
    {
        const auto transitions = m_mobility.advance_all(m_cfg.timers.mobility_step_s);
        // settle clustering for the whole step before any controller reacts
        std::map<DomainKey, bool> touched;
        for (const auto &tr : transitions)
        {
            const int dir = m_mobility.at(tr.id).dir;
            const DomainKey from{tr.from, dir};
            const DomainKey to{tr.to, dir};
            touched.try_emplace(from, false);
            touched.try_emplace(to, false);
            for (const auto &c : m_clustering.on_transition(m_mobility.fleet(), tr.id, from, to))
            {
                touched[c.domain] = true;
            }
            bump("segment_transitions");
            agent_domain_changed(tr.id, to);
        }
        for (const auto &[d, head_changed] : touched)
        {
            reconcile(d, head_changed);
        }
        m_sched.schedule_in(m_cfg.timers.mobility_step_s, [this] { mobility_tick(); });
    }

    void Network::maintenance_tick()
    {
        const auto now = m_sched.now();
        for (auto &[d, ids] : m_active)
        {
            for (auto v : ids)
            {
                prune_views(m_controllers[v], now, m_cfg.segment_len_m, 3 * m_cfg.timers.monitor_period_s);
            }
        }
        for (const auto &d : m_clustering.non_empty_domains())
        {
            for (auto v : active_controllers(d))
            {
                refresh_candidates(v);
            }
        }

        const auto &fleet = m_mobility.fleet();
        for (const auto &d : m_clustering.non_empty_domains())
        {
            ++m_inv.checks;
            const auto head = m_clustering.head(d);
            const auto oracle = elect_head(members_of(d, fleet, m_cfg.segment_len_m), m_cfg.segment_len_m);
            if (head != oracle)
            {
                ++m_inv.head_not_argmax;
            }
            const DomainKey next{SegmentId{d.segment.index + 1}, d.dir};
            const auto next_head = m_clustering.head(next);
            if (head && next_head)
            {
                if (!in_range(*position_of(*head), *position_of(*next_head), m_cfg.tx_range_m))
                {
                    ++m_inv.adjacent_heads_unreachable;
                }
            }
        }
        m_sched.schedule_in(m_cfg.timers.maintenance_period_s, [this] { maintenance_tick(); });
    }

    void Network::traffic_tick(VehicleId v)
    {
        auto &a = m_agents[v];
        const auto flow_len =
            std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(m_cfg.timers.flow_duration_s * m_cfg.pkt_rate_hz)));
        if (a.packets_generated % flow_len == 0)
        {
            const double u = m_traffic_rng.uniform01();
            const auto &me = m_mobility.at(v);
            const int seg = segment_of(me.x_m, m_cfg.segment_len_m).index;
            std::vector<VehicleId> peers;
            for (const auto &o : m_mobility.fleet())
            {
                if (o.id != v && o.dir == me.dir && std::abs(segment_of(o.x_m, m_cfg.segment_len_m).index - seg) <= 1)
                {
                    peers.push_back(o.id);
                }
            }
            a.flow_dst.reset();
            if (!peers.empty())
            {
                a.flow_dst = peers[std::min(peers.size() - 1, static_cast<std::size_t>(u * peers.size()))];
            }
        }
        ++a.packets_generated;
        if (a.flow_dst)
        {
            send_data(v, *a.flow_dst);
        }
        const auto next = m_sched.now().after(1.0 / m_cfg.pkt_rate_hz);
        if (next.seconds() < m_cfg.sim_duration_s)
        {
            m_sched.schedule(next, [this, v] { traffic_tick(v); });
        }
    }

    void Network::monitor_tick(VehicleId v)
    {
        const auto &a = m_agents[v];
        if (a.controller)
        {
            const auto &me = m_mobility.at(v);
            send_control(v, *a.controller,
                         MonitorReport{MemberRecord{v, me.x_m, me.v_mps, me.dir, m_sched.now()}, a.domain});
        }
        m_sched.schedule_in(m_cfg.timers.monitor_period_s, [this, v] { monitor_tick(v); });
    }

    // ---------------------------------------------------------------- controller lifecycle

    void Network::reconcile(const DomainKey &d, bool head_changed)
    {
        const auto head = m_clustering.head(d);
        const auto actives = active_controllers(d);
        if (!actives.empty())
        {
            for (auto a : actives)
            {
                const bool host_left = domain_now(a) != d;
                if (host_left || (head_changed && head && *head != a))
                {
                    std::optional<VehicleId> target = head;
                    if (target && m_controllers[a].suspects.contains(*target))
                    {
                        const auto ranked = candidates_for(a);
                        target = ranked.empty() ? std::nullopt : std::optional<VehicleId>(ranked.front());
                    }
                    if (target && *target == a)
                    {
                        refresh_candidates(a);
                    }
                    else if (target)
                    {
                        migrate_controller(a, *target);
                    }
                    else
                    {
                        // last member gone: the domain dissolves with its state
                        set_status(a, ControllerStatus::standby);
                        m_controllers[a].local_view.clear();
                        bump("domains_dissolved");
                    }
                }
                else
                {
                    refresh_candidates(a);
                }
            }
            return;
        }
        const bool failed_owner = std::any_of(m_controllers.begin(), m_controllers.end(), [&](const ControllerState &c) {
            return c.status == ControllerStatus::failed && c.domain == d && c.status_before_failure == ControllerStatus::active;
        });
        if (failed_owner)
        {
            return;
        }
        if (head_changed && head)
        {
            activate_fresh(*head, d);
        }
    }

    void Network::set_status(VehicleId v, ControllerStatus s)
    {
        auto &c = m_controllers[v];
        for (auto it = m_active.begin(); it != m_active.end();)
        {
            if (it->second.erase(v) > 0)
            {
                const auto d = it->first;
                if (it->second.empty())
                {
                    it = m_active.erase(it);
                }
                check_multi_active(d);
                break;
            }
            ++it;
        }
        c.status = s;
        ++c.epoch;
        if (s == ControllerStatus::active)
        {
            m_active[c.domain].insert(v);
            check_multi_active(c.domain);
        }
    }

    void Network::check_multi_active(const DomainKey &d)
    {
        std::size_t n = 0;
        if (auto it = m_active.find(d); it != m_active.end())
        {
            n = it->second.size();
        }
        auto since = m_multi_active_since.find(d);
        if (n > 1 && since == m_multi_active_since.end())
        {
            m_multi_active_since[d] = m_sched.now();
        }
        else if (n <= 1 && since != m_multi_active_since.end())
        {
            if (m_sched.now().seconds_since(since->second) > m_cfg.timers.detect_timeout_s)
            {
                ++m_inv.multi_active;
            }
            m_multi_active_since.erase(since);
        }
    }

    void Network::activate_fresh(VehicleId v, const DomainKey &d)
    {
        auto &c = m_controllers[v];
        if (c.status == ControllerStatus::failed)
        {
            return;
        }
        const auto &a = m_agents[v];
        c.domain = d;
        c.local_view.clear();
        c.neighbor_views.clear();
        c.term = (a.domain == d ? a.controller_term : 0) + 1;
        c.suspects.clear();
        set_status(v, ControllerStatus::active);
        bump("activations");
        start_controller(v);
    }

    void Network::activate_recovery(VehicleId v)
    {
        auto &c = m_controllers[v];
        if (c.status != ControllerStatus::standby)
        {
            return;
        }
        const auto d = domain_now(v);
        const auto &a = m_agents[v];
        TakeoverEvent ev;
        ev.domain = d;
        c.domain = d;
        adopt_suspects(v);
        ev.controller = v;
        ev.activated_at_s = m_sched.now().seconds();
        if (c.replica && c.replica->domain == d)
        {
            c.seed_from(*c.replica);
            c.term = std::max(c.replica->term, a.controller_term) + 1;
            ev.from_replica = true;
        }
        else
        {
            c.domain = d;
            c.local_view.clear();
            c.neighbor_views.clear();
            c.term = a.controller_term + 1;
            bump("recoveries_without_replica");
        }
        set_status(v, ControllerStatus::active);
        bump("recoveries");
        m_takeovers.push_back(ev);
        start_controller(v);
    }

    void Network::start_controller(VehicleId v)
    {
        auto &c = m_controllers[v];
        const auto &me = m_mobility.at(v);
        c.local_view[v] = MemberRecord{v, me.x_m, me.v_mps, me.dir, m_sched.now()};
        c.candidates = candidates_for(v);
        const auto epoch = c.epoch;
        m_sched.schedule_in(0.0, [this, v, epoch] { heartbeat_loop(v, epoch); });
        if (m_cfg.mode == Mode::dsdivn)
        {
            if (m_cfg.timers.advert_enabled)
            {
                m_sched.schedule_in(0.0, [this, v, epoch] { advert_loop(v, epoch); });
            }
            m_sched.schedule_in(0.0, [this, v, epoch] { sync_loop(v, epoch); });
        }
        m_sched.schedule_in(0.0, [this, v, epoch] { view_loop(v, epoch); });
    }

    void Network::demote(VehicleId v)
    {
        set_status(v, ControllerStatus::standby);
        bump("demotions");
    }

    void Network::migrate_controller(VehicleId from, VehicleId to)
    {
        auto &c = m_controllers[from];
        Handover msg{c.snapshot(++c.kb_version), from};
        set_status(from, ControllerStatus::standby);
        bump("handovers");
        const auto seq = ++m_handover_seq;
        m_handovers[from] = PendingHandover{to, msg, 0, seq};
        send_control(from, to, msg);
        m_sched.schedule_in(m_cfg.timers.retry_period_s, [this, from, to, seq] { handover_retry(from, to, seq); });
    }

    void Network::handover_retry(VehicleId from, VehicleId to, std::uint64_t seq)
    {
        auto it = m_handovers.find(from);
        if (it == m_handovers.end() || it->second.seq != seq)
        {
            return;
        }
        if (it->second.retries >= m_cfg.timers.max_retries || m_controllers[from].status == ControllerStatus::failed)
        {
            bump("handovers_abandoned");
            m_handovers.erase(it);
            return;
        }
        ++it->second.retries;
        send_control(from, to, it->second.msg);
        m_sched.schedule_in(m_cfg.timers.retry_period_s, [this, from, to, seq] { handover_retry(from, to, seq); });
    }

    CandidateList Network::candidates_for(VehicleId v) const
    {
        const auto &c = m_controllers[v];
        auto ranked = m_clustering.candidates(c.domain, v, m_mobility.fleet());
        std::erase_if(ranked, [&](VehicleId id) { return c.suspects.contains(id); });
        return ranked;
    }

    void Network::adopt_suspects(VehicleId v)
    {
        auto &c = m_controllers[v];
        const auto &a = m_agents[v];
        c.suspects.clear();
        for (auto id : {a.lost_controller, a.controller})
        {
            if (id && *id != v && m_controllers[*id].domain == c.domain)
            {
                c.suspects.insert(*id);
            }
        }
    }

    void Network::refresh_candidates(VehicleId v)
    {
        auto &c = m_controllers[v];
        if (!c.active())
        {
            return;
        }
        const auto old_rank0 = c.candidates.empty() ? std::nullopt : std::optional<VehicleId>(c.candidates.front());
        c.candidates = candidates_for(v);
        const auto new_rank0 = c.candidates.empty() ? std::nullopt : std::optional<VehicleId>(c.candidates.front());
        if (m_cfg.mode == Mode::dsdivn && old_rank0 != new_rank0)
        {
            bump("candidate_changes");
            // new recovery controller gets a full snapshot right away
            send_kb(v);
            if (m_cfg.timers.advert_enabled)
            {
                send_advert(v);
            }
        }
    }

    void Network::heartbeat_loop(VehicleId v, std::uint64_t epoch)
    {
        const auto &c = m_controllers[v];
        if (c.epoch != epoch || !c.active())
        {
            return;
        }
        const Heartbeat hb{v, c.term, c.domain};
        broadcast_domain(v, c.domain, hb);
        agent_heartbeat(v, hb);
        m_sched.schedule_in(m_cfg.timers.hb_period_s, [this, v, epoch] { heartbeat_loop(v, epoch); });
    }

    void Network::advert_loop(VehicleId v, std::uint64_t epoch)
    {
        const auto &c = m_controllers[v];
        if (c.epoch != epoch || !c.active())
        {
            return;
        }
        send_advert(v);
        m_sched.schedule_in(m_cfg.timers.advert_period_s, [this, v, epoch] { advert_loop(v, epoch); });
    }

    void Network::sync_loop(VehicleId v, std::uint64_t epoch)
    {
        const auto &c = m_controllers[v];
        if (c.epoch != epoch || !c.active())
        {
            return;
        }
        send_kb(v);
        m_sched.schedule_in(m_cfg.timers.sync_period_s, [this, v, epoch] { sync_loop(v, epoch); });
    }

    void Network::send_advert(VehicleId v)
    {
        const auto &c = m_controllers[v];
        CandidateAdvert adv{c.domain, c.candidates.empty() ? std::nullopt : std::optional<VehicleId>(c.candidates.front())};
        broadcast_domain(v, c.domain, adv);
        handle_control(v, v, adv);
    }

    void Network::send_kb(VehicleId v)
    {
        auto &c = m_controllers[v];
        if (c.candidates.empty())
        {
            bump("replication_suspended");
            return;
        }
        send_control(v, c.candidates.front(), KbSync{c.snapshot(++c.kb_version)});
    }

    ViewSummary Network::summary_of(const ControllerState &c) const
    {
        ViewSummary s;
        s.domain = c.domain;
        s.head = c.host;
        s.head_x_m = x_of(c.host);
        for (const auto &[id, rec] : c.local_view)
        {
            s.members.push_back(rec);
        }
        return s;
    }

    void Network::view_loop(VehicleId v, std::uint64_t epoch)
    {
        const auto &c = m_controllers[v];
        if (c.epoch != epoch || !c.active())
        {
            return;
        }
        for (int delta : {-1, +1})
        {
            const DomainKey adj{SegmentId{c.domain.segment.index + delta}, c.domain.dir};
            if (adj.segment.index < 0 || adj.segment.index >= m_cfg.segment_count())
            {
                continue;
            }
            const auto peers = active_controllers(adj);
            if (peers.empty())
            {
                bump("view_exchange_skipped");
                continue;
            }
            send_control(v, peers.front(), ViewExchange{summary_of(c)});
        }
        m_sched.schedule_in(m_cfg.timers.view_period_s, [this, v, epoch] { view_loop(v, epoch); });
    }

    void Network::fail_controller(VehicleId host, double duration_s)
    {
        if (duration_s <= 0)
        {
            return;
        }
        auto &c = m_controllers[host];
        if (c.status == ControllerStatus::failed)
        {
            return;
        }
        c.status_before_failure = c.status;
        set_status(host, ControllerStatus::failed);
        bump("failures_injected");
        m_sched.schedule_in(duration_s, [this, host] { resume_controller(host); });
    }

    void Network::resume_controller(VehicleId v)
    {
        auto &c = m_controllers[v];
        if (c.status != ControllerStatus::failed)
        {
            return;
        }
        bump("failures_resumed");
        if (c.status_before_failure != ControllerStatus::active)
        {
            set_status(v, ControllerStatus::standby);
            return;
        }
        set_status(v, ControllerStatus::active);
        const auto head = m_clustering.head(c.domain);
        if (domain_now(v) != c.domain || head != v)
        {
            if (head)
            {
                migrate_controller(v, *head);
            }
            else
            {
                set_status(v, ControllerStatus::standby);
            }
            return;
        }
        start_controller(v);
    }
} // namespace dsdivn
