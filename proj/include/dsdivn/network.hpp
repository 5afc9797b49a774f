#pragma once

#include "dsdivn/clustering.hpp"
#include "dsdivn/config.hpp"
#include "dsdivn/controller.hpp"
#include "dsdivn/flow_table.hpp"
#include "dsdivn/metrics.hpp"
#include "dsdivn/mobility.hpp"
#include "dsdivn/radio.hpp"
#include "dsdivn/random.hpp"
#include "dsdivn/scheduler.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace dsdivn
{
    struct NetworkOptions
    {
        bool auto_traffic = true;
        bool move_vehicles = true;
        bool trace = false;
    };

    /// Member-side SDN agent of one vehicle: flow table, pending requests, controller
    /// tracking and failure detection.
    struct AgentState
    {
        struct PendingRequest
        {
            SimTime started;
            int retries = 0;
            bool redirected = false;
            std::optional<VehicleId> target;
            std::optional<double> dist_m;
            std::uint64_t generation = 0;
        };

        FlowTable table;
        DomainKey domain;
        std::optional<VehicleId> controller;
        std::uint64_t controller_term = 0;
        SimTime last_heartbeat;
        bool detect_armed = false;
        bool presumed_failed = false;
        // dsdivn: requests go to the recovery controller after a detected failure
        bool redirect_mode = false;
        bool join_report_due = false;
        std::optional<VehicleId> recovery_id;
        // controller this member last declared failed
        std::optional<VehicleId> lost_controller;
        std::map<VehicleId, PendingRequest> pending;

        std::optional<std::uint64_t> election_term;
        bool election_decided = false;
        std::map<VehicleId, double> bids;

        std::optional<VehicleId> flow_dst;
        std::uint64_t packets_generated = 0;
    };

    /// One simulated run: fleet, clustering, radio, controllers and member agents
    /// driven by a shared deterministic event queue.
    class Network final : public NodeDirectory
    {
    public:
        explicit Network(const ScenarioConfig &cfg, NetworkOptions opts = {});

        /// Hand-built fleet (ids 0..n-1). With move_vehicles=false speeds may be zero.
        Network(const ScenarioConfig &cfg, std::vector<VehicleState> fleet, NetworkOptions opts);

        Network(const Network &) = delete;
        Network &operator=(const Network &) = delete;

        /// Run to the configured duration and return the finalized report.
        RunReport run();
        void run_until(double t_s);
        RunReport report() const;

        // NodeDirectory
        std::optional<Position> position_of(VehicleId id) const override;
        std::vector<NodePosition> snapshot() const override;

        /// Application send from `src` at the current clock.
        void send_data(VehicleId src, VehicleId dst);

        /// Injected failure of `host`'s controller for `duration_s` starting now.
        void fail_controller(VehicleId host, double duration_s);

        Scheduler &scheduler() { return m_sched; }
        const Scheduler &scheduler() const { return m_sched; }
        const Clustering &clustering() const { return m_clustering; }
        const Mobility &mobility() const { return m_mobility; }
        const Radio &radio() const { return m_radio; }
        const ScenarioConfig &config() const { return m_cfg; }
        const ControllerState &controller(VehicleId v) const { return m_controllers.at(v); }
        const AgentState &agent(VehicleId v) const { return m_agents.at(v); }
        std::vector<VehicleId> active_controllers(const DomainKey &d) const;
        std::uint64_t counter(const std::string &name) const;
        const std::vector<TakeoverEvent> &takeovers() const { return m_takeovers; }
        const std::vector<InstallSample> &installs() const { return m_installs; }
        const InvariantTally &invariants() const { return m_inv; }

        /// Members of `d` whose stored recovery id differs from the active controller's rank-0.
        std::size_t stale_recovery_ids(const DomainKey &d) const;

    private:
        static constexpr int kHopBudget = 8;

        void init();
        void bump(const std::string &name, std::uint64_t by = 1) { m_counters[name] += by; }
        double x_of(VehicleId v) const { return m_mobility.at(v).x_m; }
        DomainKey domain_now(VehicleId v) const;

        // periodic drivers
        void mobility_tick();
        void maintenance_tick();
        void traffic_tick(VehicleId v);
        void monitor_tick(VehicleId v);

        // clustering / control-plane glue
        void reconcile(const DomainKey &d, bool head_changed);
        void set_status(VehicleId v, ControllerStatus s);
        void activate_fresh(VehicleId v, const DomainKey &d);
        void activate_recovery(VehicleId v);
        void start_controller(VehicleId v);
        void demote(VehicleId v);
        void migrate_controller(VehicleId from, VehicleId to);
        void handover_retry(VehicleId from, VehicleId to, std::uint64_t seq);
        void refresh_candidates(VehicleId v);
        CandidateList candidates_for(VehicleId v) const;
        void adopt_suspects(VehicleId v);
        void heartbeat_loop(VehicleId v, std::uint64_t epoch);
        void advert_loop(VehicleId v, std::uint64_t epoch);
        void sync_loop(VehicleId v, std::uint64_t epoch);
        void view_loop(VehicleId v, std::uint64_t epoch);
        void send_advert(VehicleId v);
        void send_kb(VehicleId v);
        void resume_controller(VehicleId v);
        void check_multi_active(const DomainKey &d);
        ViewSummary summary_of(const ControllerState &c) const;

        // messaging
        void send_control(VehicleId from, VehicleId to, ControlMessage msg);
        void broadcast_domain(VehicleId from, const DomainKey &d, const ControlMessage &msg);
        void on_frame(VehicleId at, const Frame &f);
        void on_drop(const Frame &f, DropCause c);
        void handle_control(VehicleId at, VehicleId from, const ControlMessage &msg);

        // controller side
        void ctrl_flow_request(VehicleId at, const FlowRequest &req);
        void ctrl_heartbeat(VehicleId at, const Heartbeat &hb);

        // member side
        void agent_domain_changed(VehicleId v, const DomainKey &d);
        void agent_heartbeat(VehicleId v, const Heartbeat &hb);
        void agent_install(VehicleId v, VehicleId from, const FlowInstall &msg);
        void agent_reject(VehicleId v, const FlowReject &msg);
        void handle_packet(VehicleId at, DataPacket pkt);
        void send_request(VehicleId v, VehicleId dst);
        void request_retry(VehicleId v, VehicleId dst, std::uint64_t generation);
        void drop_buffered(VehicleId v, VehicleId dst, const std::string &cause);
        void arm_detection(VehicleId v);
        void detection_check(VehicleId v);
        void on_failure_detected(VehicleId v);
        void deliver(const DataPacket &pkt);
        void drop_packet(const DataPacket &pkt, const std::string &cause);

        // self-organized election
        void start_election(VehicleId v);
        void join_election(VehicleId v, std::uint64_t term);
        void decide_election(VehicleId v, std::uint64_t term);

        ScenarioConfig m_cfg;
        NetworkOptions m_opts;
        Scheduler m_sched;
        RandomStream m_traffic_rng;
        RandomStream m_control_rng;
        Mobility m_mobility;
        Clustering m_clustering;
        Radio m_radio;
        std::vector<ControllerState> m_controllers;
        std::vector<AgentState> m_agents;
        std::map<DomainKey, std::set<VehicleId>> m_active;
        std::map<DomainKey, SimTime> m_multi_active_since;

        struct PendingHandover
        {
            VehicleId to = 0;
            Handover msg;
            int retries = 0;
            std::uint64_t seq = 0;
        };
        std::map<VehicleId, PendingHandover> m_handovers;
        std::uint64_t m_handover_seq = 0;

        std::optional<DomainKey> m_observed;
        PdrRecorder m_pdr;
        std::uint64_t m_next_packet = 0;
        std::uint64_t m_sent = 0;
        std::uint64_t m_received = 0;
        std::uint64_t m_dropped = 0;
        std::uint64_t m_traffic_hash = 0xCBF29CE484222325ULL;
        std::map<std::string, std::uint64_t> m_counters;
        std::vector<InstallSample> m_installs;
        std::vector<TakeoverEvent> m_takeovers;
        InvariantTally m_inv;
        RouteParams m_route;
    };
} // namespace dsdivn
