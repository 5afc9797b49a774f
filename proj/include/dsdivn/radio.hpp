#pragma once

#include "dsdivn/config.hpp"
#include "dsdivn/messages.hpp"
#include "dsdivn/random.hpp"
#include "dsdivn/scheduler.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dsdivn
{
    struct Position
    {
        double x = 0.0;
        double y = 0.0;
    };

    double distance(Position a, Position b);

    /// Inclusive range test on Euclidean distance.
    bool in_range(Position a, Position b, double range_m);

    /// hops = max(1, ceil(d / R)); per hop: serialization + propagation share + processing.
    double link_delay(double dist_m, std::uint32_t size_B, const LinkModelParams &p, double range_m);

    struct NodePosition
    {
        VehicleId id = 0;
        Position pos;
    };

    /// Neighbor of `src` within range that is closest to `dst` and strictly closer than
    /// `src`; ties go to the lowest id.
    std::optional<VehicleId> next_hop_greedy(VehicleId src, VehicleId dst, std::span<const NodePosition> nodes,
                                             double range_m);

    enum class Channel
    {
        control,
        data,
    };

    std::string_view to_string(Channel c);

    using Payload = std::variant<ControlMessage, DataPacket>;

    struct Frame
    {
        VehicleId src = 0;
        VehicleId dst = 0;
        std::uint32_t size_B = 1;
        Channel channel = Channel::control;
        Payload payload;
        int hop_budget = 8;
    };

    std::string_view payload_type(const Payload &p);

    enum class DropCause
    {
        radio_loss,
        no_forwarder,
        hop_budget,
        unknown_dst,
        out_of_range,
    };

    std::string_view to_string(DropCause c);

    /// Where vehicles are right now.
    class NodeDirectory
    {
    public:
        virtual ~NodeDirectory() = default;
        virtual std::optional<Position> position_of(VehicleId id) const = 0;
        virtual std::vector<NodePosition> snapshot() const = 0;
    };

    struct TraceLine
    {
        SimTime time;
        std::string type;
        VehicleId src = 0;
        std::optional<VehicleId> dst; // empty for broadcast
        std::uint32_t size_B = 0;
        Channel channel = Channel::control;
    };

    /// Range-gated V2V channel with deterministic delays and Bernoulli per-hop loss.
    /// Control and data frames are carried on separate logical channels.
    class Radio
    {
    public:
        using Receiver = std::function<void(VehicleId at, const Frame &)>;
        using DropSink = std::function<void(const Frame &, DropCause)>;

        Radio(Scheduler &sched, const NodeDirectory &nodes, LinkModelParams params, double range_m,
              RandomStream link_rng);

        void on_receive(Receiver r) { m_receiver = std::move(r); }
        void on_drop(DropSink d) { m_drop = std::move(d); }

        /// Deliver to frame.dst, relaying greedily when it is out of direct range.
        void transmit(Frame frame);

        /// Deliver only if frame.dst is within direct range.
        void transmit_one_hop(Frame frame);

        /// One frame heard by every listed receiver in range, with independent loss draws.
        void broadcast(VehicleId src, std::span<const VehicleId> receivers, const ControlMessage &msg);

        const LinkModelParams &params() const { return m_params; }
        double range() const { return m_range; }

        const std::map<std::string, std::uint64_t> &sent_by_type() const { return m_sent_by_type; }
        std::uint64_t sent_count(std::string_view type) const;
        std::uint64_t isolation_violations() const { return m_isolation_violations; }
        std::uint64_t hops_delivered() const { return m_hops_delivered; }

        void enable_trace(bool on) { m_trace_on = on; }
        const std::vector<TraceLine> &trace() const { return m_trace; }

    private:
        void record_send(const Frame &f, bool broadcast);
        void hop(VehicleId holder, Frame frame);
        void drop(const Frame &f, DropCause c);

        Scheduler &m_sched;
        const NodeDirectory &m_nodes;
        LinkModelParams m_params;
        double m_range;
        RandomStream m_rng;
        Receiver m_receiver;
        DropSink m_drop;

        std::map<std::string, std::uint64_t> m_sent_by_type;
        std::uint64_t m_isolation_violations = 0;
        std::uint64_t m_hops_delivered = 0;
        bool m_trace_on = false;
        std::vector<TraceLine> m_trace;
    };
} // namespace dsdivn
