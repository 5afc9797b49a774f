#include "dsdivn/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsdivn
{
    double distance(Position a, Position b)
    {
        return std::hypot(a.x - b.x, a.y - b.y);
    }

    bool in_range(Position a, Position b, double range_m)
    {
        return distance(a, b) <= range_m;
    }

    double link_delay(double dist_m, std::uint32_t size_B, const LinkModelParams &p, double range_m)
    {
        if (size_B == 0 || dist_m < 0 || range_m <= 0)
        {
            throw std::invalid_argument("link_delay: size must be positive, distance non-negative");
        }
        const double hops = std::max(1.0, std::ceil(dist_m / range_m));
        const double serialization = size_B * 8.0 / p.bitrate_bps;
        const double propagation = dist_m / (hops * p.prop_speed_mps);
        return hops * (serialization + propagation + p.per_hop_proc_s);
    }

    std::optional<VehicleId> next_hop_greedy(VehicleId src, VehicleId dst, std::span<const NodePosition> nodes,
                                             double range_m)
    {
        std::optional<Position> src_pos;
        std::optional<Position> dst_pos;
        for (const auto &n : nodes)
        {
            if (n.id == src)
            {
                src_pos = n.pos;
            }
            if (n.id == dst)
            {
                dst_pos = n.pos;
            }
        }
        if (!src_pos || !dst_pos || src == dst)
        {
            return std::nullopt;
        }
        const double own = distance(*src_pos, *dst_pos);
        std::optional<VehicleId> best;
        double best_remaining = own;
        for (const auto &n : nodes)
        {
            if (n.id == src || !in_range(*src_pos, n.pos, range_m))
            {
                continue;
            }
            const double remaining = distance(n.pos, *dst_pos);
            if (remaining < best_remaining || (best && remaining == best_remaining && n.id < *best))
            {
                best = n.id;
                best_remaining = remaining;
            }
        }
        return best;
    }

    std::string_view to_string(Channel c)
    {
        return c == Channel::control ? "control" : "data";
    }

    std::string_view payload_type(const Payload &p)
    {
        if (const auto *m = std::get_if<ControlMessage>(&p))
        {
            return message_type(*m);
        }
        return "Data";
    }

    std::string_view to_string(DropCause c)
    {
        switch (c)
        {
        case DropCause::radio_loss:
            return "radio_loss";
        case DropCause::no_forwarder:
            return "no_forwarder";
        case DropCause::hop_budget:
            return "hop_budget";
        case DropCause::unknown_dst:
            return "unknown_dst";
        case DropCause::out_of_range:
            return "out_of_range";
        }
        return "?";
    }

    Radio::Radio(Scheduler &sched, const NodeDirectory &nodes, LinkModelParams params, double range_m,
                 RandomStream link_rng)
        : m_sched(sched), m_nodes(nodes), m_params(params), m_range(range_m), m_rng(std::move(link_rng))
    {
    }

    std::uint64_t Radio::sent_count(std::string_view type) const
    {
        auto it = m_sent_by_type.find(std::string(type));
        return it == m_sent_by_type.end() ? 0 : it->second;
    }

    void Radio::record_send(const Frame &f, bool broadcast)
    {
        const bool is_control = std::holds_alternative<ControlMessage>(f.payload);
        if (is_control != (f.channel == Channel::control))
        {
            ++m_isolation_violations;
        }
        const auto type = std::string(payload_type(f.payload));
        ++m_sent_by_type[type];
        if (m_trace_on)
        {
            m_trace.push_back(TraceLine{m_sched.now(), type, f.src,
                                        broadcast ? std::nullopt : std::optional<VehicleId>(f.dst), f.size_B,
                                        f.channel});
        }
    }

    void Radio::drop(const Frame &f, DropCause c)
    {
        if (m_drop)
        {
            m_drop(f, c);
        }
    }

    void Radio::transmit(Frame frame)
    {
        record_send(frame, false);
        hop(frame.src, std::move(frame));
    }

    void Radio::hop(VehicleId holder, Frame frame)
    {
        const auto here = m_nodes.position_of(holder);
        const auto there = m_nodes.position_of(frame.dst);
        if (!here || !there)
        {
            drop(frame, DropCause::unknown_dst);
            return;
        }
        VehicleId next = frame.dst;
        if (!in_range(*here, *there, m_range))
        {
            if (frame.hop_budget <= 0)
            {
                drop(frame, DropCause::hop_budget);
                return;
            }
            const auto snap = m_nodes.snapshot();
            const auto relay = next_hop_greedy(holder, frame.dst, snap, m_range);
            if (!relay)
            {
                drop(frame, DropCause::no_forwarder);
                return;
            }
            next = *relay;
            --frame.hop_budget;
        }
        const auto next_pos = m_nodes.position_of(next);
        const double delay = link_delay(distance(*here, *next_pos), frame.size_B, m_params, m_range);
        if (m_rng.bernoulli(m_params.loss_prob))
        {
            drop(frame, DropCause::radio_loss);
            return;
        }
        m_sched.schedule_in(delay, [this, next, frame = std::move(frame)]() mutable {
            ++m_hops_delivered;
            if (next == frame.dst)
            {
                if (m_receiver)
                {
                    m_receiver(next, frame);
                }
                return;
            }
            hop(next, std::move(frame));
        });
    }

    void Radio::transmit_one_hop(Frame frame)
    {
        record_send(frame, false);
        const auto here = m_nodes.position_of(frame.src);
        const auto there = m_nodes.position_of(frame.dst);
        if (!here || !there)
        {
            drop(frame, DropCause::unknown_dst);
            return;
        }
        if (!in_range(*here, *there, m_range))
        {
            drop(frame, DropCause::out_of_range);
            return;
        }
        frame.hop_budget = 0;
        hop(frame.src, std::move(frame));
    }

    void Radio::broadcast(VehicleId src, std::span<const VehicleId> receivers, const ControlMessage &msg)
    {
        Frame proto{src, src, message_size_B(msg), Channel::control, msg, 0};
        record_send(proto, true);
        const auto here = m_nodes.position_of(src);
        if (!here)
        {
            return;
        }
        for (auto r : receivers)
        {
            if (r == src)
            {
                continue;
            }
            const auto there = m_nodes.position_of(r);
            if (!there || !in_range(*here, *there, m_range))
            {
                continue;
            }
            if (m_rng.bernoulli(m_params.loss_prob))
            {
                continue;
            }
            const double delay = link_delay(distance(*here, *there), proto.size_B, m_params, m_range);
            Frame f = proto;
            f.dst = r;
            m_sched.schedule_in(delay, [this, r, f = std::move(f)]() {
                ++m_hops_delivered;
                if (m_receiver)
                {
                    m_receiver(r, f);
                }
            });
        }
    }
} // namespace dsdivn
