#pragma once

#include "dsdivn/mobility.hpp"
#include "dsdivn/sim_time.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

namespace dsdivn
{
    struct FlowAction
    {
        enum class Kind
        {
            next_hop,
            deliver_local,
        };
        Kind kind = Kind::next_hop;
        VehicleId next_hop = 0;

        static FlowAction forward_to(VehicleId id) { return {Kind::next_hop, id}; }
        static FlowAction local() { return {Kind::deliver_local, 0}; }
        bool operator==(const FlowAction &) const = default;
    };

    struct FlowEntry
    {
        VehicleId match = 0;
        FlowAction action;
        // designated recovery controller; only set in dsdivn mode
        std::optional<VehicleId> recovery_id;
        SimTime installed_at;
        double idle_timeout_s = 5.0;
        double hard_timeout_s = 30.0;
        SimTime last_used;

        bool live(SimTime now) const
        {
            return now.seconds_since(installed_at) < hard_timeout_s && now.seconds_since(last_used) < idle_timeout_s;
        }
    };

    struct DataPacket
    {
        std::uint64_t id = 0;
        VehicleId origin = 0;
        VehicleId final_dst = 0;
        SimTime created;
        int hops = 0;
        // counted in the PDR series (the observed domain at send time)
        bool in_scope = true;
    };

    /// Destination-keyed flow table with a bounded per-key buffer for table misses.
    class FlowTable
    {
    public:
        explicit FlowTable(std::size_t buffer_per_key = 32) : m_buffer_limit(buffer_per_key) {}

        /// Live entry for `dst`, refreshing its idle timer; expired entries are removed.
        const FlowEntry *lookup(VehicleId dst, SimTime now);

        /// Live entry without touching timers.
        const FlowEntry *peek(VehicleId dst, SimTime now) const;

        /// Replaces any entry with the same match key.
        void install(FlowEntry entry, SimTime now);

        void erase(VehicleId dst) { m_entries.erase(dst); }

        /// Buffer a packet awaiting a rule. Returns the evicted (oldest) packet on overflow.
        std::optional<DataPacket> buffer(VehicleId dst, DataPacket pkt);

        std::vector<DataPacket> take_buffered(VehicleId dst);
        std::size_t buffered(VehicleId dst) const;

        /// Rewrite the recovery identifier on every live entry.
        void set_recovery_id(std::optional<VehicleId> id, SimTime now);

        std::size_t live_count(SimTime now) const;
        void clear_all() { m_entries.clear(); }

    private:
        std::size_t m_buffer_limit;
        std::map<VehicleId, FlowEntry> m_entries;
        std::map<VehicleId, std::deque<DataPacket>> m_buffers;
    };
} // namespace dsdivn
