#include "dsdivn/flow_table.hpp"

namespace dsdivn
{
    const FlowEntry *FlowTable::lookup(VehicleId dst, SimTime now)
    {
        auto it = m_entries.find(dst);
        if (it == m_entries.end())
        {
            return nullptr;
        }
        if (!it->second.live(now))
        {
            m_entries.erase(it);
            return nullptr;
        }
        it->second.last_used = now;
        return &it->second;
    }

    const FlowEntry *FlowTable::peek(VehicleId dst, SimTime now) const
    {
        auto it = m_entries.find(dst);
        if (it == m_entries.end() || !it->second.live(now))
        {
            return nullptr;
        }
        return &it->second;
    }

    void FlowTable::install(FlowEntry entry, SimTime now)
    {
        entry.installed_at = now;
        entry.last_used = now;
        m_entries.insert_or_assign(entry.match, entry);
    }

    std::optional<DataPacket> FlowTable::buffer(VehicleId dst, DataPacket pkt)
    {
        auto &q = m_buffers[dst];
        q.push_back(pkt);
        if (q.size() > m_buffer_limit)
        {
            DataPacket evicted = q.front();
            q.pop_front();
            return evicted;
        }
        return std::nullopt;
    }

    std::vector<DataPacket> FlowTable::take_buffered(VehicleId dst)
    {
        std::vector<DataPacket> out;
        if (auto it = m_buffers.find(dst); it != m_buffers.end())
        {
            out.assign(it->second.begin(), it->second.end());
            m_buffers.erase(it);
        }
        return out;
    }

    std::size_t FlowTable::buffered(VehicleId dst) const
    {
        auto it = m_buffers.find(dst);
        return it == m_buffers.end() ? 0 : it->second.size();
    }

    void FlowTable::set_recovery_id(std::optional<VehicleId> id, SimTime now)
    {
        for (auto &[key, entry] : m_entries)
        {
            if (entry.live(now))
            {
                entry.recovery_id = id;
            }
        }
    }

    std::size_t FlowTable::live_count(SimTime now) const
    {
        std::size_t n = 0;
        for (const auto &[key, entry] : m_entries)
        {
            n += entry.live(now) ? 1 : 0;
        }
        return n;
    }
} // namespace dsdivn
