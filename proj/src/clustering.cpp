#include "dsdivn/clustering.hpp"

#include <algorithm>

namespace dsdivn
{
    std::string to_string(const DomainKey &k)
    {
        return std::to_string(k.segment.index) + (k.dir > 0 ? "+" : "-");
    }

    DomainKey domain_of(const VehicleState &v, double segment_len_m)
    {
        return DomainKey{segment_of(v.x_m, segment_len_m), v.dir};
    }

    std::vector<VehicleState> members_of(const DomainKey &key, std::span<const VehicleState> fleet,
                                         double segment_len_m)
    {
        std::vector<VehicleState> out;
        for (const auto &v : fleet)
        {
            if (domain_of(v, segment_len_m) == key)
            {
                out.push_back(v);
            }
        }
        return out;
    }

    namespace
    {
        struct Ranked
        {
            double residual;
            VehicleId id;
        };

        bool better(const Ranked &a, const Ranked &b)
        {
            if (a.residual != b.residual)
            {
                return a.residual > b.residual;
            }
            return a.id < b.id;
        }
    } // namespace

    std::optional<VehicleId> elect_head(std::span<const VehicleState> members, double segment_len_m)
    {
        std::optional<Ranked> best;
        for (const auto &m : members)
        {
            Ranked r{residual_time(m, segment_len_m), m.id};
            if (!best || better(r, *best))
            {
                best = r;
            }
        }
        if (!best)
        {
            return std::nullopt;
        }
        return best->id;
    }

    CandidateList rank_candidates(std::span<const VehicleState> members, std::optional<VehicleId> head,
                                  double segment_len_m)
    {
        std::vector<Ranked> ranked;
        ranked.reserve(members.size());
        for (const auto &m : members)
        {
            if (head && m.id == *head)
            {
                continue;
            }
            ranked.push_back({residual_time(m, segment_len_m), m.id});
        }
        std::sort(ranked.begin(), ranked.end(), better);
        CandidateList out;
        out.reserve(ranked.size());
        for (const auto &r : ranked)
        {
            out.push_back(r.id);
        }
        return out;
    }

    std::optional<HeadChange> Clustering::refresh(std::vector<VehicleState> &fleet, const DomainKey &key)
    {
        std::optional<VehicleId> old_head;
        if (auto it = m_heads.find(key); it != m_heads.end())
        {
            old_head = it->second;
        }

        std::optional<VehicleId> new_head;
        auto mit = m_members.find(key);
        if (mit != m_members.end() && !mit->second.empty())
        {
            std::vector<VehicleState> members;
            members.reserve(mit->second.size());
            for (auto id : mit->second)
            {
                members.push_back(fleet[id]);
            }
            new_head = elect_head(members, m_segment_len);
            const auto ranked = rank_candidates(members, new_head, m_segment_len);
            for (auto id : mit->second)
            {
                fleet[id].role = Role::member;
            }
            fleet[*new_head].role = Role::head;
            if (!ranked.empty())
            {
                fleet[ranked.front()].role = Role::standby_candidate;
            }
        }
        else if (mit != m_members.end())
        {
            m_members.erase(mit);
        }

        if (new_head)
        {
            m_heads[key] = *new_head;
        }
        else
        {
            m_heads.erase(key);
        }
        if (old_head != new_head)
        {
            return HeadChange{key, old_head, new_head};
        }
        return std::nullopt;
    }

    std::vector<HeadChange> Clustering::rebuild(std::vector<VehicleState> &fleet)
    {
        m_members.clear();
        m_heads.clear();
        for (const auto &v : fleet)
        {
            m_members[domain_of(v, m_segment_len)].push_back(v.id);
        }
        std::vector<HeadChange> changes;
        std::vector<DomainKey> keys;
        for (auto &[key, ids] : m_members)
        {
            std::sort(ids.begin(), ids.end());
            keys.push_back(key);
        }
        for (const auto &key : keys)
        {
            if (auto c = refresh(fleet, key))
            {
                changes.push_back(*c);
            }
        }
        return changes;
    }

    std::vector<HeadChange> Clustering::on_transition(std::vector<VehicleState> &fleet, VehicleId v,
                                                      const DomainKey &old_key, const DomainKey &new_key)
    {
        std::vector<HeadChange> changes;
        if (old_key == new_key)
        {
            return changes;
        }
        if (auto it = m_members.find(old_key); it != m_members.end())
        {
            auto &ids = it->second;
            ids.erase(std::remove(ids.begin(), ids.end(), v), ids.end());
        }
        auto &dest = m_members[new_key];
        dest.insert(std::upper_bound(dest.begin(), dest.end(), v), v);

        if (auto c = refresh(fleet, old_key))
        {
            changes.push_back(*c);
        }
        if (auto c = refresh(fleet, new_key))
        {
            changes.push_back(*c);
        }
        return changes;
    }

    std::optional<VehicleId> Clustering::head(const DomainKey &key) const
    {
        if (auto it = m_heads.find(key); it != m_heads.end())
        {
            return it->second;
        }
        return std::nullopt;
    }

    std::span<const VehicleId> Clustering::members(const DomainKey &key) const
    {
        if (auto it = m_members.find(key); it != m_members.end())
        {
            return it->second;
        }
        return {};
    }

    std::vector<DomainKey> Clustering::non_empty_domains() const
    {
        std::vector<DomainKey> out;
        for (const auto &[key, ids] : m_members)
        {
            if (!ids.empty())
            {
                out.push_back(key);
            }
        }
        return out;
    }

    CandidateList Clustering::candidates(const DomainKey &key, std::optional<VehicleId> host,
                                         std::span<const VehicleState> fleet) const
    {
        std::vector<VehicleState> states;
        for (auto id : members(key))
        {
            states.push_back(fleet[id]);
        }
        return rank_candidates(states, host, m_segment_len);
    }
} // namespace dsdivn
