#pragma once

#include "dsdivn/mobility.hpp"

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsdivn
{
    /// One road segment x travel direction: the unit managed by a single controller.
    struct DomainKey
    {
        SegmentId segment;
        int dir = +1;

        auto operator<=>(const DomainKey &) const = default;
    };

    std::string to_string(const DomainKey &k);

    /// Rank 0 is the designated recovery controller.
    using CandidateList = std::vector<VehicleId>;

    DomainKey domain_of(const VehicleState &v, double segment_len_m);

    std::vector<VehicleState> members_of(const DomainKey &key, std::span<const VehicleState> fleet,
                                         double segment_len_m);

    /// Longest residual time wins; ties go to the lowest id.
    std::optional<VehicleId> elect_head(std::span<const VehicleState> members, double segment_len_m);

    /// Members other than `head`, longest residual time first, ties by lowest id.
    CandidateList rank_candidates(std::span<const VehicleState> members, std::optional<VehicleId> head,
                                  double segment_len_m);

    struct HeadChange
    {
        DomainKey domain;
        std::optional<VehicleId> old_head;
        std::optional<VehicleId> new_head;
    };

    /// Domain membership and head roles for a whole fleet.
    ///
    /// Residual-time order inside a domain is invariant between membership changes
    /// (every member's residual time drops at one second per second), so heads only
    /// need recomputing when a vehicle enters or leaves.
    class Clustering
    {
    public:
        explicit Clustering(double segment_len_m) : m_segment_len(segment_len_m) {}

        /// Rebuild everything from scratch; reports every domain's head.
        std::vector<HeadChange> rebuild(std::vector<VehicleState> &fleet);

        /// Apply one segment transition; `fleet` already holds the new position.
        std::vector<HeadChange> on_transition(std::vector<VehicleState> &fleet, VehicleId v, const DomainKey &old_key,
                                              const DomainKey &new_key);

        std::optional<VehicleId> head(const DomainKey &key) const;
        std::span<const VehicleId> members(const DomainKey &key) const;
        std::vector<DomainKey> non_empty_domains() const;

        /// Ranked backup candidates for a controller hosted on `host`.
        CandidateList candidates(const DomainKey &key, std::optional<VehicleId> host,
                                 std::span<const VehicleState> fleet) const;

        double segment_length() const { return m_segment_len; }

    private:
        std::optional<HeadChange> refresh(std::vector<VehicleState> &fleet, const DomainKey &key);

        double m_segment_len;
        std::map<DomainKey, std::vector<VehicleId>> m_members;
        std::map<DomainKey, VehicleId> m_heads;
    };
} // namespace dsdivn
