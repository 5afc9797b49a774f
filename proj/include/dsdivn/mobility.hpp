#pragma once

#include "dsdivn/config.hpp"
#include "dsdivn/random.hpp"

#include <compare>
#include <cstdint>
#include <limits>
#include <vector>

namespace dsdivn
{
    using VehicleId = std::uint32_t;

    enum class Role
    {
        member,
        head,
        standby_candidate,
    };

    struct SegmentId
    {
        int index = 0;
        auto operator<=>(const SegmentId &) const = default;
    };

    struct VehicleState
    {
        VehicleId id = 0;
        double x_m = 0.0;
        double v_mps = 0.0;
        int dir = +1;
        Role role = Role::member;
    };

    inline constexpr double kInfiniteResidual = std::numeric_limits<double>::infinity();

    /// floor(x / L); half-open segments, a boundary belongs to the upper segment.
    /// Negative positions are a programming error (std::logic_error).
    SegmentId segment_of(double x_m, double segment_len_m);

    /// Time until the vehicle leaves its current segment at constant speed.
    double residual_time(const VehicleState &v, double segment_len_m);

    struct SegmentTransition
    {
        VehicleId id = 0;
        SegmentId from;
        SegmentId to;
        bool respawned = false;
    };

    /// n vehicles, uniform positions, uniform speeds, alternating directions.
    std::vector<VehicleState> spawn_fleet(const ScenarioConfig &cfg, RandomStream &rng);

    /// Constant-speed kinematics on one bidirectional road of length `road_len_m`.
    class Mobility
    {
    public:
        Mobility(double road_len_m, double segment_len_m, double v_min_mps, double v_max_mps,
                 std::vector<VehicleState> fleet, RandomStream rng);

        /// Moves every vehicle by dir*v*dt. Vehicles leaving the road respawn at the
        /// opposite end with a fresh speed. One entry per vehicle whose segment changed.
        std::vector<SegmentTransition> advance_all(double dt);

        const std::vector<VehicleState> &fleet() const { return m_fleet; }
        std::vector<VehicleState> &fleet() { return m_fleet; }
        const VehicleState &at(VehicleId id) const { return m_fleet.at(id); }
        VehicleState &at(VehicleId id) { return m_fleet.at(id); }

        double road_length() const { return m_road_len; }
        double segment_length() const { return m_segment_len; }

        /// Running hash of every position update; equal across runs that moved identically.
        std::uint64_t trace_hash() const { return m_trace_hash; }

    private:
        double m_road_len;
        double m_segment_len;
        double m_v_min;
        double m_v_max;
        std::vector<VehicleState> m_fleet;
        RandomStream m_rng;
        std::uint64_t m_trace_hash = 0xCBF29CE484222325ULL;
    };
} // namespace dsdivn
