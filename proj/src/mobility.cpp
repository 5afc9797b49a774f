#include "dsdivn/mobility.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace dsdivn
{
    SegmentId segment_of(double x_m, double segment_len_m)
    {
        if (x_m < 0.0)
        {
            throw std::logic_error("segment_of: negative position");
        }
        if (!(segment_len_m > 0.0))
        {
            throw std::logic_error("segment_of: segment length must be positive");
        }
        return SegmentId{static_cast<int>(std::floor(x_m / segment_len_m))};
    }

    double residual_time(const VehicleState &v, double segment_len_m)
    {
        if (v.v_mps <= 0.0)
        {
            return kInfiniteResidual;
        }
        const auto k = segment_of(v.x_m, segment_len_m).index;
        const double remaining = v.dir > 0 ? (k + 1) * segment_len_m - v.x_m : v.x_m - k * segment_len_m;
        return remaining / v.v_mps;
    }

    std::vector<VehicleState> spawn_fleet(const ScenarioConfig &cfg, RandomStream &rng)
    {
        std::vector<VehicleState> fleet;
        fleet.reserve(static_cast<std::size_t>(cfg.n_vehicles));
        for (int i = 0; i < cfg.n_vehicles; ++i)
        {
            VehicleState v;
            v.id = static_cast<VehicleId>(i);
            v.x_m = rng.uniform01() * cfg.area_m;
            v.v_mps = rng.uniform(cfg.v_min_mps, cfg.v_max_mps);
            v.dir = (i % 2 == 0) ? +1 : -1;
            fleet.push_back(v);
        }
        return fleet;
    }

    Mobility::Mobility(double road_len_m, double segment_len_m, double v_min_mps, double v_max_mps,
                       std::vector<VehicleState> fleet, RandomStream rng)
        : m_road_len(road_len_m), m_segment_len(segment_len_m), m_v_min(v_min_mps), m_v_max(v_max_mps),
          m_fleet(std::move(fleet)), m_rng(std::move(rng))
    {
        for (std::size_t i = 0; i < m_fleet.size(); ++i)
        {
            if (m_fleet[i].id != i)
            {
                throw std::invalid_argument("Mobility: vehicle ids must be 0..n-1 in order");
            }
        }
    }

    std::vector<SegmentTransition> Mobility::advance_all(double dt)
    {
        if (!(dt > 0.0))
        {
            throw std::logic_error("advance_all: dt must be positive");
        }
        std::vector<SegmentTransition> out;
        // highest position that still lies on the road
        const double top = std::nextafter(m_road_len, 0.0);
        for (auto &v : m_fleet)
        {
            const auto before = segment_of(v.x_m, m_segment_len);
            double x = v.x_m + v.dir * v.v_mps * dt;
            bool respawned = false;
            if (x > top || x < 0.0)
            {
                x = v.dir > 0 ? 0.0 : top;
                v.v_mps = m_rng.uniform(m_v_min, m_v_max);
                respawned = true;
            }
            v.x_m = x;
            m_trace_hash = (m_trace_hash ^ std::bit_cast<std::uint64_t>(x)) * 0x100000001B3ULL;
            const auto after = segment_of(v.x_m, m_segment_len);
            if (after != before)
            {
                out.push_back(SegmentTransition{v.id, before, after, respawned});
            }
        }
        return out;
    }
} // namespace dsdivn
