#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsdivn/config.hpp"
#include "dsdivn/mobility.hpp"

#include <cmath>
#include <limits>
#include <set>

using namespace dsdivn;

namespace
{
    VehicleState car(VehicleId id, double x, double v, int dir)
    {
        VehicleState s;
        s.id = id;
        s.x_m = x;
        s.v_mps = v;
        s.dir = dir;
        return s;
    }
} // namespace

TEST_CASE("segment boundaries belong to the upper segment")
{
    CHECK(segment_of(0, 150).index == 0);
    CHECK(segment_of(150, 150).index == 1);
    CHECK(segment_of(437.5, 150).index == 2);
    CHECK(segment_of(149.999, 150).index == 0);
    CHECK_THROWS(segment_of(-1, 150));
}

TEST_CASE("residual time to the segment exit")
{
    CHECK(residual_time(car(0, 100, 25, +1), 150) == doctest::Approx(2.0));
    CHECK(residual_time(car(0, 100, 25, -1), 150) == doctest::Approx(4.0));
    CHECK(residual_time(car(0, 100, 0, +1), 150) == std::numeric_limits<double>::infinity());
    CHECK(residual_time(car(0, 0, 10, -1), 150) == 0.0);
}

TEST_CASE("advance crosses into the next segment")
{
    RandomStream rng(1, "mobility");
    Mobility m(1000, 150, 10, 30, {car(0, 149, 25, +1), car(1, 50, 10, +1)}, rng);
    const auto tr = m.advance_all(0.1);
    CHECK(m.at(0).x_m == doctest::Approx(151.5));
    CHECK(m.at(1).x_m == doctest::Approx(51.0));
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].id == 0);
    CHECK(tr[0].from.index == 0);
    CHECK(tr[0].to.index == 1);
    CHECK_FALSE(tr[0].respawned);
    CHECK_THROWS(m.advance_all(0));
}

TEST_CASE("vehicles leaving the road respawn at the opposite end")
{
    RandomStream rng(1, "mobility");
    Mobility m(1000, 150, 10, 30, {car(0, 999, 25, +1), car(1, 1, 25, -1)}, rng);
    const auto tr = m.advance_all(0.1);
    CHECK(m.at(0).x_m == 0.0);
    CHECK(m.at(0).v_mps >= 10);
    CHECK(m.at(0).v_mps <= 30);
    CHECK(m.at(1).x_m < 1000.0);
    CHECK(segment_of(m.at(1).x_m, 150).index == 6);
    REQUIRE(tr.size() == 2);
    CHECK(tr[0].respawned);
    CHECK(tr[0].from.index == 6);
    CHECK(tr[0].to.index == 0);
    CHECK(tr[1].to.index == 6);
}

TEST_CASE("spawned fleet")
{
    ScenarioConfig cfg;
    RandomStream a(5, "fleet");
    RandomStream b(5, "fleet");
    const auto f1 = spawn_fleet(cfg, a);
    const auto f2 = spawn_fleet(cfg, b);
    REQUIRE(f1.size() == 200);
    std::set<VehicleId> ids;
    int east = 0;
    for (std::size_t i = 0; i < f1.size(); ++i)
    {
        ids.insert(f1[i].id);
        CHECK(f1[i].v_mps >= 10);
        CHECK(f1[i].v_mps <= 30);
        CHECK(f1[i].x_m >= 0);
        CHECK(f1[i].x_m < 1000);
        CHECK(f1[i].x_m == f2[i].x_m);
        CHECK(f1[i].v_mps == f2[i].v_mps);
        east += f1[i].dir == +1;
    }
    CHECK(ids.size() == 200);
    CHECK(east == 100);
}

TEST_CASE("reported transitions match a brute-force position replay")
{
    ScenarioConfig cfg;
    RandomStream fleet_rng(11, "fleet");
    auto fleet = spawn_fleet(cfg, fleet_rng);
    Mobility m(cfg.area_m, cfg.segment_len_m, cfg.v_min_mps, cfg.v_max_mps, fleet, RandomStream(11, "mobility"));

    std::size_t reported = 0;
    std::size_t replayed = 0;
    for (int step = 0; step < 1200; ++step)
    {
        std::vector<VehicleState> before = m.fleet();
        const auto tr = m.advance_all(0.1);
        reported += tr.size();
        std::size_t k = 0;
        for (const auto &old : before)
        {
            const auto &now = m.at(old.id);
            // independent kinematics for vehicles that stayed on the road
            const double expect = old.x_m + old.dir * old.v_mps * 0.1;
            const bool wrapped = expect < 0 || expect >= cfg.area_m;
            if (!wrapped)
            {
                REQUIRE(now.x_m == doctest::Approx(expect));
            }
            const int s0 = static_cast<int>(std::floor(old.x_m / cfg.segment_len_m));
            const int s1 = static_cast<int>(std::floor(now.x_m / cfg.segment_len_m));
            if (s0 != s1)
            {
                ++replayed;
                REQUIRE(k < tr.size());
                CHECK(tr[k].id == old.id);
                CHECK(tr[k].from.index == s0);
                CHECK(tr[k].to.index == s1);
                ++k;
            }
            REQUIRE(residual_time(now, cfg.segment_len_m) >= 0.0);
        }
        CHECK(k == tr.size());
    }
    CHECK(reported == replayed);
    CHECK(reported > 0);
}

TEST_CASE("vehicles in adjacent segments are within twice the segment length")
{
    RandomStream rng(2, "prop");
    for (int i = 0; i < 10000; ++i)
    {
        const double a = rng.uniform(0, 999.999);
        const double b = rng.uniform(0, 999.999);
        if (std::abs(segment_of(a, 150).index - segment_of(b, 150).index) == 1)
        {
            REQUIRE(std::abs(a - b) < 300.0);
        }
    }
}

TEST_CASE("mobility runs are reproducible")
{
    ScenarioConfig cfg;
    auto run = [&] {
        RandomStream fr(3, "fleet");
        Mobility m(cfg.area_m, cfg.segment_len_m, cfg.v_min_mps, cfg.v_max_mps, spawn_fleet(cfg, fr),
                   RandomStream(3, "mobility"));
        for (int i = 0; i < 500; ++i)
        {
            m.advance_all(0.1);
        }
        return m.trace_hash();
    };
    CHECK(run() == run());
}
