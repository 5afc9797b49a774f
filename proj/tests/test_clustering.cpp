#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsdivn/clustering.hpp"
#include "dsdivn/config.hpp"
#include "dsdivn/mobility.hpp"

#include <algorithm>
#include <cmath>

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

    // residual (150 - x) / 10 inside segment 0, eastbound
    VehicleState with_residual(VehicleId id, double residual) { return car(id, 150 - 10 * residual, 10, +1); }

    // brute-force reference: full sort by (residual desc, id asc)
    std::vector<VehicleId> reference_order(const std::vector<VehicleState> &members, double L)
    {
        std::vector<VehicleState> v = members;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            for (std::size_t j = i + 1; j < v.size(); ++j)
            {
                const double ri = residual_time(v[i], L);
                const double rj = residual_time(v[j], L);
                if (rj > ri || (rj == ri && v[j].id < v[i].id))
                {
                    std::swap(v[i], v[j]);
                }
            }
        }
        std::vector<VehicleId> ids;
        for (const auto &m : v)
        {
            ids.push_back(m.id);
        }
        return ids;
    }
} // namespace

TEST_CASE("members are split by segment and direction")
{
    const std::vector<VehicleState> fleet{car(0, 310, 10, +1), car(1, 320, 10, +1), car(2, 440, 10, +1),
                                          car(3, 400, 10, -1), car(4, 10, 10, +1)};
    CHECK(members_of({SegmentId{2}, +1}, fleet, 150).size() == 3);
    CHECK(members_of({SegmentId{2}, -1}, fleet, 150).size() == 1);
    CHECK(members_of({SegmentId{5}, +1}, fleet, 150).empty());
}

TEST_CASE("domains partition the fleet")
{
    ScenarioConfig cfg;
    RandomStream rng(9, "fleet");
    const auto fleet = spawn_fleet(cfg, rng);
    std::size_t total = 0;
    std::vector<int> seen(fleet.size(), 0);
    for (int seg = 0; seg < cfg.segment_count(); ++seg)
    {
        for (int dir : {+1, -1})
        {
            for (const auto &m : members_of({SegmentId{seg}, dir}, fleet, cfg.segment_len_m))
            {
                ++seen[m.id];
                ++total;
            }
        }
    }
    CHECK(total == fleet.size());
    CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));
}

TEST_CASE("head election picks the longest residual time")
{
    const auto A = with_residual(0, 2.0);
    const auto B = with_residual(1, 4.5);
    const auto C = with_residual(2, 3.1);
    CHECK(elect_head(std::vector{A, B, C}, 150) == VehicleId{1});
    CHECK(elect_head(std::vector{with_residual(1, 4.5), with_residual(2, 4.5)}, 150) == VehicleId{1});
    CHECK(elect_head(std::vector{C}, 150) == VehicleId{2});
    CHECK_FALSE(elect_head(std::vector<VehicleState>{}, 150).has_value());
}

TEST_CASE("candidate ranking")
{
    const auto A = with_residual(0, 2.0);
    const auto B = with_residual(1, 4.5);
    const auto C = with_residual(2, 3.1);
    CHECK(rank_candidates(std::vector{A, B, C}, VehicleId{1}, 150) == CandidateList{2, 0});
    CHECK(rank_candidates(std::vector{A, B}, VehicleId{1}, 150) == CandidateList{0});
    CHECK(rank_candidates(std::vector{B}, VehicleId{1}, 150).empty());
}

TEST_CASE("election and ranking agree with a brute-force sort")
{
    RandomStream rng(21, "oracle");
    for (int trial = 0; trial < 500; ++trial)
    {
        std::vector<VehicleState> members;
        const auto n = 1 + rng.index(30);
        for (std::size_t i = 0; i < n; ++i)
        {
            // coarse grid forces residual ties
            members.push_back(car(static_cast<VehicleId>(rng.index(1000)) * 1000 + static_cast<VehicleId>(i),
                                  150.0 * 3 + std::floor(rng.uniform(0, 15)) * 10, std::floor(rng.uniform(1, 4)) * 10,
                                  rng.bernoulli(0.5) ? +1 : -1));
        }
        const auto order = reference_order(members, 150);
        REQUIRE(elect_head(members, 150) == order.front());
        const CandidateList rest(order.begin() + 1, order.end());
        REQUIRE(rank_candidates(members, order.front(), 150) == rest);
    }
}

TEST_CASE("member crossing keeps both heads")
{
    std::vector<VehicleState> fleet{car(0, 10, 10, +1), car(1, 140, 30, +1), car(2, 160, 10, +1),
                                    car(3, 200, 10, +1)};
    Clustering cl(150);
    cl.rebuild(fleet);
    const DomainKey s0{SegmentId{0}, +1};
    const DomainKey s1{SegmentId{1}, +1};
    CHECK(cl.head(s0) == VehicleId{0});
    CHECK(cl.head(s1) == VehicleId{2});
    fleet[1].x_m = 151;
    const auto changes = cl.on_transition(fleet, 1, s0, s1);
    CHECK(changes.empty());
    CHECK(cl.members(s1).size() == 3);
    CHECK(fleet[1].role == Role::member);
}

TEST_CASE("head crossing triggers re-election in the old domain")
{
    std::vector<VehicleState> fleet{car(0, 10, 10, +1), car(1, 100, 10, +1), car(2, 290, 10, +1)};
    Clustering cl(150);
    cl.rebuild(fleet);
    const DomainKey s0{SegmentId{0}, +1};
    const DomainKey s1{SegmentId{1}, +1};
    REQUIRE(cl.head(s0) == VehicleId{0});
    fleet[0].x_m = 150;
    const auto changes = cl.on_transition(fleet, 0, s0, s1);
    REQUIRE(changes.size() == 2);
    bool old_domain = false;
    bool new_domain = false;
    for (const auto &c : changes)
    {
        if (c.domain == s0)
        {
            old_domain = c.old_head == VehicleId{0} && c.new_head == VehicleId{1};
        }
        if (c.domain == s1)
        {
            new_domain = c.new_head == VehicleId{0};
        }
    }
    CHECK(old_domain);
    CHECK(new_domain);
    CHECK(fleet[1].role == Role::head);
    CHECK(fleet[2].role == Role::standby_candidate);
}

TEST_CASE("entering an empty segment makes the vehicle head at once")
{
    std::vector<VehicleState> fleet{car(0, 149, 10, +1), car(1, 10, 10, +1)};
    Clustering cl(150);
    cl.rebuild(fleet);
    const DomainKey s1{SegmentId{1}, +1};
    fleet[0].x_m = 150;
    const auto changes = cl.on_transition(fleet, 0, {SegmentId{0}, +1}, s1);
    CHECK(cl.head(s1) == VehicleId{0});
    CHECK(std::any_of(changes.begin(), changes.end(), [&](const HeadChange &c) { return c.domain == s1; }));
}

TEST_CASE("incremental clustering tracks a full rebuild under mobility")
{
    ScenarioConfig cfg;
    RandomStream fr(13, "fleet");
    Mobility m(cfg.area_m, cfg.segment_len_m, cfg.v_min_mps, cfg.v_max_mps, spawn_fleet(cfg, fr),
               RandomStream(13, "mobility"));
    Clustering live(cfg.segment_len_m);
    live.rebuild(m.fleet());
    for (int step = 0; step < 600; ++step)
    {
        for (const auto &tr : m.advance_all(0.1))
        {
            const int dir = m.at(tr.id).dir;
            live.on_transition(m.fleet(), tr.id, {tr.from, dir}, {tr.to, dir});
        }
        if (step % 10 != 9)
        {
            continue;
        }
        for (int seg = 0; seg < cfg.segment_count(); ++seg)
        {
            for (int dir : {+1, -1})
            {
                const DomainKey key{SegmentId{seg}, dir};
                const auto members = members_of(key, m.fleet(), cfg.segment_len_m);
                REQUIRE(live.head(key) == elect_head(members, cfg.segment_len_m));
                REQUIRE(live.members(key).size() == members.size());
                if (const auto head = live.head(key))
                {
                    REQUIRE(live.candidates(key, head, m.fleet()) ==
                            rank_candidates(members, head, cfg.segment_len_m));
                }
            }
        }
    }
}

TEST_CASE("domain keys print compactly")
{
    CHECK(to_string(DomainKey{SegmentId{3}, +1}) == "3+");
    CHECK(to_string(DomainKey{SegmentId{0}, -1}) == "0-");
}
