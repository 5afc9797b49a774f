#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsdivn/controller.hpp"
#include "dsdivn/flow_table.hpp"
#include "dsdivn/messages.hpp"

using namespace dsdivn;

namespace
{
    SimTime at(double s) { return SimTime::from_seconds(s); }

    FlowEntry entry_to(VehicleId dst, VehicleId next)
    {
        FlowEntry e;
        e.match = dst;
        e.action = FlowAction::forward_to(next);
        return e;
    }

    MemberRecord rec(VehicleId id, double x, double v = 0.0, SimTime seen = {})
    {
        return MemberRecord{id, x, v, +1, seen};
    }

    ControllerState controller(VehicleId host, DomainKey d, std::vector<MemberRecord> view)
    {
        ControllerState c;
        c.host = host;
        c.domain = d;
        c.status = ControllerStatus::active;
        c.term = 1;
        for (const auto &r : view)
        {
            c.local_view[r.id] = r;
        }
        return c;
    }

    FlowRequest ask(VehicleId from, double from_x, VehicleId dst)
    {
        FlowRequest r;
        r.requester = from;
        r.requester_x_m = from_x;
        r.dst = dst;
        return r;
    }
} // namespace

TEST_CASE("flow table lookup, refresh and expiry")
{
    FlowTable t;
    auto e = entry_to(9, 4);
    e.idle_timeout_s = 1.0;
    e.hard_timeout_s = 3.0;
    t.install(e, at(0));
    REQUIRE(t.lookup(9, at(0.5)) != nullptr);
    // idle timer refreshed at 0.5
    CHECK(t.lookup(9, at(1.4)) != nullptr);
    CHECK(t.peek(9, at(2.3)) != nullptr);
    CHECK(t.lookup(9, at(2.5)) == nullptr);
    CHECK(t.live_count(at(2.5)) == 0);

    SUBCASE("hard timeout wins over activity")
    {
        FlowTable h;
        h.install(e, at(0));
        for (double s = 0.5; s < 3.0; s += 0.5)
        {
            REQUIRE(h.lookup(9, at(s)) != nullptr);
        }
        CHECK(h.lookup(9, at(3.0)) == nullptr);
    }
}

TEST_CASE("duplicate installs replace the entry")
{
    FlowTable t;
    t.install(entry_to(9, 4), at(0));
    t.install(entry_to(9, 5), at(1));
    CHECK(t.live_count(at(1)) == 1);
    CHECK(t.peek(9, at(1))->action.next_hop == 5);
}

TEST_CASE("install after the previous entry expired is fresh")
{
    FlowTable t;
    t.install(entry_to(9, 4), at(0));
    t.install(entry_to(9, 4), at(31));
    const auto *e = t.lookup(9, at(31));
    REQUIRE(e != nullptr);
    CHECK(e->installed_at == at(31));
}

TEST_CASE("bounded buffer evicts the oldest packet")
{
    FlowTable t(2);
    DataPacket p;
    p.final_dst = 9;
    p.id = 1;
    CHECK_FALSE(t.buffer(9, p).has_value());
    p.id = 2;
    CHECK_FALSE(t.buffer(9, p).has_value());
    p.id = 3;
    const auto evicted = t.buffer(9, p);
    REQUIRE(evicted);
    CHECK(evicted->id == 1);
    const auto rest = t.take_buffered(9);
    REQUIRE(rest.size() == 2);
    CHECK(rest[0].id == 2);
    CHECK(t.buffered(9) == 0);
}

TEST_CASE("recovery id rewrite touches every live entry")
{
    FlowTable t;
    t.install(entry_to(1, 2), at(0));
    t.install(entry_to(3, 4), at(0));
    t.set_recovery_id(7, at(1));
    CHECK(t.peek(1, at(1))->recovery_id == VehicleId{7});
    CHECK(t.peek(3, at(1))->recovery_id == VehicleId{7});
    t.set_recovery_id(std::nullopt, at(1));
    CHECK_FALSE(t.peek(1, at(1))->recovery_id.has_value());
}

TEST_CASE("message sizes")
{
    CHECK(message_size_B(FlowRequest{}) == 100);
    CHECK(message_size_B(FlowInstall{}) == 80);
    CHECK(message_size_B(Heartbeat{}) == 32);
    KnowledgeBase kb;
    kb.view.resize(10);
    CHECK(kb.encoded_size_B() == 64 + 24 * 10);
    CHECK(message_size_B(KbSync{kb}) == kb.encoded_size_B());
    CHECK(message_type(CandidateAdvert{}) == "CandidateAdvert");
    CHECK(message_type(ViewExchange{}) == "ViewExchange");
}

TEST_CASE("route inside the domain")
{
    const DomainKey d{SegmentId{0}, +1};
    auto c = controller(0, d, {rec(0, 20), rec(1, 60), rec(2, 140)});
    RouteParams p;

    SUBCASE("direct neighbor")
    {
        const auto r = compute_route(c, ask(1, 60, 2), at(1), 20, p);
        REQUIRE(std::holds_alternative<FlowEntry>(r));
        CHECK(std::get<FlowEntry>(r).action == FlowAction::forward_to(2));
    }
    SUBCASE("requester equals destination")
    {
        const auto r = compute_route(c, ask(2, 140, 2), at(1), 20, p);
        CHECK(std::get<FlowEntry>(r).action == FlowAction::local());
    }
    SUBCASE("unknown destination")
    {
        const auto r = compute_route(c, ask(1, 60, 77), at(1), 20, p);
        REQUIRE(std::holds_alternative<FlowReject>(r));
        CHECK(std::get<FlowReject>(r).dst == 77);
    }
    SUBCASE("recovery id rides on installs only in dsdivn mode")
    {
        c.candidates = {2, 1};
        p.mode = Mode::dsdivn;
        CHECK(std::get<FlowEntry>(compute_route(c, ask(1, 60, 2), at(1), 20, p)).recovery_id == VehicleId{2});
        p.mode = Mode::self_organized;
        CHECK_FALSE(std::get<FlowEntry>(compute_route(c, ask(1, 60, 2), at(1), 20, p)).recovery_id.has_value());
    }
}

TEST_CASE("route toward an adjacent domain")
{
    // domain 1+ spans [150, 300); neighbor 2+ has its head at 380
    const DomainKey d1{SegmentId{1}, +1};
    const DomainKey d2{SegmentId{2}, +1};
    auto c = controller(10, d1, {rec(10, 200), rec(11, 160), rec(12, 250), rec(13, 290)});
    ViewSummary nv;
    nv.domain = d2;
    nv.head = 20;
    nv.head_x_m = 380;
    nv.members = {rec(20, 380), rec(21, 420)};
    nv.received_at = at(1);
    c.neighbor_views[d2] = nv;
    RouteParams p;
    p.range_m = 200;

    const auto r = compute_route(c, ask(11, 160, 21), at(2), 200, p);
    REQUIRE(std::holds_alternative<FlowEntry>(r));
    // farthest own member toward the neighbor head
    CHECK(std::get<FlowEntry>(r).action == FlowAction::forward_to(13));

    SUBCASE("stale neighbor view falls back to local knowledge")
    {
        const auto late = compute_route(c, ask(11, 160, 21), at(1 + 3 * 2.0 + 0.1), 200, p);
        CHECK(std::holds_alternative<FlowReject>(late));
    }
}

TEST_CASE("members extrapolated out of the domain are pruned")
{
    const DomainKey d{SegmentId{0}, +1};
    // member 1 was at 140 moving at 20 m/s: gone after one second
    auto c = controller(0, d, {rec(0, 20), rec(1, 140, 20, at(0)), rec(2, 100, 0, at(0))});
    prune_views(c, at(1), 150, 3.0);
    CHECK_FALSE(c.local_view.contains(1));
    CHECK(c.local_view.contains(2));
    CHECK(std::holds_alternative<FlowReject>(compute_route(c, ask(2, 100, 1), at(1), 20, RouteParams{})));

    SUBCASE("old reports age out, the host never does")
    {
        prune_views(c, at(10), 150, 3.0);
        CHECK(c.local_view.size() == 1);
        CHECK(c.local_view.contains(0));
    }
}

TEST_CASE("snapshot and seed round-trip the knowledge base")
{
    const DomainKey d{SegmentId{2}, -1};
    auto c = controller(5, d, {rec(5, 400), rec(6, 420)});
    c.term = 7;
    c.candidates = {6};
    const auto kb = c.snapshot(3);
    CHECK(kb.version == 3);
    CHECK(kb.view.size() == 2);
    ControllerState r;
    r.host = 6;
    r.seed_from(kb);
    CHECK(r.domain == d);
    CHECK(r.local_view.size() == 2);
    CHECK(r.kb_version == 3);
}
