#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dsdivn/config.hpp"
#include "dsdivn/random.hpp"
#include "dsdivn/scheduler.hpp"

#include <stdexcept>
#include <string>
#include <vector>

using namespace dsdivn;

TEST_CASE("events dequeue in time order")
{
    Scheduler s;
    std::vector<int> order;
    s.schedule(SimTime::from_seconds(5), [&] { order.push_back(5); });
    s.schedule(SimTime::from_seconds(3), [&] { order.push_back(3); });
    s.run_until(SimTime::from_seconds(10));
    CHECK(order == std::vector<int>{3, 5});
}

TEST_CASE("equal fire times keep insertion order")
{
    Scheduler s;
    std::string order;
    s.schedule(SimTime::from_seconds(3), [&] { order += 'A'; });
    s.schedule(SimTime::from_seconds(3), [&] { order += 'B'; });
    s.run_until(SimTime::from_seconds(3));
    CHECK(order == "AB");
}

TEST_CASE("scheduling in the past is a hard fault")
{
    Scheduler s;
    s.run_until(SimTime::from_seconds(4));
    CHECK_THROWS_AS(s.schedule(SimTime::from_seconds(2), [] {}), std::logic_error);
}

TEST_CASE("empty queue still advances the clock")
{
    Scheduler s;
    const auto stats = s.run_until(SimTime::from_seconds(120));
    CHECK(stats.clock == SimTime::from_seconds(120));
    CHECK(stats.processed == 0);
    CHECK(s.now().seconds() == doctest::Approx(120.0));
}

TEST_CASE("events past the horizon stay queued")
{
    Scheduler s;
    bool ran = false;
    s.schedule(SimTime::from_seconds(130), [&] { ran = true; });
    const auto stats = s.run_until(SimTime::from_seconds(120));
    CHECK_FALSE(ran);
    CHECK(stats.remaining == 1);
}

TEST_CASE("processed count equals scheduled minus remainder, timestamps non-decreasing")
{
    Scheduler s;
    RandomStream rng(7, "test");
    SimTime last;
    bool monotone = true;
    s.set_dequeue_hook([&](SimTime t, std::uint64_t) {
        monotone = monotone && !(t < last);
        last = t;
    });
    // events that schedule further events, some beyond the horizon
    std::function<void()> spawn = [&] {
        if (rng.uniform01() < 0.7)
        {
            s.schedule_in(rng.uniform(0.0, 3.0), spawn);
            s.schedule_in(rng.uniform(0.0, 3.0), spawn);
        }
    };
    for (int i = 0; i < 50; ++i)
    {
        s.schedule(SimTime::from_seconds(rng.uniform(0.0, 10.0)), spawn);
    }
    const auto stats = s.run_until(SimTime::from_seconds(20));
    CHECK(monotone);
    CHECK(s.processed_total() == s.scheduled_total() - stats.remaining);
}

TEST_CASE("time conversions use integer microseconds")
{
    CHECK(SimTime::from_seconds(1.5).ticks() == 1'500'000);
    CHECK(SimTime::from_seconds(0.2).after(0.4) == SimTime::from_seconds(0.6));
    CHECK_THROWS_AS(SimTime::from_seconds(-1.0), std::invalid_argument);
}

TEST_CASE("labeled streams are deterministic and independent")
{
    RandomStream a(1, "mobility");
    RandomStream b(1, "mobility");
    RandomStream c(1, "traffic");
    bool same = true;
    bool differs = false;
    for (int i = 0; i < 100; ++i)
    {
        const auto x = a.next_u64();
        same = same && x == b.next_u64();
        differs = differs || x != c.next_u64();
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("uniform draws respect their range")
{
    RandomStream r(3, "range");
    for (int i = 0; i < 10000; ++i)
    {
        const double v = r.uniform(10, 30);
        REQUIRE(v >= 10.0);
        REQUIRE(v <= 30.0);
    }
    CHECK_THROWS(r.uniform(2, 1));
    CHECK_THROWS(r.index(0));
}

TEST_CASE("stream seeds depend on both seed and label")
{
    CHECK(derive_stream_seed(1, "link") != derive_stream_seed(2, "link"));
    CHECK(derive_stream_seed(1, "link") != derive_stream_seed(1, "control"));
    CHECK(derive_stream_seed(9, "x") == derive_stream_seed(9, "x"));
}

namespace
{
    const char *kScenario = R"({
        "area_m": 1000, "segment_len_m": 150, "n_vehicles": 200,
        "v_min_mps": 10, "v_max_mps": 30, "tx_range_m": 300,
        "pkt_rate_hz": 5, "sim_duration_s": 120, "mode": "self-organized",
        "timers": {"hb_period_s": 0.25}, "failure": {"target_segment": 3, "start_s": 61, "duration_s": 5},
        "link": {"loss_prob": 0}, "seed": 42
    })";
}

TEST_CASE("scenario parsing")
{
    const auto cfg = parse_scenario(kScenario);
    CHECK(cfg.mode == Mode::self_organized);
    CHECK(cfg.seed == 42);
    CHECK(cfg.timers.hb_period_s == doctest::Approx(0.25));
    CHECK(cfg.timers.detect_timeout_s == doctest::Approx(0.6));
    CHECK(cfg.link.loss_prob == 0.0);
    CHECK(cfg.link.bitrate_bps == doctest::Approx(6e6));
    REQUIRE(cfg.failure);
    CHECK(cfg.failure->target_dir == +1);
    CHECK(cfg.segment_count() == 7);

    SUBCASE("round trip")
    {
        const auto again = parse_scenario(scenario_to_json(cfg));
        CHECK(scenario_to_json(again) == scenario_to_json(cfg));
    }
    SUBCASE("unknown keys are rejected")
    {
        std::string text = kScenario;
        text.insert(text.find("\"seed\""), "\"sede\": 1, ");
        CHECK_THROWS_AS(parse_scenario(text), ConfigError);
    }
    SUBCASE("missing keys are rejected")
    {
        std::string text = kScenario;
        text.replace(text.find("\"seed\": 42"), 10, "\"x\": 0");
        CHECK_THROWS_AS(parse_scenario(text), ConfigError);
    }
    SUBCASE("segments longer than half the range are rejected")
    {
        auto bad = cfg;
        bad.segment_len_m = 151;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
    SUBCASE("bad mode")
    {
        CHECK_THROWS_AS(parse_mode("fallback"), ConfigError);
    }
}
