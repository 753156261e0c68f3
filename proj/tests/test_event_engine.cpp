#include <doctest.h>

#include <cmath>
#include <vector>

#include "batsim/errors.hpp"
#include "batsim/event_engine.hpp"

using namespace batsim;

TEST_SUITE("event-engine") {
  TEST_CASE("event fires at its scheduled time") {
    Scheduler s;
    SimTime fired_at;
    s.schedule(SimTime::from_seconds(0.33), EventKind::TimerElapsed, 0, [&] { fired_at = s.now(); });
    CHECK(s.pending() == 1);
    s.run_until(1_s);
    CHECK(fired_at == 330_ms);
    CHECK(s.now() == 1_s);
  }

  TEST_CASE("ties fire in insertion order") {
    Scheduler s;
    std::vector<char> order;
    s.schedule(1_s, EventKind::TimerElapsed, 0, [&] { order.push_back('A'); });
    s.schedule(1_s, EventKind::TimerElapsed, 0, [&] { order.push_back('B'); });
    s.run_until(2_s);
    CHECK(order == std::vector<char>{'A', 'B'});
  }

  TEST_CASE("scheduling into the past throws") {
    Scheduler s;
    s.run_until(1_s);
    CHECK_THROWS_AS(s.schedule(500_ms, EventKind::TimerElapsed, 0, [] {}), PastEvent);
  }

  TEST_CASE("run with no events") {
    Scheduler s;
    const RunReport r = s.run_until(SimTime{});
    CHECK(r.fired == 0);
    CHECK(s.now() == SimTime{});
  }

  TEST_CASE("events scheduled by handlers at the current time still fire") {
    Scheduler s;
    int count = 0;
    s.schedule(1_s, EventKind::TimerElapsed, 0, [&] {
      ++count;
      s.schedule(s.now(), EventKind::TimerElapsed, 0, [&] { ++count; });
    });
    s.run_until(1_s);
    CHECK(count == 2);
  }

  TEST_CASE("cancellation") {
    Scheduler s;
    bool ran = false;
    const auto h = s.schedule(1_s, EventKind::TimerElapsed, 0, [&] { ran = true; });
    CHECK(s.cancel(h));
    CHECK_FALSE(s.cancel(h));
    s.run_until(2_s);
    CHECK_FALSE(ran);
    CHECK(s.report().cancelled == 1);

    const auto h2 = s.schedule(3_s, EventKind::TimerElapsed, 0, [] {});
    s.run_until(4_s);
    CHECK_FALSE(s.cancel(h2));
  }

  TEST_CASE("trace hash depends on what fired") {
    const auto run = [](NodeId target) {
      Scheduler s;
      s.schedule(1_s, EventKind::TimerElapsed, 0, [] {});
      s.schedule(2_s, EventKind::FrameArrival, target, [] {});
      return s.run_until(3_s);
    };
    CHECK(run(1) == run(1));
    CHECK(run(1).trace_hash != run(2).trace_hash);
    CHECK(run(1).fired_by_kind[static_cast<std::size_t>(EventKind::FrameArrival)] == 1);
  }

  TEST_CASE("rng substreams") {
    RngStream a(7, "mobility", 3), b(7, "mobility", 3), c(7, "mobility", 4), d(7, "mac-backoff", 3);
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
  }

  TEST_CASE("rng distributions") {
    RngStream r(1, "test");
    double sum = 0.0, sum2 = 0.0, gsum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform01();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      const auto k = r.uniform_int(3, 5);
      REQUIRE(k >= 3);
      REQUIRE(k <= 5);
      const double z = r.standard_normal();
      sum += z;
      sum2 += z * z;
      gsum += r.gamma(2.0, 0.5);
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.01);
    CHECK(std::abs(gsum / n - 1.0) < 0.01);
  }
}
