#include <doctest.h>

#include <cmath>
#include <sstream>

#include "batsim/errors.hpp"
#include "batsim/mobility.hpp"

using namespace batsim;

namespace {

bool near(const Vec3& a, const Vec3& b, double tol = 1e-9) { return distance(a, b) <= tol; }

TraceFile two_fix_trace(Vec3 a, Vec3 b) { return TraceFile({{{0.0, a}, {10.0, b}}}); }

}  // namespace

TEST_SUITE("mobility") {
  TEST_CASE("linear motion along a leg") {
    const TraceMobility m(two_fix_trace({0, 0, 0}, {100, 0, 0}));
    CHECK(near(m.interpolate(0, 5.0), {50, 0, 0}));
  }

  TEST_CASE("trace interpolation and clamping") {
    TraceMobility m(two_fix_trace({0, 0, 0}, {0, 100, 0}));
    CHECK(near(m.position_at(0, SimTime::from_seconds(2.5)), {0, 25, 0}));
    CHECK(near(m.interpolate(0, -1.0), {0, 0, 0}));
    CHECK(near(m.position_at(0, 20_s), {0, 100, 0}));
    CHECK(near(m.predict_position(0, 2_s, 3.0), {0, 50, 0}));
  }

  TEST_CASE("trace csv") {
    std::istringstream in("node_id,time_s,x_m,y_m,z_m\n0,0,0,0,0\n1,0,5,5,0\n0,10,0,100,0\n");
    const TraceFile t = TraceFile::parse(in);
    CHECK(t.node_count() == 2);
    CHECK(t.fixes(0).size() == 2);
    std::ostringstream out;
    t.write(out);
    std::istringstream again(out.str());
    CHECK(TraceFile::parse(again).fixes(0)[1].position.y == 100.0);

    std::istringstream gap("node_id,time_s,x_m,y_m,z_m\n0,0,0,0,0\n2,0,5,5,0\n");
    CHECK_THROWS_AS(TraceFile::parse(gap), ParseError);
    std::istringstream backwards("node_id,time_s,x_m,y_m,z_m\n0,5,0,0,0\n0,1,5,5,0\n");
    CHECK_THROWS_AS(TraceFile::parse(backwards), OrderError);
    std::istringstream header("id,t,x,y,z\n0,5,0,0,0\n");
    CHECK_THROWS_AS(TraceFile::parse(header), ParseError);
  }

  TEST_CASE("random waypoint draws stay in the playground and are uniform") {
    RandomWaypointConfig cfg;
    RngStream rng(9, "mobility");
    Vec3 sum;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const Waypoint w = RandomWaypointMobility::step_random_waypoint(cfg, rng);
      REQUIRE(cfg.playground.contains(w.position));
      REQUIRE(w.speed >= cfg.speed_min);
      REQUIRE(w.speed <= cfg.speed_max);
      sum = sum + w.position;
    }
    const Vec3 mean = sum * (1.0 / n);
    CHECK(mean.x == doctest::Approx(300.0).epsilon(0.01));
    CHECK(mean.y == doctest::Approx(300.0).epsilon(0.01));
    CHECK(mean.z == doctest::Approx(5.0).epsilon(0.01));
  }

  TEST_CASE("constant speed") {
    RandomWaypointConfig cfg;
    cfg.speed_min = cfg.speed_max = 10.0;
    RandomWaypointMobility m(1, cfg, 4);
    Vec3 prev = m.position_at(0, SimTime{});
    for (int i = 1; i <= 3000; ++i) {
      const Vec3 p = m.position_at(0, SimTime::from_us(i * 100'000));
      REQUIRE(distance(prev, p) <= 1.0 + 1e-9);
      REQUIRE(cfg.playground.contains(p));
      prev = p;
    }
    // Straight-line displacement equals v * dt away from corners.
    int straight = 0;
    RandomWaypointMobility again(1, cfg, 4);
    for (int i = 0; i < 3000; ++i) {
      const Vec3 a = again.position_at(0, SimTime::from_us(i * 100'000));
      const Vec3 b = again.position_at(0, SimTime::from_us(i * 100'000 + 100'000));
      const double d = distance(a, b);
      if (std::abs(d - 1.0) < 1e-9) ++straight;
    }
    CHECK(straight > 2800);
  }

  TEST_CASE("prediction follows the pre-drawn waypoint chain") {
    RandomWaypointConfig cfg;
    cfg.speed_min = cfg.speed_max = 12.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RandomWaypointMobility m(1, cfg, seed);
      RandomWaypointMobility future(1, cfg, seed);
      for (double t = 0.0; t < 200.0; t += 7.3) {
        const SimTime now = SimTime::from_seconds(t);
        const double tau = 4.0;
        const Vec3 predicted = m.predict_position(0, now, tau);
        CHECK(near(m.predict_position(0, now, 0.0), m.position_at(0, now)));

        // Oracle: walk the true trajectory in small steps.
        double path = 0.0;
        Vec3 prev = future.position_at(0, now);
        for (int k = 1; k <= 400; ++k) {
          const Vec3 p = future.position_at(0, SimTime::from_seconds(t + tau * k / 400.0));
          path += distance(prev, p);
          prev = p;
        }
        CHECK(near(predicted, prev, 1e-6));
        // Sampling cuts a corner by less than one step.
        CHECK(std::abs(path - 12.0 * tau) <= 12.0 * tau / 400.0);
      }
    }
  }

  TEST_CASE("prediction across a waypoint bends into the next leg") {
    RandomWaypointConfig cfg;
    cfg.speed_min = cfg.speed_max = 10.0;
    RandomWaypointMobility m(1, cfg, 3);
    // Find a corner: the step where straight-line displacement falls short.
    for (int i = 0; i < 1000; ++i) {
      const SimTime t = SimTime::from_us(i * 100'000);
      const Vec3 now = m.position_at(0, t);
      const Vec3 ahead = m.predict_position(0, t, 2.0);
      if (distance(now, ahead) < 20.0 - 1e-6) {
        CHECK(distance(now, ahead) < 20.0);
        return;
      }
    }
    FAIL("no corner found");
  }

  TEST_CASE("stationary nodes") {
    RandomWaypointConfig cfg;
    cfg.speed_min = cfg.speed_max = 0.0;
    RandomWaypointMobility m(3, cfg, 2);
    const Vec3 p = m.position_at(1, SimTime{});
    CHECK(near(m.position_at(1, 100_s), p));
    CHECK(near(m.predict_position(1, 100_s, 4.0), p));
  }

  TEST_CASE("static topologies") {
    const auto line = line_topology(5, 100.0);
    CHECK(distance(line[0], line[4]) == doctest::Approx(400.0));
    const auto ring = ring_topology(8, 100.0);
    for (std::size_t i = 0; i < 8; ++i) CHECK(distance(ring[i], ring[(i + 1) % 8]) == doctest::Approx(100.0));
    const auto grid = grid_topology(4, 4, 50.0);
    CHECK(grid.size() == 16);
    CHECK(distance(grid[0], grid[5]) == doctest::Approx(50.0 * std::sqrt(2.0)));
  }

  TEST_CASE("road grid trace stays on the streets") {
    RoadGridConfig cfg;
    cfg.duration_s = 60.0;
    const TraceFile t = generate_road_grid_trace(5, cfg, 8);
    CHECK(t.node_count() == 5);
    for (NodeId n = 0; n < 5; ++n) {
      CHECK(t.fixes(n).back().time_s >= 60.0);
      for (const TraceFix& f : t.fixes(n)) {
        REQUIRE(cfg.playground.contains(f.position));
        CHECK(std::fmod(f.position.x, cfg.block_m) == 0.0);
        CHECK(std::fmod(f.position.y, cfg.block_m) == 0.0);
      }
    }
  }
}
