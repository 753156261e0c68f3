#include <doctest.h>

#include "batsim/config.hpp"
#include "batsim/errors.hpp"
#include "batsim/simulation.hpp"

using namespace batsim;

TEST_SUITE("simulation") {
  TEST_CASE("default scenario runs to its end") {
    const ScenarioConfig c = build_config(parse_config_text(""));
    Simulation sim(c, 1);
    const RunResult r = sim.run();
    CHECK(sim.now() == 300_s);
    CHECK(r.report.end == 300_s);
    CHECK(r.kpi.sent == 269000);
    CHECK(r.report.fired_by_kind[static_cast<std::size_t>(EventKind::RunEnd)] == 1);
  }

  TEST_CASE("same seed, same report") {
    const ScenarioConfig c = build_config(parse_config_text("scenario.environment = urban\nsim.duration = 40\n"));
    Simulation a(c, 3), b(c, 3), other(c, 4);
    const RunResult ra = a.run();
    CHECK(ra.report == b.run().report);
    CHECK(ra.report.trace_hash != other.run().report.trace_hash);
  }

  TEST_CASE("static chain delivers every packet") {
    const ScenarioConfig c = build_config(parse_config_text(
        "mobility.model = static\nsim.nodes = 3\ntraffic.source = 0\ntraffic.destination = 2\n"
        "traffic.rate_bps = 2e6\nsim.duration = 40\nmetric.family = hopcount\n"));
    Simulation sim(c, 1);
    sim.advance_to(10_s);
    CHECK(sim.node(0).next_hop(2) == NodeId{1});
    CHECK(sim.node(2).next_hop(0) == NodeId{1});
    const RunResult r = sim.run();
    CHECK(r.kpi.sent == 1800);
    CHECK(*r.kpi.pdr == 1.0);
  }

  TEST_CASE("route snapshots") {
    const ScenarioConfig c = build_config(parse_config_text(
        "mobility.model = static\nsim.nodes = 3\nsim.duration = 35\noutput.route_interval = 5\n"));
    Simulation sim(c, 1);
    const RunResult r = sim.run();
    CHECK_FALSE(r.routes.empty());
    CHECK(r.routes.back().time == 35_s);
  }

  TEST_CASE("random stream endpoints differ") {
    const ScenarioConfig c = build_config(parse_config_text("traffic.streams = 20\nsim.duration = 35\n"));
    Simulation sim(c, 9);
    for (const auto& [s, d] : sim.streams()) CHECK(s != d);
  }
}
