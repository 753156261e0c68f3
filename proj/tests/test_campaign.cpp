#include <doctest.h>

#include <sstream>

#include "batsim/campaign.hpp"
#include "batsim/errors.hpp"

using namespace batsim;

namespace {

const char* kShort = "sim.duration = 4\ntraffic.start = 2\nsim.nodes = 4\n";

ConfigDocument doc(const std::string& extra) { return parse_config_text(std::string(kShort) + extra); }

AggregateRow agg(const std::string& scenario, const std::string& family, double pdr) {
  AggregateRow r;
  r.scenario = scenario;
  r.family = family;
  r.runs = 25;
  r.pdr = Estimate{pdr, 0.01, 25};
  r.data_rate_bps = Estimate{1e6, 1e4, 25};
  return r;
}

}  // namespace

TEST_SUITE("campaign") {
  TEST_CASE("expansion arithmetic") {
    CHECK(expand_campaign(doc("")).size() == 25);
    const auto specs = expand_campaign(doc("sweep.mobility.speed = 5, 10, 15, 20\n"));
    CHECK(specs.size() == 100);
    CHECK(specs.front().scenario == "generic|mobility.speed=5");
    CHECK(specs.back().config.speed_max == 20.0);
    CHECK(specs.back().seed == 25);
    CHECK(scenario_axis(specs.back().scenario, "mobility.speed") == "20");
    CHECK_FALSE(scenario_axis(specs.back().scenario, "traffic.streams").has_value());

    const auto cross = expand_campaign(doc("sim.seeds = 2\nsweep.traffic.streams = 1, 2\nsweep.metric.family = "
                                           "distance, predictive\n"));
    CHECK(cross.size() == 8);
    CHECK(cross[0].scenario == "generic|traffic.streams=1");
    CHECK(cross[2].config.family == FamilyKind::Predictive);
  }

  TEST_CASE("campaign size cap") {
    CHECK_THROWS_AS(expand_campaign(doc("sim.max_runs = 50\nsweep.mobility.speed = 5, 10, 15\n")), ValidationError);
  }

  TEST_CASE("one row per run, one aggregate row per point") {
    const auto specs = expand_campaign(doc("sim.seeds = 3\nsweep.mobility.speed = 5, 10\n"));
    CampaignOptions opts;
    opts.parallel = 2;
    const CampaignResult res = run_campaign(specs, opts);
    CHECK(res.complete());
    std::ostringstream runs;
    write_runs_csv(runs, res);
    const std::string text = runs.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
    const auto rows = aggregate_campaign(res);
    CHECK(rows.size() == 2);
    CHECK(rows[0].runs == 3);

    std::ostringstream csv;
    write_aggregate_csv(csv, rows);
    std::istringstream in(csv.str());
    const auto back = read_aggregate_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[1].scenario == rows[1].scenario);
    CHECK(back[1].data_rate_bps->mean == rows[1].data_rate_bps->mean);
  }

  TEST_CASE("interrupted campaign lists what is missing") {
    const auto specs = expand_campaign(doc("sim.seeds = 4\n"));
    std::atomic<bool> stop{false};
    CampaignOptions opts;
    opts.stop = &stop;
    opts.on_done = [&](const RunRecord&) { stop = true; };
    const CampaignResult res = run_campaign(specs, opts);
    CHECK_FALSE(res.complete());
    std::ostringstream manifest;
    write_manifest_csv(manifest, res);
    const std::string m = manifest.str();
    CHECK(m.find("0,generic,throughput,2,missing") != std::string::npos);
    CHECK(m.find("0,generic,throughput,4,missing") != std::string::npos);
    CHECK(m.find(",1,") == std::string::npos);
  }

  TEST_CASE("a run alone matches the same run inside a parallel campaign") {
    const auto specs = expand_campaign(doc("sim.seeds = 4\nscenario.environment = urban\n"));
    Simulation alone(specs[2].config, specs[2].seed);
    const RunResult r = alone.run();
    CampaignOptions opts;
    opts.parallel = 3;
    const CampaignResult res = run_campaign(specs, opts);
    CHECK(runs_csv_row(res.records[2].result) == runs_csv_row(r));
    CHECK(res.records[2].result.report == r.report);
  }

  TEST_CASE("summary tables") {
    const std::vector<AggregateRow> rows = {agg("urban", "throughput", 0.5), agg("urban", "distance", 0.6),
                                            agg("urban", "predictive", 0.7)};
    std::ostringstream out;
    emit_summary(out, rows, FigureTemplate::MetricComparison);
    CHECK(out.str() ==
          "scenario\tthroughput_pdr\tthroughput_pdr_ci95\tdistance_pdr\tdistance_pdr_ci95\tpredictive_pdr\t"
          "predictive_pdr_ci95\nurban\t0.5\t0.01\t0.6\t0.01\t0.7\t0.01\n");

    std::ostringstream single;
    CHECK_THROWS_AS(emit_summary(single, {rows[0]}, FigureTemplate::MetricComparison), MissingSeries);

    std::ostringstream empty;
    emit_summary(empty, {}, FigureTemplate::MetricComparison);
    CHECK(empty.str() ==
          "scenario\tthroughput_pdr\tthroughput_pdr_ci95\tdistance_pdr\tdistance_pdr_ci95\tpredictive_pdr\t"
          "predictive_pdr_ci95\n");

    std::ostringstream speed;
    emit_summary(speed, {agg("g|mobility.speed=5", "predictive", 0.9), agg("g|mobility.speed=10", "predictive", 0.8)},
                 FigureTemplate::SpeedSweep);
    CHECK(speed.str() ==
          "mobility.speed\tpredictive_pdr\tpredictive_pdr_ci95\n5\t0.9\t0.01\n10\t0.8\t0.01\n");
    CHECK(parse_figure("elp-probing") == FigureTemplate::ElpProbing);
    CHECK_THROWS_AS(parse_figure("fig9"), ValidationError);
  }
}
