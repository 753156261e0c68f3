// batsim: command-line front end for scenario runs and campaigns.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "batsim/campaign.hpp"
#include "batsim/config.hpp"
#include "batsim/errors.hpp"
#include "batsim/mobility.hpp"
#include "batsim/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

struct ConfigArgs {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "scenario configuration file");
    app->add_option("--preset", preset, "environment preset")->check(CLI::IsMember({"rural", "urban"}));
    app->add_option("--set", overrides, "override a key: --set key=value");
    app->add_option("--seed", seed, "base seed");
  }

  batsim::ConfigDocument document() const {
    batsim::ConfigDocument doc = config.empty() ? batsim::ConfigDocument{} : batsim::parse_config_file(config);
    if (!preset.empty()) doc.set("scenario.environment", preset);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw batsim::ParseError("--set expects key=value, got '" + kv + "'");
      const auto extra = batsim::parse_config_text(kv, "--set");
      for (const auto& [k, v] : extra.values) doc.set(k, v);
      for (const auto& axis : extra.sweep) {
        std::erase_if(doc.sweep, [&](const auto& a) { return a.first == axis.first; });
        doc.sweep.push_back(axis);
      }
    }
    if (seed) doc.set("sim.seed", std::to_string(*seed));
    if (seeds) doc.set("sim.seeds", std::to_string(*seeds));
    return doc;
  }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw batsim::Error("cannot write " + path.string());
  out << text;
}

int cmd_validate(const ConfigArgs& args) {
  const auto doc = args.document();
  const auto specs = batsim::expand_campaign(doc);
  std::cout << batsim::dump_config(batsim::build_config(doc));
  for (const auto& [key, values] : doc.sweep) {
    std::cout << "sweep." << key << " = ";
    for (std::size_t i = 0; i < values.size(); ++i) std::cout << (i ? ", " : "") << values[i];
    std::cout << '\n';
  }
  std::cerr << "ok: " << specs.size() << " run(s)\n";
  return kExitOk;
}

int cmd_run(const ConfigArgs& args, const std::string& out_dir) {
  const auto doc = args.document();
  const batsim::ScenarioConfig cfg = batsim::build_config(doc);
  batsim::CampaignResult result;
  batsim::RunRecord rec;
  rec.spec.scenario = cfg.name;
  rec.spec.config = cfg;
  rec.spec.seed = cfg.base_seed;
  try {
    batsim::Simulation sim(cfg, cfg.base_seed);
    rec.result = sim.run();
    rec.status = batsim::RunRecord::Status::Ok;
  } catch (const batsim::ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    rec.status = batsim::RunRecord::Status::Failed;
    rec.error = e.what();
  }
  result.records.push_back(rec);
  if (!out_dir.empty()) {
    batsim::write_campaign_outputs(out_dir, result);
    write_file(std::filesystem::path(out_dir) / "effective.conf", batsim::dump_config(cfg));
  }
  if (rec.status != batsim::RunRecord::Status::Ok) {
    std::cerr << "run failed: " << rec.error << '\n';
    return kExitPartial;
  }
  std::cout << batsim::runs_csv_header() << '\n' << batsim::runs_csv_row(rec.result) << '\n';
  batsim::write_hashes_csv(std::cerr, result);
  return kExitOk;
}

int cmd_sweep(const ConfigArgs& args, const std::string& out_dir, std::size_t parallel) {
  const auto doc = args.document();
  const auto specs = batsim::expand_campaign(doc);
  std::signal(SIGINT, on_sigint);

  batsim::CampaignOptions opts;
  opts.parallel = parallel;
  opts.stop = &g_stop;
  std::size_t done = 0;
  opts.on_done = [&](const batsim::RunRecord& r) {
    ++done;
    std::cerr << "[" << done << "/" << specs.size() << "] " << r.spec.scenario << " "
              << batsim::to_string(r.spec.config.family) << " seed " << r.spec.seed
              << (r.status == batsim::RunRecord::Status::Ok ? "" : " FAILED: " + r.error) << '\n';
  };
  const auto result = batsim::run_campaign(specs, opts);

  batsim::write_campaign_outputs(out_dir, result);
  std::ostringstream eff;
  eff << batsim::dump_config(batsim::build_config(doc));
  for (const auto& [key, values] : doc.sweep) {
    eff << "sweep." << key << " = ";
    for (std::size_t i = 0; i < values.size(); ++i) eff << (i ? ", " : "") << values[i];
    eff << '\n';
  }
  write_file(std::filesystem::path(out_dir) / "effective.conf", eff.str());
  if (!result.complete()) {
    std::cerr << "campaign incomplete; see " << (std::filesystem::path(out_dir) / "manifest.csv").string() << '\n';
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_summarize(const std::string& out_dir, const std::vector<std::string>& figures) {
  std::ifstream in(std::filesystem::path(out_dir) / "aggregate.csv");
  if (!in) throw batsim::Error("no aggregate.csv in " + out_dir);
  const auto rows = batsim::read_aggregate_csv(in);
  for (const std::string& name : figures) {
    const auto figure = batsim::parse_figure(name);
    std::ostringstream table;
    batsim::emit_summary(table, rows, figure);
    write_file(std::filesystem::path(out_dir) / ("summary-" + name + ".tsv"), table.str());
    std::cout << "# " << name << '\n' << table.str();
  }
  return kExitOk;
}

int cmd_dump_routes(const ConfigArgs& args, std::optional<double> at_s) {
  const batsim::ScenarioConfig cfg = batsim::build_config(args.document());
  batsim::Simulation sim(cfg, cfg.base_seed);
  sim.advance_to(at_s ? batsim::SimTime::from_seconds(*at_s) : cfg.duration);
  std::cout << "time_s,node,destination,next_hop,metric\n";
  for (batsim::NodeId n = 0; n < sim.node_count(); ++n) {
    for (const auto& r : sim.node(n).routing_table()) {
      std::cout << sim.now().seconds() << ',' << n << ',' << r.destination << ',' << r.next_hop << ',' << r.metric
                << '\n';
    }
  }
  return kExitOk;
}

int cmd_gen_trace(std::size_t nodes, std::uint64_t seed, double duration, const std::string& out) {
  batsim::RoadGridConfig cfg;
  cfg.duration_s = duration;
  const auto trace = batsim::generate_road_grid_trace(nodes, cfg, seed);
  std::ostringstream text;
  trace.write(text);
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_file(out, text.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B.A.T.M.A.N. V mesh routing simulator"};
  app.require_subcommand(1);

  ConfigArgs args;
  std::string out_dir;
  std::size_t parallel = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> figures;
  std::optional<double> at_s;
  std::size_t trace_nodes = 10;
  double trace_duration = 300.0;
  std::string trace_out;

  auto* run = app.add_subcommand("run", "single seeded run; prints its KPI row");
  args.attach(run);
  run->add_option("--out", out_dir, "write CSV outputs to this directory");

  auto* sweep = app.add_subcommand("sweep", "campaign over sweep points and seeds");
  args.attach(sweep);
  sweep->add_option("--seeds", args.seeds, "seeds per sweep point");
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);

  auto* summarize = app.add_subcommand("summarize", "plot tables from a campaign's aggregate.csv");
  summarize->add_option("--out", out_dir, "campaign output directory")->required();
  summarize->add_option("--figure", figures, "figure template")
      ->required()
      ->check(CLI::IsMember({"elp-probing", "metric-comparison", "speed-sweep", "load-sweep", "stream-sweep"}));

  auto* dump = app.add_subcommand("dump-routes", "routing tables of every node at a given time");
  args.attach(dump);
  dump->add_option("--at", at_s, "simulation time in seconds (default: end of run)");

  auto* validate = app.add_subcommand("validate-config", "print the effective configuration");
  args.attach(validate);
  validate->add_option("--seeds", args.seeds, "seeds per sweep point");

  auto* gen = app.add_subcommand("gen-trace", "synthetic road-grid vehicular trace");
  gen->add_option("--nodes", trace_nodes, "vehicles")->check(CLI::PositiveNumber);
  gen->add_option("--seed", args.seed, "seed");
  gen->add_option("--duration", trace_duration, "seconds")->check(CLI::PositiveNumber);
  gen->add_option("--out", trace_out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(args, out_dir);
    if (*sweep) return cmd_sweep(args, out_dir, parallel);
    if (*summarize) return cmd_summarize(out_dir, figures);
    if (*dump) return cmd_dump_routes(args, at_s);
    if (*validate) return cmd_validate(args);
    if (*gen) return cmd_gen_trace(trace_nodes, args.seed.value_or(1), trace_duration, trace_out);
  } catch (const batsim::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const batsim::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const batsim::OrderError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitOk;
}
