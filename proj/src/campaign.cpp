#include "batsim/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "batsim/csv.hpp"
#include "batsim/errors.hpp"

namespace batsim {

namespace {

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, 16);
  std::string s(buf, ptr);
  return std::string(16 - s.size(), '0') + s;
}

const char* const kKpiColumns[] = {"pdr",           "mean_delay_s",    "data_rate_bps",    "drops_noroute",
                                   "drops_collision", "drops_sensitivity", "drops_queue"};

std::optional<Estimate> AggregateRow::*const kKpiFields[] = {
    &AggregateRow::pdr,           &AggregateRow::mean_delay_s,    &AggregateRow::data_rate_bps,
    &AggregateRow::drops_noroute, &AggregateRow::drops_collision, &AggregateRow::drops_sensitivity,
    &AggregateRow::drops_queue};

/// Mean with a CI when at least two samples exist; a lone sample has no CI.
std::optional<Estimate> summarize(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() == 1) return Estimate{v.front(), std::numeric_limits<double>::quiet_NaN(), 1};
  return estimate(v);
}

std::string est_mean(const std::optional<Estimate>& e) { return e ? num(e->mean) : "NA"; }
std::string est_ci(const std::optional<Estimate>& e) {
  return e && !std::isnan(e->ci95) ? num(e->ci95) : "NA";
}

}  // namespace

std::vector<RunSpec> expand_campaign(const ConfigDocument& doc) {
  const ScenarioConfig base = build_config(doc);
  std::size_t points = 1;
  for (const auto& [key, values] : doc.sweep) {
    if (values.empty()) throw ValidationError("sweep." + key, "empty value list");
    points *= values.size();
    if (points > base.max_runs) break;
  }
  if (points > base.max_runs || points * base.seeds > base.max_runs) {
    throw ValidationError("sim.max_runs", "campaign of " + std::to_string(points) + " points x " +
                                              std::to_string(base.seeds) + " seeds exceeds the cap of " +
                                              std::to_string(base.max_runs));
  }

  std::vector<RunSpec> out;
  out.reserve(points * base.seeds);
  std::vector<std::size_t> idx(doc.sweep.size(), 0);
  for (std::size_t p = 0; p < points; ++p) {
    ConfigDocument point = doc;
    point.sweep.clear();
    std::string label;
    for (std::size_t a = 0; a < doc.sweep.size(); ++a) {
      const auto& [key, values] = doc.sweep[a];
      point.set(key, values[idx[a]]);
      if (key != "metric.family") label += "|" + key + "=" + values[idx[a]];
    }
    const ScenarioConfig cfg = build_config(point);
    for (std::size_t s = 0; s < base.seeds; ++s) {
      RunSpec spec;
      spec.point = p;
      spec.scenario = cfg.name + label;
      spec.config = cfg;
      spec.config.name = spec.scenario;
      spec.seed = cfg.base_seed + s;
      out.push_back(std::move(spec));
    }
    // Odometer over the axes, last axis fastest.
    for (std::size_t a = doc.sweep.size(); a-- > 0;) {
      if (++idx[a] < doc.sweep[a].second.size()) break;
      idx[a] = 0;
    }
  }
  return out;
}

std::optional<std::string> scenario_axis(const std::string& scenario, const std::string& key) {
  const std::string needle = "|" + key + "=";
  const auto at = scenario.find(needle);
  if (at == std::string::npos) return std::nullopt;
  const auto from = at + needle.size();
  return scenario.substr(from, scenario.find('|', from) - from);
}

bool CampaignResult::complete() const {
  return std::all_of(records.begin(), records.end(),
                     [](const RunRecord& r) { return r.status == RunRecord::Status::Ok; });
}

CampaignResult run_campaign(const std::vector<RunSpec>& specs, const CampaignOptions& opts) {
  CampaignResult result;
  result.records.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) result.records[i].spec = specs[i];

  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  const auto worker = [&] {
    for (;;) {
      if (opts.stop && opts.stop->load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      RunRecord& rec = result.records[i];
      try {
        Simulation sim(rec.spec.config, rec.spec.seed);
        rec.result = sim.run();
        rec.status = RunRecord::Status::Ok;
      } catch (const std::exception& e) {
        rec.status = RunRecord::Status::Failed;
        rec.error = e.what();
      }
      if (opts.on_done) {
        std::lock_guard lock(done_mutex);
        opts.on_done(rec);
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(opts.parallel, 1, std::max<std::size_t>(specs.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return result;
}

std::string runs_csv_header() {
  return "seed,scenario,metric_family,pdr,mean_delay_s,data_rate_bps,drops_noroute,drops_collision,"
         "drops_sensitivity,drops_queue";
}

std::string runs_csv_row(const RunResult& r) {
  const KpiRow& k = r.kpi;
  return std::to_string(r.seed) + "," + r.scenario + "," + r.family + "," + opt_num(k.pdr) + "," +
         opt_num(k.mean_delay_s) + "," + num(k.data_rate_bps) + "," + std::to_string(k.drops_noroute) + "," +
         std::to_string(k.drops_collision) + "," + std::to_string(k.drops_sensitivity) + "," +
         std::to_string(k.drops_queue);
}

std::vector<AggregateRow> aggregate_campaign(const CampaignResult& result) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<KpiRow>> groups;
  for (const RunRecord& rec : result.records) {
    if (rec.status != RunRecord::Status::Ok) continue;
    const auto key = std::make_pair(rec.result.scenario, rec.result.family);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(rec.result.kpi);
  }

  std::vector<AggregateRow> out;
  for (const auto& key : order) {
    const auto& rows = groups[key];
    std::vector<double> pdr, delay, rate, noroute, collision, sensitivity, queue;
    for (const KpiRow& k : rows) {
      if (k.pdr) pdr.push_back(*k.pdr);
      if (k.mean_delay_s) delay.push_back(*k.mean_delay_s);
      rate.push_back(k.data_rate_bps);
      noroute.push_back(static_cast<double>(k.drops_noroute));
      collision.push_back(static_cast<double>(k.drops_collision));
      sensitivity.push_back(static_cast<double>(k.drops_sensitivity));
      queue.push_back(static_cast<double>(k.drops_queue));
    }
    AggregateRow row;
    row.scenario = key.first;
    row.family = key.second;
    row.runs = rows.size();
    row.pdr = summarize(pdr);
    row.mean_delay_s = summarize(delay);
    row.data_rate_bps = summarize(rate);
    row.drops_noroute = summarize(noroute);
    row.drops_collision = summarize(collision);
    row.drops_sensitivity = summarize(sensitivity);
    row.drops_queue = summarize(queue);
    out.push_back(std::move(row));
  }
  return out;
}

void write_runs_csv(std::ostream& out, const CampaignResult& result) {
  out << runs_csv_header() << '\n';
  for (const RunRecord& rec : result.records) {
    if (rec.status == RunRecord::Status::Ok) out << runs_csv_row(rec.result) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "scenario,metric_family,runs";
  for (const char* c : kKpiColumns) out << ',' << c << ",ci95_" << c;
  out << '\n';
  for (const AggregateRow& row : rows) {
    out << row.scenario << ',' << row.family << ',' << row.runs;
    for (auto field : kKpiFields) out << ',' << est_mean(row.*field) << ',' << est_ci(row.*field);
    out << '\n';
  }
}

void write_hashes_csv(std::ostream& out, const CampaignResult& result) {
  out << "seed,scenario,metric_family,trace_hash,events\n";
  for (const RunRecord& rec : result.records) {
    if (rec.status != RunRecord::Status::Ok) continue;
    out << rec.result.seed << ',' << rec.result.scenario << ',' << rec.result.family << ','
        << hex64(rec.result.report.trace_hash) << ',' << rec.result.report.fired << '\n';
  }
}

void write_manifest_csv(std::ostream& out, const CampaignResult& result) {
  out << "point,scenario,metric_family,seed,status,error\n";
  for (const RunRecord& rec : result.records) {
    if (rec.status == RunRecord::Status::Ok) continue;
    std::string err = rec.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << rec.spec.point << ',' << rec.spec.scenario << ',' << to_string(rec.spec.config.family) << ','
        << rec.spec.seed << ',' << (rec.status == RunRecord::Status::Failed ? "failed" : "missing") << ',' << err
        << '\n';
  }
}

void write_campaign_outputs(const std::filesystem::path& dir, const CampaignResult& result) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("runs.csv");
    write_runs_csv(f, result);
  }
  {
    auto f = open("aggregate.csv");
    write_aggregate_csv(f, aggregate_campaign(result));
  }
  {
    auto f = open("hashes.csv");
    write_hashes_csv(f, result);
  }
  {
    auto f = open("manifest.csv");
    write_manifest_csv(f, result);
  }
}

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line)) throw ParseError("aggregate CSV is empty");
  const auto header = csv::split(line);
  const auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("aggregate CSV lacks column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_scenario = column("scenario");
  const std::size_t c_family = column("metric_family");
  const std::size_t c_runs = column("runs");
  std::vector<std::pair<std::size_t, std::size_t>> kpi_cols;
  for (const char* c : kKpiColumns) kpi_cols.emplace_back(column(c), column(std::string("ci95_") + c));

  std::vector<AggregateRow> rows;
  while (csv::read_line(in, line)) {
    const auto f = csv::split(line);
    if (f.size() != header.size()) throw ParseError("aggregate CSV row has " + std::to_string(f.size()) + " fields");
    AggregateRow row;
    row.scenario = f[c_scenario];
    row.family = f[c_family];
    row.runs = static_cast<std::size_t>(csv::to_int(f[c_runs], "runs"));
    for (std::size_t k = 0; k < kpi_cols.size(); ++k) {
      const std::string& mean = f[kpi_cols[k].first];
      const std::string& ci = f[kpi_cols[k].second];
      if (mean == "NA") continue;
      Estimate e;
      e.mean = csv::to_double(mean, kKpiColumns[k]);
      e.ci95 = ci == "NA" ? std::numeric_limits<double>::quiet_NaN() : csv::to_double(ci, kKpiColumns[k]);
      e.samples = row.runs;
      row.*kKpiFields[k] = e;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FigureTemplate parse_figure(const std::string& name) {
  if (name == "elp-probing") return FigureTemplate::ElpProbing;
  if (name == "metric-comparison") return FigureTemplate::MetricComparison;
  if (name == "speed-sweep") return FigureTemplate::SpeedSweep;
  if (name == "load-sweep") return FigureTemplate::LoadSweep;
  if (name == "stream-sweep") return FigureTemplate::StreamSweep;
  throw ValidationError("figure", "unknown figure template '" + name + "'");
}

const char* to_string(FigureTemplate f) {
  switch (f) {
    case FigureTemplate::ElpProbing: return "elp-probing";
    case FigureTemplate::MetricComparison: return "metric-comparison";
    case FigureTemplate::SpeedSweep: return "speed-sweep";
    case FigureTemplate::LoadSweep: return "load-sweep";
    case FigureTemplate::StreamSweep: return "stream-sweep";
  }
  return "?";
}

void emit_summary(std::ostream& out, const std::vector<AggregateRow>& rows, FigureTemplate figure) {
  std::string x_key;
  std::vector<std::string> x_aliases;
  const char* kpi = "pdr";
  std::optional<Estimate> AggregateRow::*field = &AggregateRow::pdr;
  std::vector<std::string> families;
  switch (figure) {
    case FigureTemplate::ElpProbing:
      x_key = "batman.probing";
      x_aliases = {"batman.probe_size"};
      kpi = "data_rate_bps";
      field = &AggregateRow::data_rate_bps;
      break;
    case FigureTemplate::MetricComparison:
      x_key = "scenario";
      families = {"throughput", "distance", "predictive"};
      break;
    case FigureTemplate::SpeedSweep:
      x_key = "mobility.speed";
      x_aliases = {"mobility.speed_max", "mobility.speed_min"};
      break;
    case FigureTemplate::LoadSweep:
      x_key = "traffic.rate_bps";
      break;
    case FigureTemplate::StreamSweep:
      x_key = "traffic.streams";
      break;
  }

  if (!rows.empty()) {
    for (const std::string& f : families) {
      if (std::none_of(rows.begin(), rows.end(), [&](const AggregateRow& r) { return r.family == f; })) {
        throw MissingSeries("figure " + std::string(to_string(figure)) + " needs the " + f + " family");
      }
    }
  }
  for (const AggregateRow& r : rows) {
    if (std::find(families.begin(), families.end(), r.family) == families.end()) families.push_back(r.family);
  }

  const auto x_of = [&](const AggregateRow& r) -> std::string {
    if (figure == FigureTemplate::MetricComparison) return r.scenario;
    if (auto v = scenario_axis(r.scenario, x_key)) return *v;
    for (const auto& alias : x_aliases) {
      if (auto v = scenario_axis(r.scenario, alias)) return *v;
    }
    return r.scenario;
  };

  std::vector<std::string> xs;
  std::map<std::pair<std::string, std::string>, const AggregateRow*> cell;
  for (const AggregateRow& r : rows) {
    const std::string x = x_of(r);
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    cell[{x, r.family}] = &r;
  }

  out << x_key;
  for (const std::string& f : families) out << '\t' << f << '_' << kpi << '\t' << f << '_' << kpi << "_ci95";
  out << '\n';
  for (const std::string& x : xs) {
    out << x;
    for (const std::string& f : families) {
      const auto it = cell.find({x, f});
      const std::optional<Estimate> e = it == cell.end() ? std::nullopt : it->second->*field;
      out << '\t' << est_mean(e) << '\t' << est_ci(e);
    }
    out << '\n';
  }
}

}  // namespace batsim
