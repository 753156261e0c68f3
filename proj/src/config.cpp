#include "batsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "batsim/csv.hpp"
#include "batsim/errors.hpp"

namespace batsim {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt_seconds(SimTime t) { return fmt_double(t.seconds()); }

double parse_double(const std::string& key, const std::string& v) {
  try {
    return csv::to_double(v, key);
  } catch (const ParseError&) {
    throw ValidationError(key, "expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  long long n = 0;
  try {
    n = csv::to_int(v, key);
  } catch (const ParseError&) {
    throw ValidationError(key, "expected an integer, got '" + v + "'");
  }
  if (n < 0) throw ValidationError(key, "must not be negative");
  return static_cast<std::uint64_t>(n);
}

SimTime parse_seconds(const std::string& key, const std::string& v) {
  const double s = parse_double(key, v);
  if (s < 0.0) throw ValidationError(key, "must not be negative");
  return SimTime::from_seconds(s);
}

SimTime parse_micros(const std::string& key, const std::string& v) {
  return SimTime::from_us(static_cast<std::int64_t>(parse_count(key, v)));
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ValidationError(key, "expected true/false, got '" + v + "'");
}

std::optional<NodeId> parse_endpoint(const std::string& key, const std::string& v) {
  if (v == "random") return std::nullopt;
  return static_cast<NodeId>(parse_count(key, v));
}

std::string fmt_endpoint(const std::optional<NodeId>& n) { return n ? std::to_string(*n) : "random"; }

Environment parse_environment(const std::string& key, const std::string& v) {
  if (v == "rural") return Environment::Rural;
  if (v == "urban") return Environment::Urban;
  throw ValidationError(key, "expected rural or urban, got '" + v + "'");
}

struct KeySpec {
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;  // empty for aliases
};

#define NUM(k, field)                                                                      \
  KeySpec {                                                                                \
    k, [](ScenarioConfig& c, const std::string& v) { c.field = parse_double(k, v); },     \
        [](const ScenarioConfig& c) { return fmt_double(c.field); }                       \
  }
#define COUNT(k, field, T)                                                                              \
  KeySpec {                                                                                             \
    k, [](ScenarioConfig& c, const std::string& v) { c.field = static_cast<T>(parse_count(k, v)); },   \
        [](const ScenarioConfig& c) { return std::to_string(c.field); }                                \
  }
#define SECONDS(k, field)                                                                  \
  KeySpec {                                                                                \
    k, [](ScenarioConfig& c, const std::string& v) { c.field = parse_seconds(k, v); },    \
        [](const ScenarioConfig& c) { return fmt_seconds(c.field); }                      \
  }

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"scenario.name", [](ScenarioConfig& c, const std::string& v) { c.name = v; },
       [](const ScenarioConfig& c) { return c.name; }},
      {"scenario.environment",
       [](ScenarioConfig& c, const std::string& v) { c.environment = parse_environment("scenario.environment", v); },
       [](const ScenarioConfig& c) { return std::string(to_string(c.environment)); }},
      COUNT("sim.nodes", nodes, std::size_t),
      SECONDS("sim.duration", duration),
      COUNT("sim.seeds", seeds, std::size_t),
      COUNT("sim.seed", base_seed, std::uint64_t),
      COUNT("sim.max_runs", max_runs, std::size_t),
      NUM("playground.x", playground.size.x),
      NUM("playground.y", playground.size.y),
      NUM("playground.z", playground.size.z),
      NUM("radio.tx_power_dbm", radio.tx_power_dbm),
      NUM("radio.frequency_hz", radio.carrier_hz),
      NUM("radio.sensitivity_dbm", radio.rx_sensitivity_dbm),
      NUM("radio.tx_gain_dbi", radio.tx_gain_dbi),
      NUM("radio.rx_gain_dbi", radio.rx_gain_dbi),
      {"channel.model",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "friis") c.channel = ChannelKind::Friis;
         else if (v == "nakagami") c.channel = ChannelKind::Nakagami;
         else if (v == "empirical") c.channel = ChannelKind::Empirical;
         else throw ValidationError("channel.model", "expected friis, nakagami or empirical, got '" + v + "'");
       },
       [](const ScenarioConfig& c) {
         switch (c.channel) {
           case ChannelKind::Friis: return std::string("friis");
           case ChannelKind::Nakagami: return std::string("nakagami");
           case ChannelKind::Empirical: return std::string("empirical");
         }
         return std::string();
       }},
      NUM("channel.eta", eta),
      NUM("channel.nakagami_m", nakagami_m),
      NUM("channel.reference_distance", reference_distance),
      {"channel.table", [](ScenarioConfig& c, const std::string& v) { c.empirical_table = v; },
       [](const ScenarioConfig& c) { return c.empirical_table.string(); }},
      NUM("mac.phy_rate_bps", mac.phy_rate_bps),
      {"mac.overhead_us",
       [](ScenarioConfig& c, const std::string& v) { c.mac.per_frame_overhead = parse_micros("mac.overhead_us", v); },
       [](const ScenarioConfig& c) { return std::to_string(c.mac.per_frame_overhead.us()); }},
      {"mac.max_backoff_us",
       [](ScenarioConfig& c, const std::string& v) { c.mac.max_backoff = parse_micros("mac.max_backoff_us", v); },
       [](const ScenarioConfig& c) { return std::to_string(c.mac.max_backoff.us()); }},
      COUNT("mac.retries", mac.unicast_retries, int),
      COUNT("mac.queue_cap", mac.queue_cap, std::size_t),
      SECONDS("batman.ogm_interval", batman.ogm_interval),
      SECONDS("batman.elp_interval", batman.elp_interval),
      SECONDS("batman.jitter", batman.emission_jitter),
      SECONDS("batman.rebroadcast_jitter", batman.rebroadcast_jitter),
      COUNT("batman.ttl", batman.ttl, int),
      NUM("batman.ewma_weight", batman.ewma_weight),
      COUNT("batman.elp_size", batman.elp_bytes, std::size_t),
      COUNT("batman.ogm_size", batman.ogm_bytes, std::size_t),
      COUNT("batman.data_header_size", batman.data_header_bytes, std::size_t),
      {"batman.probing",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "off" || v == "false" || v == "0") {
           c.batman.probing = false;
         } else if (v == "on" || v == "true") {
           c.batman.probing = true;
         } else {
           // A byte count enables probing with that probe size.
           c.batman.probing = true;
           c.batman.probe_bytes = parse_count("batman.probing", v);
         }
       },
       [](const ScenarioConfig& c) { return std::string(c.batman.probing ? "on" : "off"); }},
      COUNT("batman.probe_size", batman.probe_bytes, std::size_t),
      COUNT("batman.probes_per_neighbor", batman.probes_per_neighbor, int),
      COUNT("batman.delivery_window", batman.delivery_window, std::size_t),
      COUNT("batman.hop_limit", batman.hop_limit, int),
      NUM("batman.hop_penalty", hop_penalty),
      COUNT("batman.max_orig_diff", batman.max_orig_diff, std::uint32_t),
      SECONDS("batman.originator_timeout", batman.originator_timeout),
      {"metric.family", [](ScenarioConfig& c, const std::string& v) { c.family = parse_family(v); },
       [](const ScenarioConfig& c) { return std::string(to_string(c.family)); }},
      NUM("metric.alpha", alpha),
      NUM("metric.tau", batman.prediction_tau),
      {"metric.dmax",
       [](ScenarioConfig& c, const std::string& v) {
         c.dmax = v == "auto" ? std::nullopt : std::optional<double>(parse_double("metric.dmax", v));
       },
       [](const ScenarioConfig& c) { return c.dmax ? fmt_double(*c.dmax) : std::string("auto"); }},
      {"metric.compose_link",
       [](ScenarioConfig& c, const std::string& v) { c.compose_link = parse_bool("metric.compose_link", v); },
       [](const ScenarioConfig& c) { return std::string(c.compose_link ? "true" : "false"); }},
      {"mobility.model",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "rwp" || v == "random_waypoint") c.mobility = MobilityKind::RandomWaypoint;
         else if (v == "trace") c.mobility = MobilityKind::Trace;
         else if (v == "static") c.mobility = MobilityKind::Static;
         else throw ValidationError("mobility.model", "expected rwp, trace or static, got '" + v + "'");
       },
       [](const ScenarioConfig& c) {
         switch (c.mobility) {
           case MobilityKind::RandomWaypoint: return std::string("rwp");
           case MobilityKind::Trace: return std::string("trace");
           case MobilityKind::Static: return std::string("static");
         }
         return std::string();
       }},
      NUM("mobility.speed_min", speed_min),
      NUM("mobility.speed_max", speed_max),
      {"mobility.speed",
       [](ScenarioConfig& c, const std::string& v) { c.speed_min = c.speed_max = parse_double("mobility.speed", v); },
       nullptr},
      NUM("mobility.pause", pause_s),
      {"mobility.trace", [](ScenarioConfig& c, const std::string& v) { c.trace = v; },
       [](const ScenarioConfig& c) { return c.trace.string(); }},
      {"mobility.topology",
       [](ScenarioConfig& c, const std::string& v) {
         if (v == "line") c.topology = Topology::Line;
         else if (v == "ring") c.topology = Topology::Ring;
         else if (v == "grid") c.topology = Topology::Grid;
         else throw ValidationError("mobility.topology", "expected line, ring or grid, got '" + v + "'");
       },
       [](const ScenarioConfig& c) {
         switch (c.topology) {
           case Topology::Line: return std::string("line");
           case Topology::Ring: return std::string("ring");
           case Topology::Grid: return std::string("grid");
         }
         return std::string();
       }},
      COUNT("mobility.grid_cols", grid_cols, std::size_t),
      {"mobility.spacing",
       [](ScenarioConfig& c, const std::string& v) {
         c.spacing_m = v == "auto" ? std::nullopt : std::optional<double>(parse_double("mobility.spacing", v));
       },
       [](const ScenarioConfig& c) { return c.spacing_m ? fmt_double(*c.spacing_m) : std::string("auto"); }},
      NUM("mobility.spacing_dmax", spacing_dmax),
      COUNT("traffic.streams", streams, std::size_t),
      {"traffic.source",
       [](ScenarioConfig& c, const std::string& v) { c.source = parse_endpoint("traffic.source", v); },
       [](const ScenarioConfig& c) { return fmt_endpoint(c.source); }},
      {"traffic.destination",
       [](ScenarioConfig& c, const std::string& v) { c.destination = parse_endpoint("traffic.destination", v); },
       [](const ScenarioConfig& c) { return fmt_endpoint(c.destination); }},
      NUM("traffic.rate_bps", rate_bps),
      COUNT("traffic.packet_size", packet_size, std::size_t),
      SECONDS("traffic.start", traffic_start),
      {"traffic.stop",
       [](ScenarioConfig& c, const std::string& v) {
         c.traffic_stop = v == "auto" ? std::nullopt : std::optional<SimTime>(parse_seconds("traffic.stop", v));
       },
       [](const ScenarioConfig& c) { return c.traffic_stop ? fmt_seconds(*c.traffic_stop) : std::string("auto"); }},
      SECONDS("traffic.drain", traffic_drain),
      SECONDS("output.route_interval", route_dump_interval),
  };
  return specs;
}

#undef NUM
#undef COUNT
#undef SECONDS

const KeySpec* find_spec(const std::string& key) {
  for (const KeySpec& s : key_specs()) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

void apply_preset(ScenarioConfig& c, Environment env) {
  c.environment = env;
  if (env == Environment::Rural) {
    c.channel = ChannelKind::Friis;
    c.alpha = 1.0;
    c.batman.prediction_tau = 3.0;
  } else {
    c.channel = ChannelKind::Nakagami;
    c.nakagami_m = 2.0;
    c.alpha = 2.0;
    c.batman.prediction_tau = 4.0;
  }
}

}  // namespace

const char* to_string(Environment e) { return e == Environment::Rural ? "rural" : "urban"; }

const char* to_string(FamilyKind f) {
  switch (f) {
    case FamilyKind::Throughput: return "throughput";
    case FamilyKind::HopCount: return "hopcount";
    case FamilyKind::Distance: return "distance";
    case FamilyKind::Predictive: return "predictive";
  }
  return "?";
}

FamilyKind parse_family(const std::string& name) {
  if (name == "throughput") return FamilyKind::Throughput;
  if (name == "hopcount" || name == "hop_count") return FamilyKind::HopCount;
  if (name == "distance") return FamilyKind::Distance;
  if (name == "predictive" || name == "prediction") return FamilyKind::Predictive;
  throw ValidationError("metric.family", "expected throughput, hopcount, distance or predictive, got '" + name + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const KeySpec& s : key_specs()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : values) {
    if (k == key) {
      v = value;
      return;
    }
  }
  values.emplace_back(key, value);
}

std::optional<std::string> ConfigDocument::get(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  return std::nullopt;
}

ConfigDocument parse_config_text(const std::string& text, const std::string& origin) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = csv::trim(line.substr(0, eq));
    const std::string value = csv::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    }
    if (key.rfind("sweep.", 0) == 0) {
      const std::string target = key.substr(6);
      if (!find_spec(target)) throw ValidationError(key, "unknown configuration key");
      std::vector<std::string> vals;
      for (const auto& v : csv::split(value)) {
        const std::string t = csv::trim(v);
        if (t.empty()) throw ParseError(origin + ":" + std::to_string(lineno) + ": empty sweep value");
        vals.push_back(t);
      }
      doc.sweep.emplace_back(target, std::move(vals));
      continue;
    }
    if (!find_spec(key)) throw ValidationError(key, "unknown configuration key");
    doc.set(key, value);
  }
  return doc;
}

ConfigDocument parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ConfigDocument doc = parse_config_text(ss.str(), path.string());
  // Referenced files are resolved against the config's directory.
  for (auto& [k, v] : doc.values) {
    if ((k == "mobility.trace" || k == "channel.table") && std::filesystem::path(v).is_relative()) {
      v = (path.parent_path() / v).lexically_normal().string();
    }
  }
  return doc;
}

ScenarioConfig build_config(const ConfigDocument& doc) {
  ScenarioConfig cfg;
  const auto env = doc.get("scenario.environment");
  apply_preset(cfg, env ? parse_environment("scenario.environment", *env) : Environment::Rural);
  for (const auto& [key, value] : doc.values) {
    if (key == "scenario.environment") continue;
    const KeySpec* spec = find_spec(key);
    if (!spec) throw ValidationError(key, "unknown configuration key");
    spec->set(cfg, value);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) { return build_config(parse_config_file(path)); }

std::string dump_config(const ScenarioConfig& cfg) {
  std::string out;
  for (const KeySpec& s : key_specs()) {
    if (!s.get) continue;
    const std::string value = s.get(cfg);
    if (value.empty()) continue;  // unset file paths
    out += s.key + " = " + value + "\n";
  }
  return out;
}

SimTime ScenarioConfig::effective_traffic_stop() const {
  if (traffic_stop) return *traffic_stop;
  return duration > traffic_drain ? duration - traffic_drain : SimTime{};
}

void ScenarioConfig::validate() const {
  if (nodes < 2) throw ValidationError("sim.nodes", "need at least two nodes");
  if (duration.us() <= 0) throw ValidationError("sim.duration", "must be positive");
  if (seeds < 1) throw ValidationError("sim.seeds", "must be at least 1");
  if (max_runs < 1) throw ValidationError("sim.max_runs", "must be at least 1");
  if (!(playground.size.x > 0.0 && playground.size.y > 0.0 && playground.size.z >= 0.0)) {
    throw ValidationError("playground.x", "playground dimensions must be positive");
  }
  radio.validate();
  if (!(eta >= 2.0)) throw ValidationError("channel.eta", "must be at least 2");
  if (!(nakagami_m >= 0.5)) throw ValidationError("channel.nakagami_m", "must be at least 0.5");
  if (!(reference_distance > 0.0)) throw ValidationError("channel.reference_distance", "must be positive");
  if (channel == ChannelKind::Empirical) {
    if (empirical_table.empty()) throw ValidationError("channel.table", "required for the empirical channel");
    if (!std::filesystem::exists(empirical_table)) throw ValidationError("channel.table", "file not found: " + empirical_table.string());
  }
  mac.validate();
  batman.validate();
  if (!(alpha > 0.0)) throw ValidationError("metric.alpha", "must be positive");
  if (dmax && !(*dmax > 0.0)) throw ValidationError("metric.dmax", "must be positive");
  if (!(hop_penalty >= 0.0 && hop_penalty <= 1.0)) throw ValidationError("batman.hop_penalty", "must lie in [0, 1]");
  if (speed_min < 0.0) throw ValidationError("mobility.speed_min", "must not be negative");
  if (speed_max < speed_min) throw ValidationError("mobility.speed_max", "must not be below mobility.speed_min");
  if (pause_s < 0.0) throw ValidationError("mobility.pause", "must not be negative");
  if (mobility == MobilityKind::Trace) {
    if (trace.empty()) throw ValidationError("mobility.trace", "required for trace mobility");
    if (!std::filesystem::exists(trace)) throw ValidationError("mobility.trace", "file not found: " + trace.string());
  }
  if (mobility == MobilityKind::Static && topology == Topology::Grid) {
    if (grid_cols == 0 || nodes % grid_cols != 0) throw ValidationError("mobility.grid_cols", "must divide sim.nodes");
  }
  if (spacing_m && !(*spacing_m > 0.0)) throw ValidationError("mobility.spacing", "must be positive");
  if (!(spacing_dmax > 0.0)) throw ValidationError("mobility.spacing_dmax", "must be positive");
  if (streams < 1) throw ValidationError("traffic.streams", "must be at least 1");
  if (!(rate_bps > 0.0)) throw ValidationError("traffic.rate_bps", "must be positive");
  if (packet_size == 0) throw ValidationError("traffic.packet_size", "must be positive");
  if (source && *source >= nodes) throw ValidationError("traffic.source", "node id out of range");
  if (destination && *destination >= nodes) throw ValidationError("traffic.destination", "node id out of range");
  if (source && destination && *source == *destination) {
    throw ValidationError("traffic.destination", "must differ from traffic.source");
  }
  const SimTime stop = effective_traffic_stop();
  if (stop > duration) throw ValidationError("traffic.stop", "beyond sim.duration");
  if (!(traffic_start < stop)) throw ValidationError("traffic.start", "must precede traffic.stop");
}

ChannelModel make_channel(const ScenarioConfig& cfg) {
  switch (cfg.channel) {
    case ChannelKind::Friis:
      return ChannelModel(FriisGeneralized{cfg.eta}, cfg.radio.carrier_hz, cfg.reference_distance);
    case ChannelKind::Nakagami:
      return ChannelModel(Nakagami{cfg.nakagami_m, cfg.eta}, cfg.radio.carrier_hz, cfg.reference_distance);
    case ChannelKind::Empirical:
      return ChannelModel(load_empirical_table(cfg.empirical_table), cfg.radio.carrier_hz, cfg.reference_distance);
  }
  throw std::logic_error("unknown channel kind");
}

double resolve_dmax(const ScenarioConfig& cfg) {
  return cfg.dmax ? *cfg.dmax : configure_dmax(make_channel(cfg), cfg.radio);
}

MetricFamily make_family(const ScenarioConfig& cfg) {
  MetricFamily family;
  switch (cfg.family) {
    case FamilyKind::Throughput:
      family = ThroughputMetric{cfg.hop_penalty, cfg.mac.phy_rate_bps};
      break;
    case FamilyKind::HopCount:
      family = HopCountMetric{cfg.hop_penalty};
      break;
    case FamilyKind::Distance:
      family = DistanceMetric{cfg.alpha, resolve_dmax(cfg), cfg.compose_link};
      break;
    case FamilyKind::Predictive:
      family = PredictiveMetric{cfg.alpha, resolve_dmax(cfg), cfg.batman.prediction_tau, cfg.compose_link};
      break;
  }
  validate(family);
  return family;
}

std::unique_ptr<MobilityModel> make_mobility(const ScenarioConfig& cfg, std::uint64_t seed) {
  switch (cfg.mobility) {
    case MobilityKind::RandomWaypoint:
      return std::make_unique<RandomWaypointMobility>(
          cfg.nodes, RandomWaypointConfig{cfg.playground, cfg.speed_min, cfg.speed_max, cfg.pause_s}, seed);
    case MobilityKind::Trace: {
      auto trace = TraceFile::load(cfg.trace);
      if (trace.node_count() != cfg.nodes) {
        throw ValidationError("sim.nodes", "trace has " + std::to_string(trace.node_count()) + " nodes");
      }
      return std::make_unique<TraceMobility>(std::move(trace));
    }
    case MobilityKind::Static: {
      const double spacing = cfg.spacing_m ? *cfg.spacing_m : cfg.spacing_dmax * resolve_dmax(cfg);
      switch (cfg.topology) {
        case Topology::Line: return std::make_unique<StaticMobility>(line_topology(cfg.nodes, spacing));
        case Topology::Ring: return std::make_unique<StaticMobility>(ring_topology(cfg.nodes, spacing));
        case Topology::Grid:
          return std::make_unique<StaticMobility>(grid_topology(cfg.nodes / cfg.grid_cols, cfg.grid_cols, spacing));
      }
    }
  }
  throw std::logic_error("unknown mobility kind");
}

}  // namespace batsim
