#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "batsim/batman.hpp"
#include "batsim/mac.hpp"
#include "batsim/mobility.hpp"
#include "batsim/radio_channel.hpp"
#include "batsim/routing_metrics.hpp"
#include "batsim/traffic.hpp"

namespace batsim {

enum class Environment { Rural, Urban };
enum class ChannelKind { Friis, Nakagami, Empirical };
enum class MobilityKind { RandomWaypoint, Trace, Static };
enum class FamilyKind { Throughput, HopCount, Distance, Predictive };
enum class Topology { Line, Ring, Grid };

/// Complete description of one simulated scenario. Defaults follow the
/// generic rural setup: 10 nodes, 300 s, 25 seeds, OGM 0.33 s, ELP 0.2 s,
/// -83 dBm sensitivity, path loss exponent 2.65.
struct ScenarioConfig {
  std::string name = "generic";
  Environment environment = Environment::Rural;
  std::size_t nodes = 10;
  SimTime duration = SimTime::from_us(300'000'000);
  std::size_t seeds = 25;
  std::uint64_t base_seed = 1;
  std::size_t max_runs = 20000;
  Playground playground;

  RadioConfig radio;
  ChannelKind channel = ChannelKind::Friis;
  double eta = 2.65;
  double nakagami_m = 2.0;
  double reference_distance = 1.0;
  std::filesystem::path empirical_table;

  MacConfig mac;
  BatmanConfig batman;

  FamilyKind family = FamilyKind::Throughput;
  double alpha = 1.0;
  std::optional<double> dmax;  // unset: derived from the channel
  bool compose_link = false;
  double hop_penalty = kDefaultHopPenalty;

  MobilityKind mobility = MobilityKind::RandomWaypoint;
  double speed_min = 10.0;
  double speed_max = 15.0;
  double pause_s = 0.0;
  std::filesystem::path trace;
  Topology topology = Topology::Line;
  std::size_t grid_cols = 4;
  std::optional<double> spacing_m;
  double spacing_dmax = 0.6;

  std::size_t streams = 1;
  std::optional<NodeId> source;
  std::optional<NodeId> destination;
  double rate_bps = 10e6;
  std::size_t packet_size = 1250;
  SimTime traffic_start = SimTime::from_us(30'000'000);
  std::optional<SimTime> traffic_stop;  // unset: duration minus drain
  SimTime traffic_drain = SimTime::from_us(1'000'000);

  SimTime route_dump_interval;  // zero: no dump

  /// Throws ValidationError naming the offending key.
  void validate() const;

  double tau() const { return batman.prediction_tau; }
  SimTime effective_traffic_stop() const;
};

/// Parsed configuration text: plain assignments plus sweep axes
/// (`sweep.<key> = v1, v2, ...`), both in file order.
struct ConfigDocument {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;

  /// Replaces an existing assignment or appends a new one.
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
};

/// Throws ParseError on malformed lines and ValidationError on unknown keys.
ConfigDocument parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigDocument parse_config_file(const std::filesystem::path& path);

/// Applies the environment preset, then every assignment, then validates.
ScenarioConfig build_config(const ConfigDocument& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` text covering every setting; reloading it yields
/// the same ScenarioConfig.
std::string dump_config(const ScenarioConfig& cfg);

/// Every accepted key, in canonical order.
const std::vector<std::string>& config_keys();

const char* to_string(Environment e);
const char* to_string(FamilyKind f);
FamilyKind parse_family(const std::string& name);

ChannelModel make_channel(const ScenarioConfig& cfg);
/// Resolves d_max (explicit or from the channel) into the family.
MetricFamily make_family(const ScenarioConfig& cfg);
double resolve_dmax(const ScenarioConfig& cfg);
std::unique_ptr<MobilityModel> make_mobility(const ScenarioConfig& cfg, std::uint64_t seed);

}  // namespace batsim
