#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "batsim/batman.hpp"
#include "batsim/config.hpp"
#include "batsim/event_engine.hpp"
#include "batsim/mac.hpp"
#include "batsim/mobility.hpp"
#include "batsim/traffic.hpp"

namespace batsim {

struct RouteSnapshot {
  SimTime time;
  NodeId node = 0;
  RouteEntry route;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::string scenario;
  std::string family;
  KpiRow kpi;
  RunReport report;
  MacStats mac;
  BatmanStats routing;  // summed over nodes
  std::vector<RouteSnapshot> routes;
};

/// One seeded run of a scenario: nodes, medium, mobility and CBR streams
/// wired to a single scheduler.
class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, std::uint64_t seed);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Fires every event up to `t`; `t` must not exceed the run duration.
  void advance_to(SimTime t);
  /// Runs to the configured duration and collects the KPIs.
  RunResult run();

  SimTime now() const { return scheduler_.now(); }
  std::size_t node_count() const { return nodes_.size(); }
  BatmanNode& node(NodeId id) { return *nodes_.at(id); }
  const BatmanNode& node(NodeId id) const { return *nodes_.at(id); }
  Medium& medium() { return *medium_; }
  Scheduler& scheduler() { return scheduler_; }
  MobilityModel& mobility() { return *mobility_; }
  const KpiAccumulator& kpi() const { return kpi_; }
  const ScenarioConfig& config() const { return cfg_; }
  double dmax() const { return dmax_; }
  /// Resolved (source, destination) of every stream.
  const std::vector<std::pair<NodeId, NodeId>>& streams() const { return streams_; }

 private:
  void setup_traffic();
  void emit(std::size_t stream);
  void dump_routes();
  void on_receive(NodeId receiver, const Frame& frame);
  void on_unicast_done(const Frame& frame, bool delivered, DeliveryOutcome last, int attempts);

  ScenarioConfig cfg_;
  std::uint64_t seed_;
  double dmax_ = 0.0;
  Scheduler scheduler_;
  std::unique_ptr<MobilityModel> mobility_;
  std::unique_ptr<Medium> medium_;
  std::vector<std::unique_ptr<BatmanNode>> nodes_;
  KpiAccumulator kpi_;
  std::vector<std::pair<NodeId, NodeId>> streams_;
  SimTime stream_gap_;
  SimTime traffic_stop_;
  std::uint64_t next_packet_id_ = 1;
  std::vector<RouteSnapshot> routes_;
  bool finished_ = false;
};

}  // namespace batsim
