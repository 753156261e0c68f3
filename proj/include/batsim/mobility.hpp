#pragma once

#include <deque>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "batsim/event_engine.hpp"
#include "batsim/geometry.hpp"

namespace batsim {

class MobilityModel {
 public:
  virtual ~MobilityModel() = default;

  virtual std::size_t node_count() const = 0;
  virtual Vec3 position_at(NodeId node, SimTime t) = 0;
  /// Position after moving along the node's known future trajectory for tau
  /// seconds from t.
  virtual Vec3 predict_position(NodeId node, SimTime t, double tau) = 0;
};

class StaticMobility final : public MobilityModel {
 public:
  explicit StaticMobility(std::vector<Vec3> positions) : positions_(std::move(positions)) {}

  std::size_t node_count() const override { return positions_.size(); }
  Vec3 position_at(NodeId node, SimTime) override { return positions_.at(node); }
  Vec3 predict_position(NodeId node, SimTime, double) override { return positions_.at(node); }

 private:
  std::vector<Vec3> positions_;
};

std::vector<Vec3> line_topology(std::size_t nodes, double spacing);
/// Regular polygon whose adjacent vertices are `spacing` apart.
std::vector<Vec3> ring_topology(std::size_t nodes, double spacing);
std::vector<Vec3> grid_topology(std::size_t rows, std::size_t cols, double spacing);

struct RandomWaypointConfig {
  Playground playground;
  double speed_min = 10.0;
  double speed_max = 15.0;
  double pause_s = 0.0;
};

struct Waypoint {
  Vec3 position;
  double speed = 0.0;
};

/// Random waypoint with one waypoint drawn ahead, so the trajectory is
/// known at least up to the end of the following leg.
class RandomWaypointMobility final : public MobilityModel {
 public:
  RandomWaypointMobility(std::size_t nodes, RandomWaypointConfig cfg, std::uint64_t seed);

  std::size_t node_count() const override { return nodes_.size(); }
  /// Queries per node must not go back in time before the current leg.
  Vec3 position_at(NodeId node, SimTime t) override;
  Vec3 predict_position(NodeId node, SimTime t, double tau) override;

  /// Uniform destination in the playground and a speed in [min, max].
  static Waypoint step_random_waypoint(const RandomWaypointConfig& cfg, RngStream& rng);

  const RandomWaypointConfig& config() const { return cfg_; }

 private:
  struct Leg {
    Vec3 from;
    Vec3 to;
    double speed = 0.0;
    double depart = 0.0;
    double arrive = 0.0;  // end of travel
    double leave = 0.0;   // end of pause at `to`
    Vec3 at(double t) const;
  };
  struct NodeTrack {
    RngStream rng;
    std::deque<Leg> legs;  // current leg and the pre-drawn next one
  };

  Leg next_leg(NodeTrack& track, const Vec3& from, double depart);
  void advance(NodeTrack& track, double t);

  RandomWaypointConfig cfg_;
  std::vector<NodeTrack> nodes_;
};

struct TraceFix {
  double time_s = 0.0;
  Vec3 position;
};

/// Per-node position fixes, loaded from `node_id,time_s,x_m,y_m,z_m` CSV.
class TraceFile {
 public:
  explicit TraceFile(std::vector<std::vector<TraceFix>> fixes);

  static TraceFile load(const std::filesystem::path& path);
  static TraceFile parse(std::istream& in, const std::string& origin = "trace");
  void write(std::ostream& out) const;

  std::size_t node_count() const { return fixes_.size(); }
  const std::vector<TraceFix>& fixes(NodeId node) const { return fixes_.at(node); }

 private:
  std::vector<std::vector<TraceFix>> fixes_;
};

/// Piecewise-linear playback; clamps to the first and last fix.
class TraceMobility final : public MobilityModel {
 public:
  explicit TraceMobility(TraceFile trace) : trace_(std::move(trace)) {}

  std::size_t node_count() const override { return trace_.node_count(); }
  Vec3 position_at(NodeId node, SimTime t) override { return interpolate(node, t.seconds()); }
  Vec3 predict_position(NodeId node, SimTime t, double tau) override { return interpolate(node, t.seconds() + tau); }

  Vec3 interpolate(NodeId node, double t) const;

 private:
  TraceFile trace_;
};

struct RoadGridConfig {
  Playground playground{Vec3{1500.0, 1000.0, 10.0}};
  double block_m = 100.0;
  double speed_min = 8.0;
  double speed_max = 14.0;
  double duration_s = 300.0;
};

/// Synthetic road-constrained trace: vehicles drive along a Manhattan grid
/// and pick a random onward direction at each intersection.
TraceFile generate_road_grid_trace(std::size_t nodes, const RoadGridConfig& cfg, std::uint64_t seed);

}  // namespace batsim
