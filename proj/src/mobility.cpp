#include "batsim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "batsim/csv.hpp"
#include "batsim/errors.hpp"

namespace batsim {

std::vector<Vec3> line_topology(std::size_t nodes, double spacing) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < nodes; ++i) out.push_back({spacing * static_cast<double>(i), 0.0, 0.0});
  return out;
}

std::vector<Vec3> ring_topology(std::size_t nodes, double spacing) {
  std::vector<Vec3> out;
  if (nodes < 3) return line_topology(nodes, spacing);
  const double radius = spacing / (2.0 * std::sin(std::numbers::pi / static_cast<double>(nodes)));
  for (std::size_t i = 0; i < nodes; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nodes);
    out.push_back({radius + radius * std::cos(a), radius + radius * std::sin(a), 0.0});
  }
  return out;
}

std::vector<Vec3> grid_topology(std::size_t rows, std::size_t cols, double spacing) {
  std::vector<Vec3> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.push_back({spacing * static_cast<double>(c), spacing * static_cast<double>(r), 0.0});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random waypoint

Vec3 RandomWaypointMobility::Leg::at(double t) const {
  if (t >= arrive) return to;
  if (t <= depart) return from;
  return from + (to - from) * ((t - depart) / (arrive - depart));
}

Waypoint RandomWaypointMobility::step_random_waypoint(const RandomWaypointConfig& cfg, RngStream& rng) {
  Waypoint w;
  w.position = {rng.uniform(0.0, cfg.playground.size.x), rng.uniform(0.0, cfg.playground.size.y),
                rng.uniform(0.0, cfg.playground.size.z)};
  w.speed = cfg.speed_min == cfg.speed_max ? cfg.speed_min : rng.uniform(cfg.speed_min, cfg.speed_max);
  return w;
}

RandomWaypointMobility::Leg RandomWaypointMobility::next_leg(NodeTrack& track, const Vec3& from, double depart) {
  const Waypoint w = step_random_waypoint(cfg_, track.rng);
  Leg leg;
  leg.from = from;
  leg.to = w.position;
  leg.speed = w.speed;
  leg.depart = depart;
  if (w.speed <= 0.0) {
    // A node that does not move never reaches its destination.
    leg.to = from;
    leg.arrive = leg.leave = std::numeric_limits<double>::infinity();
    return leg;
  }
  leg.arrive = depart + distance(from, w.position) / w.speed;
  leg.leave = leg.arrive + cfg_.pause_s;
  return leg;
}

RandomWaypointMobility::RandomWaypointMobility(std::size_t nodes, RandomWaypointConfig cfg, std::uint64_t seed)
    : cfg_(cfg) {
  if (cfg_.speed_min < 0.0 || cfg_.speed_max < cfg_.speed_min) {
    throw ValidationError("mobility.speed_min", "speeds must satisfy 0 <= min <= max");
  }
  if (cfg_.pause_s < 0.0) throw ValidationError("mobility.pause", "must not be negative");
  nodes_.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    NodeTrack track{RngStream(seed, "mobility", i), {}};
    const Vec3 start = step_random_waypoint(cfg_, track.rng).position;
    Leg first = next_leg(track, start, 0.0);
    Leg second = next_leg(track, first.to, first.leave);
    track.legs.push_back(first);
    track.legs.push_back(second);
    nodes_.push_back(std::move(track));
  }
}

void RandomWaypointMobility::advance(NodeTrack& track, double t) {
  if (t < track.legs.front().depart) throw std::logic_error("random waypoint queried before the current leg");
  while (t >= track.legs.front().leave) {
    track.legs.pop_front();
    const Leg& last = track.legs.back();
    track.legs.push_back(next_leg(track, last.to, last.leave));
  }
}

Vec3 RandomWaypointMobility::position_at(NodeId node, SimTime t) {
  NodeTrack& track = nodes_.at(node);
  const double ts = t.seconds();
  advance(track, ts);
  return track.legs.front().at(ts);
}

Vec3 RandomWaypointMobility::predict_position(NodeId node, SimTime t, double tau) {
  NodeTrack& track = nodes_.at(node);
  const double ts = t.seconds();
  advance(track, ts);
  const double target = ts + tau;
  for (const Leg& leg : track.legs) {
    if (target < leg.leave) return leg.at(target);
  }
  // Beyond the known plan: stop at the last drawn waypoint.
  return track.legs.back().to;
}

// ---------------------------------------------------------------------------
// Traces

TraceFile::TraceFile(std::vector<std::vector<TraceFix>> fixes) : fixes_(std::move(fixes)) {
  if (fixes_.empty()) throw ParseError("trace contains no nodes");
  for (std::size_t n = 0; n < fixes_.size(); ++n) {
    const auto& f = fixes_[n];
    if (f.empty()) throw ParseError("trace has no fixes for node " + std::to_string(n));
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f[i].position.finite() || !std::isfinite(f[i].time_s)) {
        throw ParseError("non-finite fix for node " + std::to_string(n));
      }
      if (i > 0 && !(f[i].time_s > f[i - 1].time_s)) {
        throw OrderError("trace times must strictly increase for node " + std::to_string(n));
      }
    }
  }
}

TraceFile TraceFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace " + path.string());
  return parse(in, path.string());
}

TraceFile TraceFile::parse(std::istream& in, const std::string& origin) {
  std::string line;
  if (!csv::read_line(in, line) || csv::trim(line) != "node_id,time_s,x_m,y_m,z_m") {
    throw ParseError(origin + ": expected header 'node_id,time_s,x_m,y_m,z_m'");
  }
  std::map<long long, std::vector<TraceFix>> rows;
  int row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    const auto f = csv::split(line);
    if (f.size() != 5) throw ParseError(origin + ":" + std::to_string(row) + ": expected 5 fields");
    const long long id = csv::to_int(f[0], "node_id");
    if (id < 0) throw ParseError(origin + ":" + std::to_string(row) + ": negative node id");
    rows[id].push_back(TraceFix{csv::to_double(f[1], "time_s"),
                                {csv::to_double(f[2], "x_m"), csv::to_double(f[3], "y_m"), csv::to_double(f[4], "z_m")}});
  }
  std::vector<std::vector<TraceFix>> fixes;
  for (auto& [id, v] : rows) {
    if (id != static_cast<long long>(fixes.size())) {
      throw ParseError(origin + ": node ids must be contiguous from 0 (missing " + std::to_string(fixes.size()) + ")");
    }
    fixes.push_back(std::move(v));
  }
  return TraceFile(std::move(fixes));
}

void TraceFile::write(std::ostream& out) const {
  out << "node_id,time_s,x_m,y_m,z_m\n";
  char buf[160];
  for (std::size_t n = 0; n < fixes_.size(); ++n) {
    for (const TraceFix& f : fixes_[n]) {
      std::snprintf(buf, sizeof buf, "%zu,%.6f,%.4f,%.4f,%.4f\n", n, f.time_s, f.position.x, f.position.y,
                    f.position.z);
      out << buf;
    }
  }
}

Vec3 TraceMobility::interpolate(NodeId node, double t) const {
  const auto& f = trace_.fixes(node);
  if (t <= f.front().time_s) return f.front().position;
  if (t >= f.back().time_s) return f.back().position;
  auto hi = std::upper_bound(f.begin(), f.end(), t, [](double v, const TraceFix& x) { return v < x.time_s; });
  auto lo = hi - 1;
  const double w = (t - lo->time_s) / (hi->time_s - lo->time_s);
  return lo->position + (hi->position - lo->position) * w;
}

TraceFile generate_road_grid_trace(std::size_t nodes, const RoadGridConfig& cfg, std::uint64_t seed) {
  const auto cols = static_cast<long>(std::floor(cfg.playground.size.x / cfg.block_m));
  const auto rows = static_cast<long>(std::floor(cfg.playground.size.y / cfg.block_m));
  if (cols < 1 || rows < 1) throw ValidationError("trace.block_m", "larger than the playground");
  static constexpr int kDx[4] = {1, 0, -1, 0};
  static constexpr int kDy[4] = {0, 1, 0, -1};

  std::vector<std::vector<TraceFix>> fixes(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    RngStream rng(seed, "road-grid-trace", n);
    long ix = static_cast<long>(rng.uniform_int(0, static_cast<std::uint64_t>(cols)));
    long iy = static_cast<long>(rng.uniform_int(0, static_cast<std::uint64_t>(rows)));
    int heading = static_cast<int>(rng.uniform_int(0, 3));
    const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    const double z = 1.5;
    double t = 0.0;
    fixes[n].push_back({t, {ix * cfg.block_m, iy * cfg.block_m, z}});
    while (t < cfg.duration_s) {
      // Candidate headings: anything but a U-turn, unless at a dead end.
      std::vector<int> options;
      for (int h = 0; h < 4; ++h) {
        const long nx = ix + kDx[h];
        const long ny = iy + kDy[h];
        if (nx < 0 || ny < 0 || nx > cols || ny > rows) continue;
        if (h == (heading + 2) % 4) continue;
        options.push_back(h);
      }
      if (options.empty()) options.push_back((heading + 2) % 4);
      heading = options[rng.uniform_int(0, options.size() - 1)];
      ix += kDx[heading];
      iy += kDy[heading];
      t += cfg.block_m / speed;
      fixes[n].push_back({t, {ix * cfg.block_m, iy * cfg.block_m, z}});
    }
  }
  return TraceFile(std::move(fixes));
}

}  // namespace batsim
