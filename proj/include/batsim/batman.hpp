#pragma once

#include <array>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "batsim/event_engine.hpp"
#include "batsim/frame.hpp"
#include "batsim/mac.hpp"
#include "batsim/mobility.hpp"
#include "batsim/routing_metrics.hpp"
#include "batsim/sequence_window.hpp"
#include "batsim/traffic.hpp"

namespace batsim {

struct BatmanConfig {
  SimTime ogm_interval = SimTime::from_us(330'000);
  SimTime elp_interval = SimTime::from_us(200'000);
  /// Periodic emissions land uniformly within +/- this of the interval.
  SimTime emission_jitter = SimTime::from_us(20'000);
  /// OGM rebroadcasts wait uniformly in [0, this].
  SimTime rebroadcast_jitter = SimTime::from_us(20'000);
  int ttl = 32;
  double ewma_weight = 0.3;
  std::size_t elp_bytes = 40;
  std::size_t ogm_bytes = 24;
  std::size_t data_header_bytes = 10;
  bool probing = false;
  std::size_t probe_bytes = 200;
  int probes_per_neighbor = 2;
  std::size_t delivery_window = 10;
  int hop_limit = 64;
  /// A candidate lagging the newest sequence number by this much is stale.
  std::uint32_t max_orig_diff = 5;
  SimTime originator_timeout = SimTime::from_us(3'300'000);
  /// Lookahead of the position prediction announced in ELPs.
  double prediction_tau = 3.0;

  SimTime neighbor_timeout() const { return SimTime::from_us(3 * elp_interval.us() + emission_jitter.us()); }
  void validate() const;
};

/// Exponentially weighted moving average step.
constexpr double ewma_update(double previous, double sample, double weight) {
  return (1.0 - weight) * previous + weight * sample;
}

struct NeighborRecord {
  NodeId neighbor = 0;
  double link_metric = 0.0;  // EWMA-smoothed, normalized
  SimTime last_seen;
  std::uint32_t first_elp_seq = 0;
  std::uint32_t last_elp_seq = 0;
  std::uint64_t elp_received = 0;  // bit i: ELP (last - i) was heard
  Vec3 last_position;
  Vec3 last_predicted_position;
  bool has_position = false;
  std::deque<double> probe_samples;  // 1 / attempts on success, 0 on failure

  /// Fraction of the last `window` ELP sequence numbers heard.
  double delivery_ratio(std::size_t window) const;
};

struct Candidate {
  double metric = 0.0;
  std::uint32_t last_seq = 0;
  SimTime updated;
};

struct OriginatorRecord {
  NodeId originator = 0;
  std::map<NodeId, Candidate> candidates;
  std::optional<NodeId> best_next_hop;
  SequenceWindow seq_window;
  std::optional<std::uint32_t> last_forwarded_seq;
  SimTime last_update;
};

enum class OgmOutcome : std::uint8_t {
  Updated,
  Rebroadcast,
  DroppedDuplicate,
  DroppedTtl,
  DroppedSelf,
  DroppedUnknownForwarder,
};
inline constexpr std::size_t kOgmOutcomes = 6;
const char* to_string(OgmOutcome outcome);

enum class ForwardResult : std::uint8_t { Delivered, Forwarded, NoRoute, HopLimit, QueueOverflow };

struct BatmanStats {
  std::uint64_t elp_sent = 0;
  std::uint64_t elp_received = 0;
  std::uint64_t probes_sent = 0;
  std::uint64_t ogm_originated = 0;
  std::uint64_t ogm_rebroadcast = 0;
  std::uint64_t missing_position = 0;
  std::uint64_t neighbors_purged = 0;
  std::array<std::uint64_t, kOgmOutcomes> ogm_outcomes{};
};

struct RouteEntry {
  NodeId destination = 0;
  NodeId next_hop = 0;
  double metric = 0.0;
};

/// Protocol state of one node. Decision logic only sees normalized metrics;
/// raw uint32 values exist only inside OGM frames.
class BatmanNode {
 public:
  using DataSink = std::function<void(const DataPacket&)>;
  using DataDrop = std::function<void(const DataPacket&, DropReason)>;

  BatmanNode(NodeId id, const BatmanConfig& cfg, MetricFamily family, Scheduler& scheduler, Medium& medium,
             MobilityModel& mobility, std::uint64_t seed);

  void on_data_delivered(DataSink fn) { sink_ = std::move(fn); }
  void on_data_dropped(DataDrop fn) { drop_ = std::move(fn); }

  /// Schedules the first ELP and OGM at a random phase of their intervals.
  void start();

  void emit_elp();
  void emit_ogm();
  void on_elp(const ElpMessage& msg);
  OgmOutcome on_ogm(const OgmMessage& msg, NodeId forwarder);
  void on_probe_result(NodeId neighbor, bool delivered, int attempts);

  std::optional<NodeId> next_hop(NodeId destination) const;
  ForwardResult forward_data(DataPacket packet);

  /// Drops neighbors silent for longer than the purge timeout together with
  /// every route candidate through them.
  void purge_neighbors();

  NodeId id() const { return id_; }
  bool neighbor_alive(NodeId neighbor) const;
  const NeighborRecord* neighbor(NodeId n) const;
  const std::map<NodeId, NeighborRecord>& neighbors() const { return neighbors_; }
  const OriginatorRecord* originator(NodeId o) const;
  const std::map<NodeId, OriginatorRecord>& originators() const { return originators_; }
  std::vector<RouteEntry> routing_table() const;
  const BatmanStats& stats() const { return stats_; }
  const MetricFamily& family() const { return family_; }
  std::uint32_t ogm_seq() const { return ogm_seq_; }

  /// What this node currently knows about the link to `neighbor`.
  LinkObservation observe(const NeighborRecord& neighbor);

 private:
  SimTime jittered(SimTime interval);
  void select_best(OriginatorRecord& rec) const;
  void consider_switch(OriginatorRecord& rec, NodeId forwarder) const;
  bool candidate_eligible(const OriginatorRecord& rec, NodeId hop, const Candidate& c) const;
  void rebroadcast(OgmMessage msg);

  NodeId id_;
  BatmanConfig cfg_;
  MetricFamily family_;
  Scheduler& scheduler_;
  Medium& medium_;
  MobilityModel& mobility_;
  RngStream jitter_;
  std::uint32_t elp_seq_ = 0;
  std::uint32_t ogm_seq_ = 0;
  std::uint32_t probe_seq_ = 0;
  std::map<NodeId, NeighborRecord> neighbors_;
  std::map<NodeId, OriginatorRecord> originators_;
  BatmanStats stats_;
  DataSink sink_;
  DataDrop drop_;
};

}  // namespace batsim
