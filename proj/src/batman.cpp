#include "batsim/batman.hpp"

#include <bit>
#include <numeric>

#include "batsim/errors.hpp"

namespace batsim {

void BatmanConfig::validate() const {
  if (ogm_interval.us() <= 0) throw ValidationError("batman.ogm_interval", "must be positive");
  if (elp_interval.us() <= 0) throw ValidationError("batman.elp_interval", "must be positive");
  if (emission_jitter >= elp_interval || emission_jitter >= ogm_interval) {
    throw ValidationError("batman.jitter", "must be shorter than the ELP and OGM intervals");
  }
  if (ttl < 1) throw ValidationError("batman.ttl", "must be at least 1");
  if (!(ewma_weight > 0.0 && ewma_weight <= 1.0)) throw ValidationError("batman.ewma_weight", "must lie in (0, 1]");
  if (elp_bytes == 0 || ogm_bytes == 0 || probe_bytes == 0) throw ValidationError("batman.elp_size", "frame sizes must be positive");
  if (delivery_window == 0 || delivery_window > 64) throw ValidationError("batman.delivery_window", "must lie in [1, 64]");
  if (probes_per_neighbor < 0) throw ValidationError("batman.probes_per_neighbor", "must not be negative");
  if (hop_limit < 1) throw ValidationError("batman.hop_limit", "must be at least 1");
  if (max_orig_diff == 0) throw ValidationError("batman.max_orig_diff", "must be positive");
  if (!(prediction_tau > 0.0)) throw ValidationError("metric.tau", "must be positive");
}

const char* to_string(OgmOutcome outcome) {
  switch (outcome) {
    case OgmOutcome::Updated: return "Updated";
    case OgmOutcome::Rebroadcast: return "Rebroadcast";
    case OgmOutcome::DroppedDuplicate: return "DroppedDuplicate";
    case OgmOutcome::DroppedTtl: return "DroppedTtl";
    case OgmOutcome::DroppedSelf: return "DroppedSelf";
    case OgmOutcome::DroppedUnknownForwarder: return "DroppedUnknownForwarder";
  }
  return "?";
}

double NeighborRecord::delivery_ratio(std::size_t window) const {
  const std::uint64_t span = std::min<std::uint64_t>(window, std::uint64_t{last_elp_seq - first_elp_seq} + 1);
  const std::uint64_t mask = span >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << span) - 1;
  return static_cast<double>(std::popcount(elp_received & mask)) / static_cast<double>(span);
}

BatmanNode::BatmanNode(NodeId id, const BatmanConfig& cfg, MetricFamily family, Scheduler& scheduler,
                       Medium& medium, MobilityModel& mobility, std::uint64_t seed)
    : id_(id),
      cfg_(cfg),
      family_(std::move(family)),
      scheduler_(scheduler),
      medium_(medium),
      mobility_(mobility),
      jitter_(seed, "routing-jitter", id) {}

SimTime BatmanNode::jittered(SimTime interval) {
  const std::int64_t j = cfg_.emission_jitter.us();
  const auto offset = static_cast<std::int64_t>(jitter_.uniform_int(0, static_cast<std::uint64_t>(2 * j)));
  return SimTime::from_us(interval.us() - j + offset);
}

void BatmanNode::start() {
  const auto elp_phase = jitter_.uniform_int(0, static_cast<std::uint64_t>(cfg_.elp_interval.us() - 1));
  const auto ogm_phase = jitter_.uniform_int(0, static_cast<std::uint64_t>(cfg_.ogm_interval.us() - 1));
  scheduler_.schedule_in(SimTime::from_us(static_cast<std::int64_t>(elp_phase)), EventKind::TimerElapsed, id_,
                         [this] { emit_elp(); });
  scheduler_.schedule_in(SimTime::from_us(static_cast<std::int64_t>(ogm_phase)), EventKind::TimerElapsed, id_,
                         [this] { emit_ogm(); });
}

void BatmanNode::emit_elp() {
  purge_neighbors();
  const SimTime now = scheduler_.now();
  ElpMessage msg;
  msg.sender = id_;
  msg.seq = ++elp_seq_;
  msg.interval_s = cfg_.elp_interval.seconds();
  msg.position = mobility_.position_at(id_, now);
  msg.predicted_position = mobility_.predict_position(id_, now, cfg_.prediction_tau);
  medium_.try_send(id_, Frame{id_, kBroadcast, cfg_.elp_bytes, msg});
  ++stats_.elp_sent;

  if (cfg_.probing) {
    for (const auto& [nid, rec] : neighbors_) {
      for (int i = 0; i < cfg_.probes_per_neighbor; ++i) {
        medium_.try_send(id_, Frame{id_, nid, cfg_.probe_bytes, ElpProbe{id_, ++probe_seq_}});
        ++stats_.probes_sent;
      }
    }
  }
  scheduler_.schedule_in(jittered(cfg_.elp_interval), EventKind::TimerElapsed, id_, [this] { emit_elp(); });
}

void BatmanNode::emit_ogm() {
  OgmMessage msg;
  msg.originator = id_;
  msg.seq = ++ogm_seq_;
  msg.reverse_path_metric = MetricValue::best();
  msg.ttl = cfg_.ttl;
  medium_.try_send(id_, Frame{id_, kBroadcast, cfg_.ogm_bytes, msg});
  ++stats_.ogm_originated;
  scheduler_.schedule_in(jittered(cfg_.ogm_interval), EventKind::TimerElapsed, id_, [this] { emit_ogm(); });
}

LinkObservation BatmanNode::observe(const NeighborRecord& nb) {
  LinkObservation obs;
  if (cfg_.probing && !nb.probe_samples.empty()) {
    obs.delivery_ratio = std::accumulate(nb.probe_samples.begin(), nb.probe_samples.end(), 0.0) /
                         static_cast<double>(nb.probe_samples.size());
  } else {
    obs.delivery_ratio = nb.delivery_ratio(cfg_.delivery_window);
  }
  obs.phy_rate_bps = medium_.config().phy_rate_bps;
  obs.has_position = nb.has_position;
  if (nb.has_position) {
    const SimTime now = scheduler_.now();
    obs.distance_m = distance(mobility_.position_at(id_, now), nb.last_position);
    obs.predicted_distance_m =
        distance(mobility_.predict_position(id_, now, cfg_.prediction_tau), nb.last_predicted_position);
  }
  return obs;
}

void BatmanNode::on_elp(const ElpMessage& msg) {
  ++stats_.elp_received;
  auto [it, fresh] = neighbors_.try_emplace(msg.sender);
  NeighborRecord& nb = it->second;
  if (fresh) {
    nb.neighbor = msg.sender;
    nb.first_elp_seq = nb.last_elp_seq = msg.seq;
    nb.elp_received = 1;
  } else if (seq_newer(msg.seq, nb.last_elp_seq)) {
    const std::uint32_t shift = msg.seq - nb.last_elp_seq;
    nb.elp_received = shift >= 64 ? 0 : nb.elp_received << shift;
    nb.elp_received |= 1;
    nb.last_elp_seq = msg.seq;
  } else {
    return;  // stale or repeated beacon
  }
  nb.last_seen = scheduler_.now();
  nb.has_position = msg.has_position;
  nb.last_position = msg.position;
  nb.last_predicted_position = msg.predicted_position;

  double sample = 0.0;
  try {
    sample = link_sample(family_, observe(nb));
  } catch (const MissingPosition&) {
    ++stats_.missing_position;
    return;
  }
  nb.link_metric = fresh ? sample : ewma_update(nb.link_metric, sample, cfg_.ewma_weight);
}

void BatmanNode::on_probe_result(NodeId neighbor, bool delivered, int attempts) {
  auto it = neighbors_.find(neighbor);
  if (it == neighbors_.end()) return;
  auto& samples = it->second.probe_samples;
  samples.push_back(delivered ? 1.0 / static_cast<double>(std::max(attempts, 1)) : 0.0);
  while (samples.size() > cfg_.delivery_window) samples.pop_front();
}

bool BatmanNode::neighbor_alive(NodeId n) const {
  auto it = neighbors_.find(n);
  if (it == neighbors_.end()) return false;
  return scheduler_.now() - it->second.last_seen <= cfg_.neighbor_timeout();
}

const NeighborRecord* BatmanNode::neighbor(NodeId n) const {
  auto it = neighbors_.find(n);
  return it == neighbors_.end() ? nullptr : &it->second;
}

const OriginatorRecord* BatmanNode::originator(NodeId o) const {
  auto it = originators_.find(o);
  return it == originators_.end() ? nullptr : &it->second;
}

bool BatmanNode::candidate_eligible(const OriginatorRecord& rec, NodeId hop, const Candidate& c) const {
  return neighbor_alive(hop) && rec.seq_window.latest() - c.last_seq < cfg_.max_orig_diff;
}

void BatmanNode::select_best(OriginatorRecord& rec) const {
  std::optional<NodeId> best;
  double best_metric = -1.0;
  for (const auto& [hop, c] : rec.candidates) {
    if (!candidate_eligible(rec, hop, c)) continue;
    if (c.metric > best_metric || (c.metric == best_metric && rec.best_next_hop == hop)) {
      best = hop;
      best_metric = c.metric;
    }
  }
  rec.best_next_hop = best;
}

void BatmanNode::consider_switch(OriginatorRecord& rec, NodeId forwarder) const {
  // Only the neighbor that just delivered an OGM may take over the route;
  // re-ranking every candidate would let stale echoes of our own
  // announcements win whenever the current link dips.
  const auto current = rec.best_next_hop ? rec.candidates.find(*rec.best_next_hop) : rec.candidates.end();
  if (current == rec.candidates.end() || !candidate_eligible(rec, current->first, current->second)) {
    select_best(rec);
    return;
  }
  if (current->first == forwarder) return;
  const Candidate& challenger = rec.candidates.at(forwarder);
  if (challenger.metric > current->second.metric) rec.best_next_hop = forwarder;
}

OgmOutcome BatmanNode::on_ogm(const OgmMessage& msg, NodeId forwarder) {
  const auto done = [this](OgmOutcome o) {
    ++stats_.ogm_outcomes[static_cast<std::size_t>(o)];
    return o;
  };
  if (msg.originator == id_) return done(OgmOutcome::DroppedSelf);
  auto nb_it = neighbors_.find(forwarder);
  if (nb_it == neighbors_.end() || !neighbor_alive(forwarder)) return done(OgmOutcome::DroppedUnknownForwarder);

  OriginatorRecord& rec = originators_[msg.originator];
  rec.originator = msg.originator;
  const auto verdict = rec.seq_window.check(msg.seq);
  if (verdict == SequenceWindow::Verdict::TooOld) return done(OgmOutcome::DroppedDuplicate);
  auto cand_it = rec.candidates.find(forwarder);
  if (cand_it != rec.candidates.end() && !seq_newer(msg.seq, cand_it->second.last_seq)) {
    return done(OgmOutcome::DroppedDuplicate);
  }

  const SimTime now = scheduler_.now();
  const double path =
      theta(family_, msg.reverse_path_metric.normalized(), nb_it->second.link_metric, observe(nb_it->second));
  rec.candidates[forwarder] = Candidate{path, msg.seq, now};
  rec.seq_window.mark(msg.seq);
  rec.last_update = now;
  consider_switch(rec, forwarder);

  const bool forward_now =
      rec.best_next_hop == forwarder && (!rec.last_forwarded_seq || seq_newer(msg.seq, *rec.last_forwarded_seq));
  if (forward_now) {
    if (msg.ttl <= 1) return done(OgmOutcome::DroppedTtl);
    rec.last_forwarded_seq = msg.seq;
    OgmMessage out = msg;
    out.reverse_path_metric = MetricValue::from_normalized(path);
    out.ttl = msg.ttl - 1;
    rebroadcast(out);
    return done(OgmOutcome::Rebroadcast);
  }
  return done(verdict == SequenceWindow::Verdict::New ? OgmOutcome::Updated : OgmOutcome::DroppedDuplicate);
}

void BatmanNode::rebroadcast(OgmMessage msg) {
  ++stats_.ogm_rebroadcast;
  const auto delay = jitter_.uniform_int(0, static_cast<std::uint64_t>(cfg_.rebroadcast_jitter.us()));
  scheduler_.schedule_in(SimTime::from_us(static_cast<std::int64_t>(delay)), EventKind::TimerElapsed, id_,
                         [this, msg] { medium_.try_send(id_, Frame{id_, kBroadcast, cfg_.ogm_bytes, msg}); });
}

std::optional<NodeId> BatmanNode::next_hop(NodeId destination) const {
  const OriginatorRecord* rec = originator(destination);
  if (!rec) return std::nullopt;
  if (scheduler_.now() - rec->last_update > cfg_.originator_timeout) return std::nullopt;
  if (rec->best_next_hop) {
    const auto it = rec->candidates.find(*rec->best_next_hop);
    if (it != rec->candidates.end() && candidate_eligible(*rec, it->first, it->second)) return rec->best_next_hop;
  }
  std::optional<NodeId> best;
  double best_metric = -1.0;
  for (const auto& [hop, c] : rec->candidates) {
    if (candidate_eligible(*rec, hop, c) && c.metric > best_metric) {
      best = hop;
      best_metric = c.metric;
    }
  }
  return best;
}

ForwardResult BatmanNode::forward_data(DataPacket packet) {
  if (packet.destination == id_) {
    if (sink_) sink_(packet);
    return ForwardResult::Delivered;
  }
  if (packet.hops >= cfg_.hop_limit) {
    if (drop_) drop_(packet, DropReason::HopLimit);
    return ForwardResult::HopLimit;
  }
  const auto hop = next_hop(packet.destination);
  if (!hop) {
    if (drop_) drop_(packet, DropReason::NoRoute);
    return ForwardResult::NoRoute;
  }
  ++packet.hops;
  const std::size_t bytes = packet.bytes + cfg_.data_header_bytes;
  if (medium_.try_send(id_, Frame{id_, *hop, bytes, packet}) == EnqueueResult::QueueOverflow) {
    if (drop_) drop_(packet, DropReason::QueueOverflow);
    return ForwardResult::QueueOverflow;
  }
  return ForwardResult::Forwarded;
}

void BatmanNode::purge_neighbors() {
  for (auto it = neighbors_.begin(); it != neighbors_.end();) {
    if (neighbor_alive(it->first)) {
      ++it;
      continue;
    }
    const NodeId gone = it->first;
    it = neighbors_.erase(it);
    ++stats_.neighbors_purged;
    for (auto& [orig, rec] : originators_) {
      if (rec.candidates.erase(gone) > 0 && rec.best_next_hop == gone) select_best(rec);
    }
  }
}

std::vector<RouteEntry> BatmanNode::routing_table() const {
  std::vector<RouteEntry> out;
  for (const auto& [dest, rec] : originators_) {
    if (const auto hop = next_hop(dest)) out.push_back({dest, *hop, rec.candidates.at(*hop).metric});
  }
  return out;
}

}  // namespace batsim
