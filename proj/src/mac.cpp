#include "batsim/mac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "batsim/errors.hpp"

namespace batsim {

void MacConfig::validate() const {
  if (!(phy_rate_bps > 0.0)) throw ValidationError("mac.phy_rate_bps", "must be positive");
  if (max_backoff.us() < 1) throw ValidationError("mac.max_backoff_us", "must be at least 1 us");
  if (unicast_retries < 0) throw ValidationError("mac.retries", "must not be negative");
  if (queue_cap == 0) throw ValidationError("mac.queue_cap", "must be positive");
}

SimTime airtime(const MacConfig& cfg, std::size_t frame_bytes) {
  if (frame_bytes == 0) throw std::invalid_argument("frame must not be empty");
  const double payload_us = 8.0 * static_cast<double>(frame_bytes) / cfg.phy_rate_bps * 1e6;
  return cfg.per_frame_overhead + SimTime::from_us(std::llround(payload_us));
}

const char* to_string(DeliveryOutcome outcome) {
  switch (outcome) {
    case DeliveryOutcome::Received: return "Received";
    case DeliveryOutcome::BelowSensitivity: return "BelowSensitivity";
    case DeliveryOutcome::Collided: return "Collided";
  }
  return "?";
}

Medium::Medium(Scheduler& scheduler, MacConfig mac, ChannelModel channel, RadioConfig radio,
               std::size_t node_count, PositionFn positions, std::uint64_t seed)
    : scheduler_(scheduler),
      mac_(mac),
      channel_(std::move(channel)),
      radio_(radio),
      positions_(std::move(positions)),
      fading_(seed, "channel-fading") {
  mac_.validate();
  nodes_.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    nodes_.push_back(NodeState{{}, false, false, RngStream(seed, "mac-backoff", i)});
  }
}

EnqueueResult Medium::try_send(NodeId node, Frame frame) {
  NodeState& st = nodes_.at(node);
  const auto type = static_cast<std::size_t>(frame.type());
  if (st.queue.size() >= mac_.queue_cap) {
    ++stats_.queue_drops[type];
    if (queue_drop_) queue_drop_(node, frame);
    return EnqueueResult::QueueOverflow;
  }
  ++stats_.enqueued[type];
  frame.src = node;
  st.queue.push_back(Queued{std::move(frame), 0});
  if (!st.transmitting && !st.attempt_scheduled) attempt(node);
  return EnqueueResult::Enqueued;
}

SimTime Medium::draw_backoff(NodeId node) {
  const auto max_us = static_cast<std::uint64_t>(mac_.max_backoff.us());
  return SimTime::from_us(static_cast<std::int64_t>(nodes_[node].backoff.uniform_int(1, max_us)));
}

std::optional<SimTime> Medium::sensed_busy_until(NodeId node) const {
  const SimTime now = scheduler_.now();
  std::optional<SimTime> busy;
  for (const Transmission& tx : recent_) {
    if (tx.sender == node || tx.start > now || tx.end <= now) continue;
    if (tx.rx_power_dbm[node] < radio_.rx_sensitivity_dbm) continue;
    if (!busy || tx.end > *busy) busy = tx.end;
  }
  return busy;
}

void Medium::schedule_attempt(NodeId node, SimTime at) {
  nodes_[node].attempt_scheduled = true;
  scheduler_.schedule(at, EventKind::TimerElapsed, node, [this, node] {
    nodes_[node].attempt_scheduled = false;
    attempt(node);
  });
}

void Medium::attempt(NodeId node) {
  NodeState& st = nodes_[node];
  if (st.transmitting || st.queue.empty()) return;
  if (const auto busy = sensed_busy_until(node)) {
    ++stats_.deferrals;
    schedule_attempt(node, *busy + draw_backoff(node));
    return;
  }
  start_transmission(node);
}

void Medium::start_transmission(NodeId node) {
  NodeState& st = nodes_[node];
  Queued& head = st.queue.front();
  ++head.attempts;
  const SimTime now = scheduler_.now();

  Transmission tx;
  tx.id = next_tx_id_++;
  tx.sender = node;
  tx.frame = head.frame;
  tx.start = now;
  tx.end = now + airtime(mac_, head.frame.bytes);
  tx.attempt = head.attempts;
  tx.rx_power_dbm.assign(nodes_.size(), -std::numeric_limits<double>::infinity());
  const Vec3 origin = positions_(node, now);
  const double d0 = channel_.reference_distance();
  for (NodeId r = 0; r < nodes_.size(); ++r) {
    if (r == node) continue;
    const double d = std::max(distance(origin, positions_(r, now)), d0);
    tx.rx_power_dbm[r] = received_power(channel_, radio_, d, fading_);
  }
  ++stats_.transmissions[static_cast<std::size_t>(tx.frame.type())];
  st.transmitting = true;
  const std::uint64_t id = tx.id;
  scheduler_.schedule(tx.end, EventKind::FrameTxEnd, node, [this, id] { finish_transmission(id); });
  recent_.push_back(std::move(tx));
}

Transmission& Medium::find(std::uint64_t id) {
  auto it = std::lower_bound(recent_.begin(), recent_.end(), id,
                             [](const Transmission& t, std::uint64_t v) { return t.id < v; });
  if (it == recent_.end() || it->id != id) throw std::logic_error("transmission record already pruned");
  return *it;
}

DeliveryOutcome Medium::deliver(const Transmission& tx, NodeId receiver) const {
  const double sens = radio_.rx_sensitivity_dbm;
  if (tx.rx_power_dbm[receiver] < sens) return DeliveryOutcome::BelowSensitivity;
  for (const Transmission& other : recent_) {
    if (other.id == tx.id) continue;
    if (!(other.start < tx.end && other.end > tx.start)) continue;
    // Half duplex: a receiver busy sending misses the frame.
    if (other.sender == receiver) return DeliveryOutcome::Collided;
    if (other.rx_power_dbm[receiver] >= sens) return DeliveryOutcome::Collided;
  }
  return DeliveryOutcome::Received;
}

void Medium::arrive(NodeId receiver, const Frame& frame) {
  scheduler_.schedule(scheduler_.now(), EventKind::FrameArrival, receiver, [this, receiver, frame] {
    if (receive_) receive_(receiver, frame);
  });
}

void Medium::finish_transmission(std::uint64_t tx_id) {
  Transmission& tx = find(tx_id);
  tx.finished = true;
  const NodeId sender = tx.sender;
  NodeState& st = nodes_[sender];
  st.transmitting = false;

  if (tx.frame.is_broadcast()) {
    for (NodeId r = 0; r < nodes_.size(); ++r) {
      if (r == sender) continue;
      const DeliveryOutcome out = deliver(tx, r);
      if (out == DeliveryOutcome::Received) {
        ++stats_.received;
        arrive(r, tx.frame);
      } else if (out == DeliveryOutcome::Collided) {
        ++stats_.collided;
      }
    }
    st.queue.pop_front();
  } else {
    const DeliveryOutcome out = deliver(tx, tx.frame.dst);
    if (out == DeliveryOutcome::Received) {
      ++stats_.received;
      arrive(tx.frame.dst, tx.frame);
      Queued done = std::move(st.queue.front());
      st.queue.pop_front();
      if (unicast_done_) unicast_done_(done.frame, true, out, done.attempts);
    } else {
      if (out == DeliveryOutcome::Collided) {
        ++stats_.collided;
      } else {
        ++stats_.below_sensitivity;
      }
      if (st.queue.front().attempts > mac_.unicast_retries) {
        ++stats_.unicast_failures;
        Queued done = std::move(st.queue.front());
        st.queue.pop_front();
        if (unicast_done_) unicast_done_(done.frame, false, out, done.attempts);
      }
    }
  }
  prune();
  // Post-transmission backoff before the next queued frame.
  if (!st.queue.empty() && !st.attempt_scheduled && !st.transmitting) {
    schedule_attempt(sender, scheduler_.now() + draw_backoff(sender));
  }
}

void Medium::prune() {
  // A finished frame matters for collisions only while an unfinished one
  // overlaps it.
  SimTime horizon = scheduler_.now();
  for (const Transmission& tx : recent_) {
    if (!tx.finished) horizon = std::min(horizon, tx.start);
  }
  while (!recent_.empty() && recent_.front().finished && recent_.front().end <= horizon) recent_.pop_front();
}

}  // namespace batsim
