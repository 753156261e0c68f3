#pragma once

#include <array>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "batsim/event_engine.hpp"
#include "batsim/frame.hpp"
#include "batsim/radio_channel.hpp"

namespace batsim {

/// Lumped 802.11g-like medium parameters.
struct MacConfig {
  double phy_rate_bps = 54e6;
  SimTime per_frame_overhead = SimTime::from_us(100);  // preamble, SIFS/DIFS, ACK
  SimTime max_backoff = SimTime::from_us(300);
  int unicast_retries = 7;
  std::size_t queue_cap = 100;

  void validate() const;
};

/// overhead + 8 * bytes / phy_rate, rounded to the microsecond.
SimTime airtime(const MacConfig& cfg, std::size_t frame_bytes);

enum class DeliveryOutcome : std::uint8_t { Received, BelowSensitivity, Collided };
enum class EnqueueResult : std::uint8_t { Enqueued, QueueOverflow };

const char* to_string(DeliveryOutcome outcome);

/// One frame on the air. Received power at every node is drawn once at the
/// start, with positions frozen at that instant.
struct Transmission {
  std::uint64_t id = 0;
  NodeId sender = 0;
  Frame frame;
  SimTime start;
  SimTime end;
  int attempt = 1;
  std::vector<double> rx_power_dbm;
  bool finished = false;
};

struct MacStats {
  static constexpr std::size_t kTypes = 4;
  std::array<std::uint64_t, kTypes> enqueued{};
  std::array<std::uint64_t, kTypes> transmissions{};
  std::array<std::uint64_t, kTypes> queue_drops{};
  std::uint64_t received = 0;
  std::uint64_t collided = 0;
  std::uint64_t below_sensitivity = 0;
  std::uint64_t unicast_failures = 0;
  std::uint64_t deferrals = 0;
};

/// Shared broadcast channel: carrier sensing with random backoff, collision
/// resolution per receiver, unicast retransmission.
class Medium {
 public:
  using PositionFn = std::function<Vec3(NodeId, SimTime)>;
  using ReceiveFn = std::function<void(NodeId receiver, const Frame& frame)>;
  /// Called once per unicast frame when it is delivered or given up on.
  using UnicastDoneFn = std::function<void(const Frame& frame, bool delivered, DeliveryOutcome last, int attempts)>;
  using DropFn = std::function<void(NodeId node, const Frame& frame)>;

  Medium(Scheduler& scheduler, MacConfig mac, ChannelModel channel, RadioConfig radio, std::size_t node_count,
         PositionFn positions, std::uint64_t seed);

  void on_receive(ReceiveFn fn) { receive_ = std::move(fn); }
  void on_unicast_done(UnicastDoneFn fn) { unicast_done_ = std::move(fn); }
  void on_queue_drop(DropFn fn) { queue_drop_ = std::move(fn); }

  /// Queues a frame; starts it at once if the node is idle and senses an
  /// idle medium, otherwise defers beyond the busy period plus backoff.
  EnqueueResult try_send(NodeId node, Frame frame);

  /// Reception verdict of a transmission at one receiver.
  DeliveryOutcome deliver(const Transmission& tx, NodeId receiver) const;

  /// End of the longest ongoing transmission this node can sense, if any.
  std::optional<SimTime> sensed_busy_until(NodeId node) const;

  bool transmitting(NodeId node) const { return nodes_[node].transmitting; }
  std::size_t queue_length(NodeId node) const { return nodes_[node].queue.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  const MacStats& stats() const { return stats_; }
  const MacConfig& config() const { return mac_; }
  const RadioConfig& radio() const { return radio_; }
  const ChannelModel& channel() const { return channel_; }

  /// Transmissions still retained for collision checks; oldest first.
  const std::deque<Transmission>& recent_transmissions() const { return recent_; }

 private:
  struct Queued {
    Frame frame;
    int attempts = 0;
  };
  struct NodeState {
    std::deque<Queued> queue;
    bool transmitting = false;
    bool attempt_scheduled = false;
    RngStream backoff;
  };

  void attempt(NodeId node);
  void schedule_attempt(NodeId node, SimTime at);
  void start_transmission(NodeId node);
  void finish_transmission(std::uint64_t tx_id);
  void arrive(NodeId receiver, const Frame& frame);
  SimTime draw_backoff(NodeId node);
  Transmission& find(std::uint64_t id);
  void prune();

  Scheduler& scheduler_;
  MacConfig mac_;
  ChannelModel channel_;
  RadioConfig radio_;
  PositionFn positions_;
  RngStream fading_;
  std::vector<NodeState> nodes_;
  std::deque<Transmission> recent_;
  std::uint64_t next_tx_id_ = 1;
  MacStats stats_;
  ReceiveFn receive_;
  UnicastDoneFn unicast_done_;
  DropFn queue_drop_;
};

}  // namespace batsim
