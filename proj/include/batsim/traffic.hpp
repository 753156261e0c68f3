#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "batsim/event_engine.hpp"

namespace batsim {

/// Constant-bitrate UDP-like stream. Unset endpoints are drawn at random.
struct StreamSpec {
  std::optional<NodeId> source;
  std::optional<NodeId> destination;
  double rate_bps = 10e6;
  std::size_t packet_size = 1250;
  SimTime start = SimTime::from_us(30'000'000);
  SimTime stop = SimTime::from_us(299'000'000);

  void validate() const;
};

/// Inter-packet gap 8 * packet_size / rate, in whole microseconds.
SimTime cbr_interval(const StreamSpec& stream);

/// Emission instants in [start, stop); empty when stop <= start.
std::vector<SimTime> cbr_emission_times(const StreamSpec& stream);

enum class DropReason : std::uint8_t { NoRoute, Collision, BelowSensitivity, QueueOverflow, HopLimit };
inline constexpr std::size_t kDropReasons = 5;

/// One run's KPIs. Optional fields are NA when undefined.
struct KpiRow {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::optional<double> pdr;
  std::optional<double> mean_delay_s;
  double data_rate_bps = 0.0;
  std::uint64_t drops_noroute = 0;
  std::uint64_t drops_collision = 0;
  std::uint64_t drops_sensitivity = 0;
  std::uint64_t drops_queue = 0;
  std::uint64_t drops_hop_limit = 0;
  std::uint64_t duplicates = 0;
};

class KpiAccumulator {
 public:
  void record_sent(std::uint64_t packet_id, SimTime sent_at, std::size_t bytes);
  /// Throws UnknownPacket for ids never recorded as sent. Repeat deliveries
  /// count once and bump the duplicate counter.
  void record_delivery(std::uint64_t packet_id, SimTime sent_at, SimTime received_at);
  void record_drop(std::uint64_t packet_id, DropReason reason);

  std::uint64_t sent() const { return sent_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t dropped(DropReason reason) const { return drops_[static_cast<std::size_t>(reason)]; }
  std::uint64_t dropped_total() const;
  std::uint64_t in_flight() const { return sent_ - delivered_ - dropped_total(); }
  std::uint64_t duplicates() const { return duplicates_; }
  const std::vector<double>& delay_samples() const { return delays_; }

  /// `measured_interval` is the traffic window used for the data rate.
  KpiRow finalize(SimTime measured_interval) const;

 private:
  enum class State : std::uint8_t { InFlight, Delivered, Dropped };
  struct Packet {
    State state = State::InFlight;
    std::size_t bytes = 0;
  };

  std::unordered_map<std::uint64_t, Packet> packets_;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t bytes_delivered_ = 0;
  std::uint64_t drops_[kDropReasons] = {};
  std::vector<double> delays_;
};

/// Mean and Student-t 95 % confidence half-width of one KPI across runs.
struct Estimate {
  double mean = 0.0;
  double ci95 = 0.0;
  std::size_t samples = 0;
};

struct AggregateResult {
  std::size_t runs = 0;
  std::optional<Estimate> pdr;
  std::optional<Estimate> mean_delay_s;
  Estimate data_rate_bps;
  Estimate drops_noroute;
  Estimate drops_collision;
  Estimate drops_sensitivity;
  Estimate drops_queue;
};

/// Two-sided 97.5 % Student-t quantile for `dof` degrees of freedom.
double student_t975(std::size_t dof);

/// Estimate over the given samples; needs at least two.
Estimate estimate(const std::vector<double>& samples);

/// Throws InsufficientRuns for fewer than two rows.
AggregateResult aggregate(const std::vector<KpiRow>& rows);

}  // namespace batsim
