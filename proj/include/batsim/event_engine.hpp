#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "batsim/sim_time.hpp"

namespace batsim {

using NodeId = std::uint32_t;
inline constexpr NodeId kGlobalTarget = 0xffffffffu;

enum class EventKind : std::uint8_t {
  TimerElapsed,
  FrameArrival,
  FrameTxEnd,
  MobilityUpdate,
  TrafficEmit,
  StatsSample,
  RunEnd,
};
inline constexpr std::size_t kEventKindCount = 7;

const char* to_string(EventKind kind);

struct EventHandle {
  std::uint64_t seq = 0;
};

/// Event counters and the trace hash of everything that fired.
struct RunReport {
  SimTime end;
  std::uint64_t fired = 0;
  std::uint64_t cancelled = 0;
  std::array<std::uint64_t, kEventKindCount> fired_by_kind{};
  std::uint64_t trace_hash = 0;

  bool operator==(const RunReport&) const = default;
};

/// Time-ordered event queue and simulation clock. Ties on fire time are
/// broken by insertion order.
class Scheduler {
 public:
  using Action = std::function<void()>;

  Scheduler();

  SimTime now() const { return now_; }

  /// Throws PastEvent when `at` precedes the clock.
  EventHandle schedule(SimTime at, EventKind kind, NodeId target, Action action);
  EventHandle schedule_in(SimTime delay, EventKind kind, NodeId target, Action action) {
    return schedule(now_ + delay, kind, target, std::move(action));
  }

  /// True iff the event was still pending.
  bool cancel(EventHandle handle);
  bool is_pending(EventHandle handle) const { return pending_.contains(handle.seq); }

  /// Fires every event with fire time <= end, then sets the clock to end.
  RunReport run_until(SimTime end);

  std::size_t pending() const { return pending_.size(); }
  std::uint64_t scheduled() const { return scheduled_; }
  std::uint64_t fired() const { return report_.fired; }
  std::uint64_t cancelled() const { return report_.cancelled; }
  std::uint64_t trace_hash() const { return report_.trace_hash; }
  const RunReport& report() const { return report_; }

 private:
  struct Entry {
    EventKind kind;
    NodeId target;
    Action action;
  };
  struct Key {
    std::int64_t at;
    std::uint64_t seq;
    bool operator>(const Key& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };

  void mix_trace(const Key& key, const Entry& entry);

  SimTime now_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t scheduled_ = 0;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap_;
  std::unordered_map<std::uint64_t, Entry> pending_;
  RunReport report_;
};

/// Named pseudo-random substream of a run seed. Two streams with the same
/// (seed, purpose, index) produce the same draws; different labels are
/// decorrelated through a SplitMix64 finalizer. Distributions are computed
/// here rather than with <random> distributions, whose output is not
/// specified across standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform01();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [lo, hi].
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  double standard_normal();
  /// Gamma(shape, scale) via Marsaglia and Tsang.
  double gamma(double shape, double scale);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace batsim
