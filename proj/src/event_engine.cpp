#include "batsim/event_engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "batsim/errors.hpp"

namespace batsim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TimerElapsed: return "TimerElapsed";
    case EventKind::FrameArrival: return "FrameArrival";
    case EventKind::FrameTxEnd: return "FrameTxEnd";
    case EventKind::MobilityUpdate: return "MobilityUpdate";
    case EventKind::TrafficEmit: return "TrafficEmit";
    case EventKind::StatsSample: return "StatsSample";
    case EventKind::RunEnd: return "RunEnd";
  }
  return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::uint64_t fnv_word(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

Scheduler::Scheduler() { report_.trace_hash = 0xcbf29ce484222325ull; }

EventHandle Scheduler::schedule(SimTime at, EventKind kind, NodeId target, Action action) {
  if (at < now_) {
    throw PastEvent("event at " + std::to_string(at.seconds()) + " s scheduled while clock is " +
                    std::to_string(now_.seconds()) + " s");
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push(Key{at.us(), seq});
  pending_.emplace(seq, Entry{kind, target, std::move(action)});
  ++scheduled_;
  return EventHandle{seq};
}

bool Scheduler::cancel(EventHandle handle) {
  if (pending_.erase(handle.seq) == 0) return false;
  ++report_.cancelled;
  return true;
}

void Scheduler::mix_trace(const Key& key, const Entry& entry) {
  std::uint64_t h = report_.trace_hash;
  h = fnv_word(h, static_cast<std::uint64_t>(key.at));
  h = fnv_word(h, key.seq);
  h = fnv_word(h, (static_cast<std::uint64_t>(entry.kind) << 32) | entry.target);
  report_.trace_hash = h;
}

RunReport Scheduler::run_until(SimTime end) {
  while (!heap_.empty() && heap_.top().at <= end.us()) {
    const Key key = heap_.top();
    heap_.pop();
    auto it = pending_.find(key.seq);
    if (it == pending_.end()) continue;  // cancelled
    Entry entry = std::move(it->second);
    pending_.erase(it);
    now_ = SimTime::from_us(key.at);
    ++report_.fired;
    ++report_.fired_by_kind[static_cast<std::size_t>(entry.kind)];
    mix_trace(key, entry);
    if (entry.action) entry.action();
  }
  if (now_ < end) now_ = end;
  report_.end = now_;
  return report_;
}

RngStream::RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index)
    : seed_(seed), engine_(splitmix64(splitmix64(seed ^ fnv1a64(purpose)) + splitmix64(index + 0x5851f42d4c957f2dull))) {}

double RngStream::uniform01() {
  // 53 high bits -> exact double in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return engine_();  // full 64-bit range
  // Rejection sampling for an unbiased draw.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + v % span;
}

double RngStream::standard_normal() {
  // Marsaglia polar method; the spare is discarded so the draw count per call
  // stays a function of the engine state alone.
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double RngStream::gamma(double shape, double scale) {
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with U^(1/shape).
    const double g = gamma(shape + 1.0, 1.0);
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return scale * g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

}  // namespace batsim
