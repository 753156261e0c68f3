#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>

#include "batsim/event_engine.hpp"
#include "batsim/geometry.hpp"
#include "batsim/metric_value.hpp"

namespace batsim {

inline constexpr NodeId kBroadcast = 0xffffffffu;

/// Periodic one-hop beacon. Carries the sender's position and its own
/// predicted position after the configured lookahead.
struct ElpMessage {
  NodeId sender = 0;
  std::uint32_t seq = 0;
  double interval_s = 0.2;
  Vec3 position;
  Vec3 predicted_position;
  bool has_position = true;
};

/// Unicast ELP used only to generate traffic for throughput estimation.
struct ElpProbe {
  NodeId sender = 0;
  std::uint32_t seq = 0;
};

struct OgmMessage {
  NodeId originator = 0;
  std::uint32_t seq = 0;
  MetricValue reverse_path_metric = MetricValue::best();
  int ttl = 32;
};

struct DataPacket {
  std::uint64_t id = 0;
  NodeId source = 0;
  NodeId destination = 0;
  SimTime sent_at;
  std::size_t bytes = 0;
  int hops = 0;
};

enum class FrameType : std::uint8_t { Elp, ElpProbe, Ogm, Data };

struct Frame {
  NodeId src = 0;
  NodeId dst = kBroadcast;
  std::size_t bytes = 0;
  std::variant<ElpMessage, ElpProbe, OgmMessage, DataPacket> payload;

  bool is_broadcast() const { return dst == kBroadcast; }
  FrameType type() const { return static_cast<FrameType>(payload.index()); }
};

}  // namespace batsim
