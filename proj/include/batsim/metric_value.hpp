#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace batsim {

/// Path metric as carried on the wire: uint32 where 2^32 - 1 is best.
/// Protocol logic works on the normalized [0, 1] form.
class MetricValue {
 public:
  static constexpr std::uint32_t kMaxRaw = 0xffffffffu;

  constexpr MetricValue() = default;
  constexpr explicit MetricValue(std::uint32_t raw) : raw_(raw) {}

  static constexpr MetricValue best() { return MetricValue(kMaxRaw); }

  /// Rounds to the nearest raw unit; input must lie in [0, 1].
  static MetricValue from_normalized(double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("normalized metric outside [0, 1]");
    return MetricValue(static_cast<std::uint32_t>(std::llround(v * static_cast<double>(kMaxRaw))));
  }

  constexpr std::uint32_t raw() const { return raw_; }
  constexpr double normalized() const { return static_cast<double>(raw_) / static_cast<double>(kMaxRaw); }

  constexpr auto operator<=>(const MetricValue&) const = default;

 private:
  std::uint32_t raw_ = 0;
};

}  // namespace batsim
