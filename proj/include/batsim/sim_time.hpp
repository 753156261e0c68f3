#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace batsim {

/// Simulation time as fixed-point microseconds. Never negative.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t us) {
    if (us < 0) throw std::invalid_argument("SimTime must not be negative");
    return SimTime(us);
  }
  static SimTime from_seconds(double s) {
    if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("SimTime must be finite and non-negative");
    return SimTime(std::llround(s * 1e6));
  }
  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t us() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime d) const { return SimTime(us_ + d.us_); }
  constexpr SimTime& operator+=(SimTime d) {
    us_ += d.us_;
    return *this;
  }
  /// Difference of two instants; throws if it would be negative.
  constexpr SimTime operator-(SimTime d) const { return from_us(us_ - d.us_); }

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

constexpr SimTime operator""_us(unsigned long long v) { return SimTime::from_us(static_cast<std::int64_t>(v)); }
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::from_us(static_cast<std::int64_t>(v) * 1000); }
constexpr SimTime operator""_s(unsigned long long v) { return SimTime::from_us(static_cast<std::int64_t>(v) * 1000000); }

}  // namespace batsim
