#pragma once

#include <cstdint>

namespace batsim {

/// True when `a` is newer than `b` under 32-bit serial-number arithmetic.
constexpr bool seq_newer(std::uint32_t a, std::uint32_t b) { return static_cast<std::int32_t>(a - b) > 0; }

/// Sliding record of the last 64 sequence numbers seen from one originator.
class SequenceWindow {
 public:
  static constexpr std::uint32_t kWidth = 64;

  enum class Verdict { New, Duplicate, TooOld };

  Verdict check(std::uint32_t seq) const {
    if (!any_) return Verdict::New;
    const auto diff = static_cast<std::int32_t>(seq - last_);
    if (diff > 0) return Verdict::New;
    const auto back = static_cast<std::uint32_t>(-static_cast<std::int64_t>(diff));
    if (back >= kWidth) return Verdict::TooOld;
    return (bits_ >> back) & 1u ? Verdict::Duplicate : Verdict::New;
  }

  void mark(std::uint32_t seq) {
    if (!any_) {
      any_ = true;
      last_ = seq;
      bits_ = 1;
      return;
    }
    const auto diff = static_cast<std::int32_t>(seq - last_);
    if (diff > 0) {
      bits_ = static_cast<std::uint32_t>(diff) >= kWidth ? 0 : bits_ << diff;
      bits_ |= 1;
      last_ = seq;
    } else {
      const auto back = static_cast<std::uint32_t>(-static_cast<std::int64_t>(diff));
      if (back < kWidth) bits_ |= std::uint64_t{1} << back;
    }
  }

  bool empty() const { return !any_; }
  std::uint32_t latest() const { return last_; }
  std::uint64_t bits() const { return bits_; }

 private:
  bool any_ = false;
  std::uint32_t last_ = 0;
  std::uint64_t bits_ = 0;
};

}  // namespace batsim
