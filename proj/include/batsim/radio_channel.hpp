#pragma once

#include <filesystem>
#include <variant>
#include <vector>

#include "batsim/event_engine.hpp"

namespace batsim {

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadioConfig {
  double tx_power_dbm = 20.0;
  double carrier_hz = 2.4e9;
  double rx_sensitivity_dbm = -83.0;
  double tx_gain_dbi = 0.0;
  double rx_gain_dbi = 0.0;

  /// Throws ValidationError.
  void validate() const;
};

/// Log-distance path loss anchored at the free-space loss at the reference
/// distance. eta = 2 is the classical Friis model.
struct FriisGeneralized {
  double eta = 2.65;
};

/// Nakagami-m fading on top of the FriisGeneralized mean curve.
struct Nakagami {
  double m = 2.0;
  double eta = 2.65;
};

/// Measured mean attenuation, interpolated linearly in dB over log-distance.
class EmpiricalTable {
 public:
  struct Point {
    double distance_m;
    double attenuation_db;
  };

  /// Throws ParseError for fewer than two points, OrderError when distances
  /// are not strictly ascending or attenuation decreases.
  explicit EmpiricalTable(std::vector<Point> points);

  const std::vector<Point>& points() const { return points_; }

  /// Outside the table the nearest end segment's slope is extrapolated.
  double attenuation_at(double distance_m) const;

 private:
  std::vector<Point> points_;
};

/// Reads `distance_m,attenuation_db` CSV.
EmpiricalTable load_empirical_table(const std::filesystem::path& path);

class ChannelModel {
 public:
  using Variant = std::variant<FriisGeneralized, Nakagami, EmpiricalTable>;

  ChannelModel(Variant variant, double carrier_hz = 2.4e9, double reference_distance_m = 1.0);

  const Variant& variant() const { return variant_; }
  double carrier_hz() const { return carrier_hz_; }
  double reference_distance() const { return reference_distance_; }
  bool is_random() const { return std::holds_alternative<Nakagami>(variant_); }

 private:
  Variant variant_;
  double carrier_hz_;
  double reference_distance_;
};

/// Free-space loss 20 log10(4 pi d f / c).
double free_space_loss_db(double distance_m, double carrier_hz);

/// Mean path loss in dB. Throws ZeroDistance for d == 0.
double path_loss(const ChannelModel& model, double distance_m);

/// Mean received power without fading.
double mean_received_power(const ChannelModel& model, const RadioConfig& cfg, double distance_m);

/// Received power with one fading draw for Nakagami models. Deterministic
/// models leave `rng` untouched.
double received_power(const ChannelModel& model, const RadioConfig& cfg, double distance_m, RngStream& rng);

/// Largest distance whose mean received power meets the receiver
/// sensitivity. Throws NoSolution if even the reference distance fails.
double max_range(const ChannelModel& model, const RadioConfig& cfg);

}  // namespace batsim
