#include "batsim/radio_channel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "batsim/csv.hpp"
#include "batsim/errors.hpp"

namespace batsim {

void RadioConfig::validate() const {
  if (!(carrier_hz > 0.0)) throw ValidationError("radio.frequency_hz", "must be positive");
  if (!(rx_sensitivity_dbm < tx_power_dbm)) {
    throw ValidationError("radio.sensitivity_dbm", "must be below the transmission power");
  }
}

EmpiricalTable::EmpiricalTable(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ParseError("empirical table needs at least two points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].distance_m > 0.0)) throw ParseError("empirical table distances must be positive");
    if (i == 0) continue;
    if (!(points_[i].distance_m > points_[i - 1].distance_m)) {
      throw OrderError("empirical table distances must be strictly ascending");
    }
    if (points_[i].attenuation_db < points_[i - 1].attenuation_db) {
      throw OrderError("empirical table attenuation must not decrease with distance");
    }
  }
}

double EmpiricalTable::attenuation_at(double distance_m) const {
  const double ld = std::log10(distance_m);
  std::size_t i = 0;
  if (distance_m >= points_.back().distance_m) {
    i = points_.size() - 2;
  } else {
    while (i + 2 < points_.size() && distance_m >= points_[i + 1].distance_m) ++i;
  }
  const Point& a = points_[i];
  const Point& b = points_[i + 1];
  const double la = std::log10(a.distance_m);
  const double lb = std::log10(b.distance_m);
  return a.attenuation_db + (b.attenuation_db - a.attenuation_db) * (ld - la) / (lb - la);
}

EmpiricalTable load_empirical_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open empirical table " + path.string());
  std::string line;
  if (!csv::read_line(in, line) || csv::trim(line) != "distance_m,attenuation_db") {
    throw ParseError(path.string() + ": expected header 'distance_m,attenuation_db'");
  }
  std::vector<EmpiricalTable::Point> points;
  int row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    const auto fields = csv::split(line);
    if (fields.size() != 2) {
      throw ParseError(path.string() + ":" + std::to_string(row) + ": expected 2 fields");
    }
    points.push_back({csv::to_double(fields[0], "distance_m"), csv::to_double(fields[1], "attenuation_db")});
  }
  return EmpiricalTable(std::move(points));
}

ChannelModel::ChannelModel(Variant variant, double carrier_hz, double reference_distance_m)
    : variant_(std::move(variant)), carrier_hz_(carrier_hz), reference_distance_(reference_distance_m) {
  if (!(carrier_hz_ > 0.0)) throw ValidationError("radio.frequency_hz", "must be positive");
  if (!(reference_distance_ > 0.0)) throw ValidationError("channel.reference_distance", "must be positive");
  if (const auto* n = std::get_if<Nakagami>(&variant_); n && n->m < 0.5) {
    throw ValidationError("channel.nakagami_m", "must be at least 0.5");
  }
}

double free_space_loss_db(double distance_m, double carrier_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * carrier_hz / kSpeedOfLight);
}

namespace {

double log_distance_loss(const ChannelModel& model, double eta, double d) {
  const double d0 = model.reference_distance();
  return free_space_loss_db(d0, model.carrier_hz()) + 10.0 * eta * std::log10(d / d0);
}

}  // namespace

double path_loss(const ChannelModel& model, double distance_m) {
  if (distance_m == 0.0) throw ZeroDistance("path loss undefined at zero distance");
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be positive");
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, EmpiricalTable>) {
          return v.attenuation_at(distance_m);
        } else {
          return log_distance_loss(model, v.eta, distance_m);
        }
      },
      model.variant());
}

double mean_received_power(const ChannelModel& model, const RadioConfig& cfg, double distance_m) {
  return cfg.tx_power_dbm + cfg.tx_gain_dbi + cfg.rx_gain_dbi - path_loss(model, distance_m);
}

double received_power(const ChannelModel& model, const RadioConfig& cfg, double distance_m, RngStream& rng) {
  const double mean = mean_received_power(model, cfg, distance_m);
  if (const auto* n = std::get_if<Nakagami>(&model.variant())) {
    // Power of a Nakagami-m envelope is Gamma(m, 1/m): unit mean multiplier.
    const double fade = rng.gamma(n->m, 1.0 / n->m);
    return mean + 10.0 * std::log10(fade);
  }
  return mean;
}

double max_range(const ChannelModel& model, const RadioConfig& cfg) {
  const double d0 = model.reference_distance();
  const double budget = cfg.tx_power_dbm + cfg.tx_gain_dbi + cfg.rx_gain_dbi - cfg.rx_sensitivity_dbm;
  if (path_loss(model, d0) > budget) {
    throw NoSolution("receiver sensitivity not met even at the reference distance");
  }
  const auto closed_form = [&](double eta) {
    return d0 * std::pow(10.0, (budget - free_space_loss_db(d0, model.carrier_hz())) / (10.0 * eta));
  };
  if (const auto* f = std::get_if<FriisGeneralized>(&model.variant())) return closed_form(f->eta);
  if (const auto* n = std::get_if<Nakagami>(&model.variant())) return closed_form(n->eta);

  // Monotone mean curve: bracket, then bisect to 1 mm.
  constexpr double kTolerance = 0.001;
  constexpr double kCeiling = 1e7;
  double lo = d0;
  double hi = std::max(2.0 * d0, std::get<EmpiricalTable>(model.variant()).points().back().distance_m);
  while (path_loss(model, hi) <= budget) {
    lo = hi;
    hi *= 2.0;
    if (hi > kCeiling) throw NoSolution("empirical channel never drops below the receiver sensitivity");
  }
  while (hi - lo > kTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (path_loss(model, mid) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace batsim
