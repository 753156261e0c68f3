#include "batsim/routing_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "batsim/errors.hpp"

namespace batsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double distance_penalty(double d, double dmax, double alpha) { return std::pow(d / dmax, alpha); }

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error(std::string(what) + " outside [0, 1]");
}

}  // namespace

void validate(const MetricFamily& family) {
  const auto penalty = [](double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("batman.hop_penalty", "must lie in [0, 1]");
  };
  const auto geo = [](double alpha, double dmax) {
    if (!(alpha > 0.0)) throw ValidationError("metric.alpha", "must be positive");
    if (!(dmax > 0.0)) throw ValidationError("metric.dmax", "must be positive");
  };
  std::visit(Overloaded{
                 [&](const ThroughputMetric& m) {
                   penalty(m.hop_penalty);
                   if (!(m.phy_rate_max_bps > 0.0)) throw ValidationError("mac.phy_rate_bps", "must be positive");
                 },
                 [&](const HopCountMetric& m) { penalty(m.hop_penalty); },
                 [&](const DistanceMetric& m) { geo(m.alpha, m.dmax); },
                 [&](const PredictiveMetric& m) {
                   geo(m.alpha, m.dmax);
                   if (!(m.tau > 0.0)) throw ValidationError("metric.tau", "must be positive");
                 },
             },
             family);
}

std::string_view family_name(const MetricFamily& family) {
  return std::visit(Overloaded{
                        [](const ThroughputMetric&) { return std::string_view("throughput"); },
                        [](const HopCountMetric&) { return std::string_view("hopcount"); },
                        [](const DistanceMetric&) { return std::string_view("distance"); },
                        [](const PredictiveMetric&) { return std::string_view("predictive"); },
                    },
                    family);
}

bool uses_delivery_ratio(const MetricFamily& family) {
  return std::visit(Overloaded{
                        [](const ThroughputMetric&) { return true; },
                        [](const HopCountMetric&) { return false; },
                        [](const DistanceMetric& m) { return m.compose_link; },
                        [](const PredictiveMetric& m) { return m.compose_link; },
                    },
                    family);
}

double link_sample(const MetricFamily& family, const LinkObservation& obs) {
  return std::visit(Overloaded{
                        [&](const ThroughputMetric& m) {
                          return clamp01(obs.delivery_ratio * obs.phy_rate_bps / m.phy_rate_max_bps);
                        },
                        [&](const HopCountMetric&) { return 1.0; },
                        [&](const DistanceMetric& m) {
                          if (!obs.has_position) throw MissingPosition("neighbor announced no position");
                          return m.compose_link ? clamp01(obs.delivery_ratio) : 1.0;
                        },
                        [&](const PredictiveMetric& m) {
                          if (!obs.has_position) throw MissingPosition("neighbor announced no position");
                          return m.compose_link ? clamp01(obs.delivery_ratio) : 1.0;
                        },
                    },
                    family);
}

double theta(const MetricFamily& family, double path_metric, double link_metric, const LinkObservation& obs) {
  check_unit(path_metric, "path metric");
  check_unit(link_metric, "link metric");
  return std::visit(
      Overloaded{
          [&](const ThroughputMetric& m) { return clamp01(std::min(path_metric, link_metric) - m.hop_penalty); },
          [&](const HopCountMetric& m) { return clamp01(path_metric - m.hop_penalty); },
          [&](const DistanceMetric& m) {
            const double v = clamp01(path_metric - distance_penalty(obs.distance_m, m.dmax, m.alpha));
            return m.compose_link ? std::min(v, link_metric) : v;
          },
          [&](const PredictiveMetric& m) {
            const double now = distance_penalty(obs.distance_m, m.dmax, m.alpha);
            const double ahead = distance_penalty(obs.predicted_distance_m, m.dmax, m.alpha);
            const double v = clamp01(path_metric - std::max(now, ahead));
            return m.compose_link ? std::min(v, link_metric) : v;
          },
      },
      family);
}

double configure_dmax(const ChannelModel& channel, const RadioConfig& radio) { return max_range(channel, radio); }

MetricFamily with_dmax(MetricFamily family, double dmax) {
  if (auto* d = std::get_if<DistanceMetric>(&family)) d->dmax = dmax;
  if (auto* p = std::get_if<PredictiveMetric>(&family)) p->dmax = dmax;
  return family;
}

}  // namespace batsim
