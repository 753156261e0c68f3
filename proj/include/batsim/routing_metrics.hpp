#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "batsim/radio_channel.hpp"

namespace batsim {

inline constexpr double kDefaultHopPenalty = 1.0 / 255.0;

/// Native B.A.T.M.A.N. V metric: bottleneck of estimated link throughput.
struct ThroughputMetric {
  double hop_penalty = kDefaultHopPenalty;
  double phy_rate_max_bps = 54e6;
};

struct HopCountMetric {
  double hop_penalty = kDefaultHopPenalty;
};

/// Penalizes each hop by (d / d_max)^alpha of the current neighbor distance.
struct DistanceMetric {
  double alpha = 1.0;
  double dmax = 0.0;
  /// Also cap the result by the EWMA link metric (delivery-ratio based).
  bool compose_link = false;
};

/// Like DistanceMetric but uses the larger of the current and the
/// predicted distance after lookahead tau.
struct PredictiveMetric {
  double alpha = 1.0;
  double dmax = 0.0;
  double tau = 3.0;
  bool compose_link = false;
};

using MetricFamily = std::variant<ThroughputMetric, HopCountMetric, DistanceMetric, PredictiveMetric>;

/// Throws ValidationError on alpha, d_max or tau outside their domain.
void validate(const MetricFamily& family);

std::string_view family_name(const MetricFamily& family);

/// Whether the family's link sample is the ELP delivery ratio rather than
/// plain liveness.
bool uses_delivery_ratio(const MetricFamily& family);

/// What a node knows about one neighbor when evaluating a link.
struct LinkObservation {
  double delivery_ratio = 1.0;
  double distance_m = 0.0;
  double predicted_distance_m = 0.0;
  double phy_rate_bps = 54e6;
  bool has_position = true;
};

/// Instantaneous link sample in [0, 1]. Throws MissingPosition for the
/// position-based families when the neighbor announced none.
double link_sample(const MetricFamily& family, const LinkObservation& obs);

/// Path metric via a forwarder from the received path metric and the link
/// metric to that forwarder. All values normalized; output in [0, 1].
double theta(const MetricFamily& family, double path_metric, double link_metric, const LinkObservation& obs);

/// Transmission range estimate used as d_max; delegates to max_range.
double configure_dmax(const ChannelModel& channel, const RadioConfig& radio);

/// Returns a copy with d_max filled in for the position-based families.
MetricFamily with_dmax(MetricFamily family, double dmax);

}  // namespace batsim
