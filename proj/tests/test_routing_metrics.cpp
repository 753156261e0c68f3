#include <doctest.h>

#include "batsim/errors.hpp"
#include "batsim/metric_value.hpp"
#include "batsim/routing_metrics.hpp"

using namespace batsim;

namespace {

LinkObservation at(double d, double predicted) {
  LinkObservation o;
  o.distance_m = d;
  o.predicted_distance_m = predicted;
  return o;
}

}  // namespace

TEST_SUITE("routing-metrics") {
  TEST_CASE("link samples") {
    LinkObservation o;
    o.delivery_ratio = 0.8;
    CHECK(link_sample(ThroughputMetric{}, o) == doctest::Approx(0.8));
    CHECK(link_sample(HopCountMetric{}, o) == 1.0);
    o.has_position = false;
    CHECK_THROWS_AS(link_sample(DistanceMetric{1.0, 100.0}, o), MissingPosition);
    CHECK_THROWS_AS(link_sample(PredictiveMetric{1.0, 100.0, 3.0}, o), MissingPosition);
  }

  TEST_CASE("distance penalty") {
    const double dmax = 237.4;
    CHECK(theta(DistanceMetric{1.0, dmax}, 1.0, 1.0, at(dmax, dmax)) == doctest::Approx(0.0));
    CHECK(theta(DistanceMetric{2.0, dmax}, 0.8, 1.0, at(0.5 * dmax, 0.5 * dmax)) == doctest::Approx(0.55));
    CHECK(theta(DistanceMetric{1.0, dmax}, 0.1, 1.0, at(0.5 * dmax, 0.0)) == 0.0);
  }

  TEST_CASE("predictive penalty takes the worse of now and ahead") {
    const double dmax = 200.0;
    CHECK(theta(PredictiveMetric{1.0, dmax, 3.0}, 1.0, 1.0, at(0.5 * dmax, 0.8 * dmax)) == doctest::Approx(0.2));
    CHECK(theta(PredictiveMetric{1.0, dmax, 3.0}, 1.0, 1.0, at(0.8 * dmax, 0.5 * dmax)) == doctest::Approx(0.2));
    for (double d : {0.0, 10.0, 99.0, 180.0}) {
      CHECK(theta(PredictiveMetric{2.0, dmax, 4.0}, 0.9, 1.0, at(d, d)) ==
            theta(DistanceMetric{2.0, dmax}, 0.9, 1.0, at(d, d)));
    }
  }

  TEST_CASE("hop count and throughput") {
    CHECK(theta(HopCountMetric{}, MetricValue::best().normalized(), 1.0, {}) == doctest::Approx(1.0 - 1.0 / 255.0));
    CHECK(theta(ThroughputMetric{}, 0.9, 0.5, {}) == doctest::Approx(0.5 - 1.0 / 255.0));
    CHECK(theta(ThroughputMetric{}, 0.001, 0.5, {}) == 0.0);
  }

  TEST_CASE("composition with the link metric") {
    DistanceMetric d{1.0, 100.0, true};
    CHECK(theta(d, 1.0, 0.3, at(10.0, 10.0)) == doctest::Approx(0.3));
    CHECK(uses_delivery_ratio(d));
    CHECK_FALSE(uses_delivery_ratio(DistanceMetric{1.0, 100.0}));
  }

  TEST_CASE("domain checks") {
    CHECK_THROWS_AS(theta(HopCountMetric{}, 1.5, 1.0, {}), std::domain_error);
    CHECK_THROWS_AS(validate(DistanceMetric{0.0, 100.0}), ValidationError);
    CHECK_THROWS_AS(validate(DistanceMetric{1.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate(PredictiveMetric{1.0, 100.0, 0.0}), ValidationError);
    CHECK_NOTHROW(validate(with_dmax(PredictiveMetric{}, 237.4)));
    CHECK(family_name(PredictiveMetric{}) == "predictive");
  }

  TEST_CASE("wire encoding") {
    CHECK(MetricValue::from_normalized(1.0).raw() == MetricValue::kMaxRaw);
    CHECK(MetricValue::from_normalized(0.0).raw() == 0);
    CHECK_THROWS_AS(MetricValue::from_normalized(1.01), std::domain_error);
  }
}
