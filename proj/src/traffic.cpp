#include "batsim/traffic.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "batsim/errors.hpp"

namespace batsim {

void StreamSpec::validate() const {
  if (!(rate_bps > 0.0)) throw ValidationError("traffic.rate_bps", "must be positive");
  if (packet_size == 0) throw ValidationError("traffic.packet_size", "must be positive");
  if (source && destination && *source == *destination) {
    throw ValidationError("traffic.destination", "must differ from the source");
  }
}

SimTime cbr_interval(const StreamSpec& stream) {
  const double us = 8.0 * static_cast<double>(stream.packet_size) / stream.rate_bps * 1e6;
  return SimTime::from_us(std::max<std::int64_t>(1, std::llround(us)));
}

std::vector<SimTime> cbr_emission_times(const StreamSpec& stream) {
  std::vector<SimTime> out;
  const SimTime gap = cbr_interval(stream);
  for (SimTime t = stream.start; t < stream.stop; t += gap) out.push_back(t);
  return out;
}

void KpiAccumulator::record_sent(std::uint64_t packet_id, SimTime, std::size_t bytes) {
  const auto [it, fresh] = packets_.emplace(packet_id, Packet{State::InFlight, bytes});
  if (!fresh) throw std::logic_error("packet id " + std::to_string(packet_id) + " sent twice");
  ++sent_;
}

void KpiAccumulator::record_delivery(std::uint64_t packet_id, SimTime sent_at, SimTime received_at) {
  auto it = packets_.find(packet_id);
  if (it == packets_.end()) throw UnknownPacket("delivery of unknown packet " + std::to_string(packet_id));
  if (it->second.state == State::Delivered) {
    ++duplicates_;
    return;
  }
  if (it->second.state == State::Dropped) {
    // A copy already counted lost; keep the earlier verdict.
    ++duplicates_;
    return;
  }
  it->second.state = State::Delivered;
  ++delivered_;
  bytes_delivered_ += it->second.bytes;
  delays_.push_back((received_at - sent_at).seconds());
}

void KpiAccumulator::record_drop(std::uint64_t packet_id, DropReason reason) {
  auto it = packets_.find(packet_id);
  if (it == packets_.end()) throw UnknownPacket("drop of unknown packet " + std::to_string(packet_id));
  if (it->second.state != State::InFlight) return;
  it->second.state = State::Dropped;
  ++drops_[static_cast<std::size_t>(reason)];
}

std::uint64_t KpiAccumulator::dropped_total() const {
  return std::accumulate(std::begin(drops_), std::end(drops_), std::uint64_t{0});
}

KpiRow KpiAccumulator::finalize(SimTime measured_interval) const {
  KpiRow row;
  row.sent = sent_;
  row.delivered = delivered_;
  if (sent_ > 0) row.pdr = static_cast<double>(delivered_) / static_cast<double>(sent_);
  if (!delays_.empty()) {
    row.mean_delay_s = std::accumulate(delays_.begin(), delays_.end(), 0.0) / static_cast<double>(delays_.size());
  }
  if (measured_interval.us() > 0) {
    row.data_rate_bps = 8.0 * static_cast<double>(bytes_delivered_) / measured_interval.seconds();
  }
  row.drops_noroute = dropped(DropReason::NoRoute);
  row.drops_collision = dropped(DropReason::Collision);
  row.drops_sensitivity = dropped(DropReason::BelowSensitivity);
  row.drops_queue = dropped(DropReason::QueueOverflow);
  row.drops_hop_limit = dropped(DropReason::HopLimit);
  row.duplicates = duplicates_;
  return row;
}

double student_t975(std::size_t dof) {
  if (dof == 0) throw InsufficientRuns("confidence interval needs at least two runs");
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

Estimate estimate(const std::vector<double>& samples) {
  if (samples.size() < 2) throw InsufficientRuns("confidence interval needs at least two samples");
  // Sorted summation keeps the result independent of row order.
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return Estimate{mean, student_t975(samples.size() - 1) * sd / std::sqrt(n), samples.size()};
}

AggregateResult aggregate(const std::vector<KpiRow>& rows) {
  if (rows.size() < 2) throw InsufficientRuns("aggregation needs at least two runs, got " + std::to_string(rows.size()));
  AggregateResult out;
  out.runs = rows.size();
  std::vector<double> pdr, delay, rate, noroute, collision, sensitivity, queue;
  for (const KpiRow& r : rows) {
    if (r.pdr) pdr.push_back(*r.pdr);
    if (r.mean_delay_s) delay.push_back(*r.mean_delay_s);
    rate.push_back(r.data_rate_bps);
    noroute.push_back(static_cast<double>(r.drops_noroute));
    collision.push_back(static_cast<double>(r.drops_collision));
    sensitivity.push_back(static_cast<double>(r.drops_sensitivity));
    queue.push_back(static_cast<double>(r.drops_queue));
  }
  if (pdr.size() >= 2) out.pdr = estimate(pdr);
  if (delay.size() >= 2) out.mean_delay_s = estimate(delay);
  out.data_rate_bps = estimate(rate);
  out.drops_noroute = estimate(noroute);
  out.drops_collision = estimate(collision);
  out.drops_sensitivity = estimate(sensitivity);
  out.drops_queue = estimate(queue);
  return out;
}

}  // namespace batsim
