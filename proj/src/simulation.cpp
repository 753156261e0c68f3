#include "batsim/simulation.hpp"

#include <stdexcept>

#include "batsim/errors.hpp"

namespace batsim {

namespace {

void add_stats(BatmanStats& into, const BatmanStats& s) {
  into.elp_sent += s.elp_sent;
  into.elp_received += s.elp_received;
  into.probes_sent += s.probes_sent;
  into.ogm_originated += s.ogm_originated;
  into.ogm_rebroadcast += s.ogm_rebroadcast;
  into.missing_position += s.missing_position;
  into.neighbors_purged += s.neighbors_purged;
  for (std::size_t i = 0; i < kOgmOutcomes; ++i) into.ogm_outcomes[i] += s.ogm_outcomes[i];
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  dmax_ = resolve_dmax(cfg_);
  mobility_ = make_mobility(cfg_, seed_);
  if (mobility_->node_count() != cfg_.nodes) throw ValidationError("sim.nodes", "mobility node count mismatch");

  MobilityModel* mob = mobility_.get();
  medium_ = std::make_unique<Medium>(scheduler_, cfg_.mac, make_channel(cfg_), cfg_.radio, cfg_.nodes,
                                     [mob](NodeId n, SimTime t) { return mob->position_at(n, t); }, seed_);
  medium_->on_receive([this](NodeId r, const Frame& f) { on_receive(r, f); });
  medium_->on_unicast_done(
      [this](const Frame& f, bool ok, DeliveryOutcome last, int attempts) { on_unicast_done(f, ok, last, attempts); });

  const MetricFamily family = make_family(cfg_);
  for (NodeId id = 0; id < cfg_.nodes; ++id) {
    auto node = std::make_unique<BatmanNode>(id, cfg_.batman, family, scheduler_, *medium_, *mobility_, seed_);
    node->on_data_delivered(
        [this](const DataPacket& p) { kpi_.record_delivery(p.id, p.sent_at, scheduler_.now()); });
    node->on_data_dropped([this](const DataPacket& p, DropReason why) { kpi_.record_drop(p.id, why); });
    nodes_.push_back(std::move(node));
  }
  for (auto& node : nodes_) node->start();

  setup_traffic();
  if (cfg_.route_dump_interval.us() > 0) {
    scheduler_.schedule(cfg_.route_dump_interval, EventKind::StatsSample, kGlobalTarget, [this] { dump_routes(); });
  }
  scheduler_.schedule(cfg_.duration, EventKind::RunEnd, kGlobalTarget, [] {});
}

void Simulation::setup_traffic() {
  StreamSpec spec;
  spec.rate_bps = cfg_.rate_bps;
  spec.packet_size = cfg_.packet_size;
  spec.start = cfg_.traffic_start;
  spec.stop = traffic_stop_ = cfg_.effective_traffic_stop();
  stream_gap_ = cbr_interval(spec);

  RngStream pick(seed_, "traffic");
  const std::uint64_t last = cfg_.nodes - 1;
  for (std::size_t i = 0; i < cfg_.streams; ++i) {
    NodeId src = cfg_.source ? *cfg_.source : static_cast<NodeId>(pick.uniform_int(0, last));
    NodeId dst = 0;
    if (cfg_.destination) {
      dst = *cfg_.destination;
      if (!cfg_.source && src == dst) src = static_cast<NodeId>((src + 1 + pick.uniform_int(0, last - 1)) % cfg_.nodes);
    } else {
      dst = static_cast<NodeId>((src + 1 + pick.uniform_int(0, last - 1)) % cfg_.nodes);
    }
    streams_.emplace_back(src, dst);
    scheduler_.schedule(spec.start, EventKind::TrafficEmit, src, [this, i] { emit(i); });
  }
}

void Simulation::emit(std::size_t stream) {
  const auto [src, dst] = streams_[stream];
  DataPacket p;
  p.id = next_packet_id_++;
  p.source = src;
  p.destination = dst;
  p.sent_at = scheduler_.now();
  p.bytes = cfg_.packet_size;
  kpi_.record_sent(p.id, p.sent_at, p.bytes);
  nodes_[src]->forward_data(p);
  const SimTime next = scheduler_.now() + stream_gap_;
  if (next < traffic_stop_) scheduler_.schedule(next, EventKind::TrafficEmit, src, [this, stream] { emit(stream); });
}

void Simulation::dump_routes() {
  for (const auto& node : nodes_) {
    for (const RouteEntry& r : node->routing_table()) routes_.push_back({scheduler_.now(), node->id(), r});
  }
  const SimTime next = scheduler_.now() + cfg_.route_dump_interval;
  if (next <= cfg_.duration) scheduler_.schedule(next, EventKind::StatsSample, kGlobalTarget, [this] { dump_routes(); });
}

void Simulation::on_receive(NodeId receiver, const Frame& frame) {
  BatmanNode& node = *nodes_[receiver];
  switch (frame.type()) {
    case FrameType::Elp:
      node.on_elp(std::get<ElpMessage>(frame.payload));
      break;
    case FrameType::ElpProbe:
      break;  // the sender learns the outcome from the MAC
    case FrameType::Ogm:
      node.on_ogm(std::get<OgmMessage>(frame.payload), frame.src);
      break;
    case FrameType::Data:
      node.forward_data(std::get<DataPacket>(frame.payload));
      break;
  }
}

void Simulation::on_unicast_done(const Frame& frame, bool delivered, DeliveryOutcome last, int attempts) {
  if (frame.type() == FrameType::ElpProbe) {
    nodes_[frame.src]->on_probe_result(frame.dst, delivered, attempts);
  } else if (frame.type() == FrameType::Data && !delivered) {
    const auto why = last == DeliveryOutcome::Collided ? DropReason::Collision : DropReason::BelowSensitivity;
    kpi_.record_drop(std::get<DataPacket>(frame.payload).id, why);
  }
}

void Simulation::advance_to(SimTime t) {
  if (t > cfg_.duration) throw std::invalid_argument("advance_to beyond the run duration");
  scheduler_.run_until(t);
}

RunResult Simulation::run() {
  if (finished_) throw std::logic_error("simulation already run");
  scheduler_.run_until(cfg_.duration);
  finished_ = true;

  RunResult out;
  out.seed = seed_;
  out.scenario = cfg_.name;
  out.family = to_string(cfg_.family);
  out.kpi = kpi_.finalize(traffic_stop_ - cfg_.traffic_start);
  out.report = scheduler_.report();
  out.mac = medium_->stats();
  for (const auto& node : nodes_) add_stats(out.routing, node->stats());
  out.routes = std::move(routes_);
  return out;
}

}  // namespace batsim
