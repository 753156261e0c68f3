#include <doctest.h>

#include <memory>
#include <vector>

#include "batsim/batman.hpp"

using namespace batsim;

namespace {

/// Nodes on fixed positions sharing one medium; protocol timers are not
/// started unless a test does so.
struct Mesh {
  Scheduler scheduler;
  std::unique_ptr<StaticMobility> mobility;
  std::unique_ptr<Medium> medium;
  std::vector<std::unique_ptr<BatmanNode>> nodes;
  std::vector<std::pair<NodeId, Frame>> heard;

  Mesh(std::vector<Vec3> positions, MetricFamily family, BatmanConfig cfg = {}) {
    const std::size_t n = positions.size();
    mobility = std::make_unique<StaticMobility>(std::move(positions));
    medium = std::make_unique<Medium>(scheduler, MacConfig{}, ChannelModel(FriisGeneralized{2.65}), RadioConfig{}, n,
                                      [this](NodeId id, SimTime t) { return mobility->position_at(id, t); }, 5);
    for (NodeId id = 0; id < n; ++id) {
      nodes.push_back(std::make_unique<BatmanNode>(id, cfg, family, scheduler, *medium, *mobility, 5));
    }
    medium->on_receive([this](NodeId r, const Frame& f) { heard.emplace_back(r, f); });
  }

  BatmanNode& operator[](NodeId id) { return *nodes[id]; }

  void hello(NodeId to, NodeId from, std::uint32_t seq) {
    ElpMessage m;
    m.sender = from;
    m.seq = seq;
    m.position = mobility->position_at(from, scheduler.now());
    m.predicted_position = m.position;
    nodes[to]->on_elp(m);
  }
};

OgmMessage ogm(NodeId originator, std::uint32_t seq, int ttl = 32, MetricValue metric = MetricValue::best()) {
  OgmMessage m;
  m.originator = originator;
  m.seq = seq;
  m.ttl = ttl;
  m.reverse_path_metric = metric;
  return m;
}

std::vector<Vec3> spaced(std::size_t n, double spacing) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({spacing * static_cast<double>(i), 0.0, 0.0});
  return out;
}

}  // namespace

TEST_SUITE("batman5-routing") {
  TEST_CASE("ewma") {
    CHECK(ewma_update(0.5, 1.0, 0.3) == doctest::Approx(0.65));
  }

  TEST_CASE("first ELP creates the neighbor with the raw sample") {
    Mesh m(spaced(2, 100.0), ThroughputMetric{});
    m.hello(0, 1, 7);
    const NeighborRecord* nb = m[0].neighbor(1);
    REQUIRE(nb != nullptr);
    CHECK(nb->link_metric == doctest::Approx(1.0));
    m.hello(0, 1, 9);  // seq 8 missed: ratio 2/3
    CHECK(nb->delivery_ratio(10) == doctest::Approx(2.0 / 3.0));
    CHECK(nb->link_metric == doctest::Approx(ewma_update(1.0, 2.0 / 3.0, 0.3)));
  }

  TEST_CASE("silent neighbors are purged with their routes") {
    Mesh m(spaced(3, 100.0), HopCountMetric{});
    m.hello(0, 1, 1);
    m.hello(0, 2, 1);
    m[0].on_ogm(ogm(2, 1, 32, MetricValue::from_normalized(0.5)), 1);
    m[0].on_ogm(ogm(2, 1), 2);
    CHECK(m[0].next_hop(2) == NodeId{2});
    m.scheduler.run_until(400_ms);
    m.hello(0, 1, 2);
    m[0].on_ogm(ogm(2, 2, 32, MetricValue::from_normalized(0.5)), 1);
    m.scheduler.run_until(SimTime::from_us(BatmanConfig{}.neighbor_timeout().us() + 10'000));
    m[0].purge_neighbors();
    CHECK(m[0].neighbor(2) == nullptr);
    CHECK(m[0].neighbor(1) != nullptr);
    CHECK(m[0].next_hop(2) == NodeId{1});
  }

  TEST_CASE("ELP and OGM emission") {
    BatmanConfig cfg;
    Mesh m(spaced(2, 100.0), HopCountMetric{}, cfg);
    m[0].emit_ogm();
    const auto& tx = m.medium->recent_transmissions().back();
    const auto& msg = std::get<OgmMessage>(tx.frame.payload);
    CHECK(msg.seq == 1);
    CHECK(msg.reverse_path_metric.raw() == 4294967295u);
    CHECK(msg.ttl == 32);

    Mesh timed(spaced(2, 100.0), HopCountMetric{}, cfg);
    timed[0].start();
    timed[1].start();
    timed.scheduler.run_until(10_s);
    CHECK(timed[0].stats().elp_sent == doctest::Approx(50).epsilon(0.05));
    CHECK(timed[0].stats().ogm_originated == doctest::Approx(30).epsilon(0.07));
  }

  TEST_CASE("probing sends two unicasts per neighbor") {
    BatmanConfig cfg;
    cfg.probing = true;
    Mesh m(spaced(4, 50.0), ThroughputMetric{}, cfg);
    for (NodeId n : {1u, 2u, 3u}) m.hello(0, n, 1);
    m[0].emit_elp();
    CHECK(m[0].stats().probes_sent == 6);

    Mesh off(spaced(4, 50.0), ThroughputMetric{});
    for (NodeId n : {1u, 2u, 3u}) off.hello(0, n, 1);
    off[0].emit_elp();
    CHECK(off[0].stats().probes_sent == 0);
  }

  TEST_CASE("probe results feed the link sample") {
    BatmanConfig cfg;
    cfg.probing = true;
    Mesh m(spaced(2, 50.0), ThroughputMetric{}, cfg);
    m.hello(0, 1, 1);
    m[0].on_probe_result(1, true, 2);
    m[0].on_probe_result(1, false, 8);
    CHECK(m[0].observe(*m[0].neighbor(1)).delivery_ratio == doctest::Approx(0.25));
  }

  TEST_CASE("OGM forwarding applies the hop penalty once") {
    Mesh m(spaced(3, 100.0), HopCountMetric{});
    m.hello(1, 0, 1);
    CHECK(m[1].on_ogm(ogm(0, 1), 0) == OgmOutcome::Rebroadcast);
    m.scheduler.run_until(100_ms);
    bool seen = false;
    for (const auto& [r, f] : m.heard) {
      if (f.src != 1 || f.type() != FrameType::Ogm) continue;
      const auto& out = std::get<OgmMessage>(f.payload);
      CHECK(out.reverse_path_metric == MetricValue::from_normalized(1.0 - 1.0 / 255.0));
      CHECK(out.ttl == 31);
      seen = true;
    }
    CHECK(seen);
  }

  TEST_CASE("second copy of a sequence number") {
    Mesh m(spaced(4, 50.0), HopCountMetric{});
    m.hello(0, 1, 1);
    m.hello(0, 2, 1);
    CHECK(m[0].on_ogm(ogm(3, 1), 1) == OgmOutcome::Rebroadcast);
    CHECK(m[0].on_ogm(ogm(3, 1), 2) == OgmOutcome::DroppedDuplicate);
    const OriginatorRecord* rec = m[0].originator(3);
    REQUIRE(rec != nullptr);
    CHECK(rec->candidates.count(2) == 1);
    CHECK(m[0].on_ogm(ogm(3, 1), 1) == OgmOutcome::DroppedDuplicate);
    CHECK(m[0].on_ogm(ogm(0, 1), 1) == OgmOutcome::DroppedSelf);
    CHECK(m[0].on_ogm(ogm(3, 2), 3) == OgmOutcome::DroppedUnknownForwarder);
  }

  TEST_CASE("ttl exhausted") {
    Mesh m(spaced(2, 50.0), HopCountMetric{});
    m.hello(0, 1, 1);
    CHECK(m[0].on_ogm(ogm(1, 1, 1), 1) == OgmOutcome::DroppedTtl);
    CHECK(m[0].next_hop(1) == NodeId{1});
    CHECK(m[0].stats().ogm_rebroadcast == 0);
  }

  TEST_CASE("best candidate wins, ties keep the incumbent") {
    Mesh m(spaced(4, 50.0), ThroughputMetric{});
    m.hello(0, 1, 1);
    m.hello(0, 2, 1);
    m[0].on_ogm(ogm(3, 1, 32, MetricValue::from_normalized(0.5)), 1);
    m[0].on_ogm(ogm(3, 1, 32, MetricValue::from_normalized(0.9)), 2);
    CHECK(m[0].next_hop(3) == NodeId{2});
    m[0].on_ogm(ogm(3, 2, 32, MetricValue::from_normalized(0.9)), 1);
    CHECK(m[0].next_hop(3) == NodeId{2});
  }

  TEST_CASE("a weaker update from the router does not hand the route to an older echo") {
    Mesh m(spaced(4, 50.0), ThroughputMetric{});
    m.hello(0, 1, 1);
    m.hello(0, 2, 1);
    m[0].on_ogm(ogm(3, 1, 32, MetricValue::from_normalized(0.9)), 1);
    m[0].on_ogm(ogm(3, 1, 32, MetricValue::from_normalized(0.8)), 2);
    m[0].on_ogm(ogm(3, 2, 32, MetricValue::from_normalized(0.4)), 1);
    CHECK(m[0].next_hop(3) == NodeId{1});
    m[0].on_ogm(ogm(3, 2, 32, MetricValue::from_normalized(0.8)), 2);
    CHECK(m[0].next_hop(3) == NodeId{2});
  }

  TEST_CASE("stale candidates are not used") {
    Mesh m(spaced(4, 50.0), HopCountMetric{});
    m.hello(0, 1, 1);
    m.hello(0, 2, 1);
    m[0].on_ogm(ogm(3, 1, 32, MetricValue::from_normalized(1.0)), 1);
    for (std::uint32_t s = 1; s <= 6; ++s) m[0].on_ogm(ogm(3, s, 32, MetricValue::from_normalized(0.5)), 2);
    CHECK(m[0].next_hop(3) == NodeId{2});
  }

  TEST_CASE("data forwarding") {
    Mesh m(spaced(3, 100.0), HopCountMetric{});
    std::vector<DropReason> drops;
    int delivered = 0;
    m[0].on_data_dropped([&](const DataPacket&, DropReason r) { drops.push_back(r); });
    m[0].on_data_delivered([&](const DataPacket&) { ++delivered; });

    DataPacket p;
    p.id = 1;
    p.source = 1;
    p.destination = 0;
    p.bytes = 100;
    CHECK(m[0].forward_data(p) == ForwardResult::Delivered);
    CHECK(delivered == 1);

    p.destination = 2;
    CHECK(m[0].forward_data(p) == ForwardResult::NoRoute);
    p.hops = 64;
    CHECK(m[0].forward_data(p) == ForwardResult::HopLimit);
    CHECK(drops == std::vector<DropReason>{DropReason::NoRoute, DropReason::HopLimit});

    m.hello(0, 1, 1);
    m[0].on_ogm(ogm(2, 1), 1);
    p.hops = 0;
    CHECK(m[0].forward_data(p) == ForwardResult::Forwarded);
  }

  TEST_CASE("originator timeout") {
    Mesh m(spaced(2, 50.0), HopCountMetric{});
    m.hello(0, 1, 1);
    m[0].on_ogm(ogm(1, 1), 1);
    CHECK(m[0].next_hop(1).has_value());
    m.scheduler.run_until(4_s);
    CHECK_FALSE(m[0].next_hop(1).has_value());
  }

  TEST_CASE("chain converges through the middle node") {
    BatmanConfig cfg;
    Mesh m(spaced(3, 150.0), HopCountMetric{}, cfg);
    for (auto& n : m.nodes) n->start();
    m.medium->on_receive([&](NodeId r, const Frame& f) {
      if (f.type() == FrameType::Elp) m[r].on_elp(std::get<ElpMessage>(f.payload));
      if (f.type() == FrameType::Ogm) m[r].on_ogm(std::get<OgmMessage>(f.payload), f.src);
    });
    m.scheduler.run_until(5_s);
    CHECK(m[0].next_hop(2) == NodeId{1});
    CHECK(m[2].next_hop(0) == NodeId{1});
    CHECK(m[0].next_hop(1) == NodeId{1});
  }
}
