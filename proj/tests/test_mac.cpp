#include <doctest.h>

#include <memory>
#include <vector>

#include "batsim/mac.hpp"

using namespace batsim;

namespace {

struct Bench {
  Scheduler scheduler;
  std::vector<Vec3> positions;
  std::unique_ptr<Medium> medium;
  std::vector<std::pair<NodeId, Frame>> received;

  explicit Bench(std::vector<Vec3> pos, MacConfig mac = {}) : positions(std::move(pos)) {
    medium = std::make_unique<Medium>(scheduler, mac, ChannelModel(FriisGeneralized{2.65}), RadioConfig{},
                                      positions.size(), [this](NodeId n, SimTime) { return positions[n]; }, 1);
    medium->on_receive([this](NodeId r, const Frame& f) { received.emplace_back(r, f); });
  }
};

Frame broadcast(std::size_t bytes = 100) { return Frame{0, kBroadcast, bytes, OgmMessage{}}; }

}  // namespace

TEST_SUITE("mac80211-lite") {
  TEST_CASE("airtime") {
    MacConfig mac;
    CHECK(airtime(mac, 1350) == 300_us);
    mac.per_frame_overhead = SimTime{};
    CHECK(airtime(mac, 675) == 100_us);
    CHECK(airtime(mac, 1350) == SimTime::from_us(2 * airtime(mac, 675).us()));
  }

  TEST_CASE("idle medium starts at once") {
    Bench b({{0, 0, 0}, {100, 0, 0}});
    b.scheduler.run_until(1_ms);
    CHECK(b.medium->try_send(0, broadcast()) == EnqueueResult::Enqueued);
    CHECK(b.medium->transmitting(0));
    CHECK(b.medium->recent_transmissions().back().start == 1_ms);
    b.scheduler.run_until(2_ms);
    REQUIRE(b.received.size() == 1);
    CHECK(b.received[0].first == 1);
  }

  TEST_CASE("busy medium defers beyond the ongoing transmission") {
    Bench b({{0, 0, 0}, {100, 0, 0}, {50, 50, 0}});
    SimTime arrival_from_1;
    b.medium->on_receive([&](NodeId r, const Frame& f) {
      if (r == 2 && f.src == 1) arrival_from_1 = b.scheduler.now();
    });
    b.medium->try_send(0, broadcast(1350));
    b.medium->try_send(1, broadcast(1350));
    CHECK_FALSE(b.medium->transmitting(1));
    const SimTime first_end = b.medium->recent_transmissions().front().end;
    b.scheduler.run_until(10_ms);
    CHECK(arrival_from_1 > first_end + airtime(MacConfig{}, 1350));
    CHECK(b.medium->stats().deferrals >= 1);
  }

  TEST_CASE("drop-tail queue") {
    MacConfig mac;
    mac.queue_cap = 2;
    Bench b({{0, 0, 0}, {100, 0, 0}}, mac);
    CHECK(b.medium->try_send(0, broadcast()) == EnqueueResult::Enqueued);
    CHECK(b.medium->try_send(0, broadcast()) == EnqueueResult::Enqueued);
    CHECK(b.medium->try_send(0, broadcast()) == EnqueueResult::QueueOverflow);
    CHECK(b.medium->stats().queue_drops[static_cast<std::size_t>(FrameType::Ogm)] == 1);
  }

  TEST_CASE("reception verdicts") {
    // 0 and 2 cannot hear each other; 1 hears both.
    Bench b({{0, 0, 0}, {200, 0, 0}, {400, 0, 0}, {600, 0, 0}});
    b.medium->try_send(0, broadcast());
    const Transmission solo = b.medium->recent_transmissions().back();
    CHECK(b.medium->deliver(solo, 1) == DeliveryOutcome::Received);
    CHECK(b.medium->deliver(solo, 3) == DeliveryOutcome::BelowSensitivity);

    b.medium->try_send(2, broadcast());
    REQUIRE(b.medium->transmitting(2));
    const auto& txs = b.medium->recent_transmissions();
    CHECK(b.medium->deliver(txs[0], 1) == DeliveryOutcome::Collided);
    CHECK(b.medium->deliver(txs[1], 1) == DeliveryOutcome::Collided);
    b.scheduler.run_until(1_ms);
    for (const auto& [r, f] : b.received) CHECK(r != 1);
    CHECK(b.medium->stats().collided >= 2);
  }

  TEST_CASE("unicast retries until the limit") {
    MacConfig mac;
    mac.unicast_retries = 3;
    Bench b({{0, 0, 0}, {500, 0, 0}}, mac);
    bool done = false;
    b.medium->on_unicast_done([&](const Frame&, bool delivered, DeliveryOutcome last, int attempts) {
      done = true;
      CHECK_FALSE(delivered);
      CHECK(last == DeliveryOutcome::BelowSensitivity);
      CHECK(attempts == 4);
    });
    b.medium->try_send(0, Frame{0, 1, 100, ElpProbe{0, 1}});
    b.scheduler.run_until(1_s);
    CHECK(done);
    CHECK(b.medium->stats().unicast_failures == 1);
  }

  TEST_CASE("unicast to a neighbor in range") {
    Bench b({{0, 0, 0}, {100, 0, 0}});
    int attempts_seen = 0;
    b.medium->on_unicast_done([&](const Frame&, bool delivered, DeliveryOutcome, int attempts) {
      CHECK(delivered);
      attempts_seen = attempts;
    });
    b.medium->try_send(0, Frame{0, 1, 100, ElpProbe{0, 1}});
    b.scheduler.run_until(1_s);
    CHECK(attempts_seen == 1);
    CHECK(b.received.size() == 1);
  }
}
