#include <gtest/gtest.h>

#include <random>

#include "cpm/runtime/tom.hpp"
#include "support/oracles.hpp"

namespace cpm::rt {
namespace {

std::vector<TimeMs> times(const std::vector<FireRecord>& log, const std::string& subid) {
  std::vector<TimeMs> out;
  for (const auto& r : log) {
    if (r.subid == subid) out.push_back(r.time);
  }
  return out;
}

TEST(Tom, CyclicFiresAtFixedRate) {
  Tom tom;
  const auto h = tom.declare("a", 30, true);
  tom.insert(h);
  tom.advance(100);
  EXPECT_EQ(times(tom.fired_log(), "a"), (std::vector<TimeMs>{30, 60, 90}));
  EXPECT_EQ(tom.now(), 100);
  EXPECT_EQ(tom.object(h).instances, 3u);
}

TEST(Tom, OneShotFiresOnce) {
  Tom tom;
  const auto h = tom.declare("once", 10, false);
  tom.insert(h);
  tom.advance(100);
  EXPECT_EQ(tom.fired_log().size(), 1u);
  EXPECT_TRUE(tom.pending().empty());
}

TEST(Tom, TiesResolveByInsertionOrder) {
  Tom tom;
  const auto b = tom.declare("b", 50, true);
  const auto a = tom.declare("a", 25, true);
  tom.insert(b);
  tom.insert(a);
  tom.advance(50);
  ASSERT_EQ(tom.fired_log().size(), 3u);
  EXPECT_EQ(tom.fired_log()[0], (FireRecord{25, "a", 1}));
  EXPECT_EQ(tom.fired_log()[1], (FireRecord{50, "b", 1}));
  EXPECT_EQ(tom.fired_log()[2], (FireRecord{50, "a", 2}));
}

TEST(Tom, DisableSuppressesEnableKeepsPhase) {
  Tom tom;
  const auto h = tom.declare("a", 10, true);
  tom.insert(h);
  tom.advance(15);
  tom.disable(h);
  tom.advance(20);
  tom.enable(h);
  tom.advance(10);
  EXPECT_EQ(times(tom.fired_log(), "a"), (std::vector<TimeMs>{10, 40}));
}

TEST(Tom, SetDeadlineAndRenew) {
  Tom tom;
  const auto h = tom.declare("a", 10, true);
  tom.insert(h);
  tom.advance(15);
  tom.set_deadline(h, 30);  // takes effect after the next firing
  tom.advance(25);
  EXPECT_EQ(times(tom.fired_log(), "a"), (std::vector<TimeMs>{10, 20}));
  tom.renew(h);  // re-armed from now = 40
  tom.advance(60);
  EXPECT_EQ(times(tom.fired_log(), "a"), (std::vector<TimeMs>{10, 20, 70, 100}));
}

TEST(Tom, RemoveStopsAndDoubleRemoveWarns) {
  Tom tom;
  const auto h = tom.declare("a", 10, true);
  tom.insert(h);
  tom.advance(10);
  tom.remove(h);
  tom.advance(100);
  EXPECT_EQ(tom.fired_log().size(), 1u);
  EXPECT_TRUE(tom.warnings().empty());
  tom.remove(h);
  EXPECT_EQ(tom.warnings().size(), 1u);
}

TEST(Tom, Errors) {
  Tom tom;
  EXPECT_THROW(tom.declare("z", 0, true), std::invalid_argument);
  EXPECT_THROW(tom.declare("n", -1, false), std::invalid_argument);
  const auto h = tom.declare("a", 10, true);
  EXPECT_THROW(tom.renew(h), std::logic_error);
  EXPECT_THROW(tom.advance(-1), std::invalid_argument);
  EXPECT_THROW(tom.object(99), std::out_of_range);
  Tom wall(std::make_shared<Clock>(ClockMode::kWall));
  EXPECT_THROW(wall.advance(1), std::logic_error);
}

TEST(Tom, ActionsMayReenter) {
  Tom tom;
  const auto h = tom.declare("a", 10, true);
  int calls = 0;
  tom.set_action(h, [&](Tom& t, const FireRecord& r) {
    ++calls;
    if (r.instance_no == 2) t.remove(h);
    const auto extra = t.declare("x", 1, false);
    t.insert(extra);
  });
  tom.insert(h);
  tom.advance(100);
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(times(tom.fired_log(), "x"), (std::vector<TimeMs>{11, 21}));
}

TEST(Tom, ObserverSeesEveryFiring) {
  Tom tom;
  std::vector<FireRecord> seen;
  tom.set_fire_observer([&](const FireRecord& r) { seen.push_back(r); });
  tom.insert(tom.declare("a", 7, true));
  tom.advance(50);
  EXPECT_EQ(seen, tom.fired_log());
}

TEST(Tom, PendingOrder) {
  Tom tom;
  const auto a = tom.declare("a", 30, true);
  const auto b = tom.declare("b", 10, true);
  tom.insert(a);
  tom.insert(b);
  tom.disable(b);
  EXPECT_EQ(tom.pending(), (std::vector<TimeoutHandle>{b, a}));
}

// Property: firing times match floor(H/p) slots at p, 2p, ... for random
// (p, H), whether the horizon is reached in one step or many.
TEST(Property, CyclicFireTimes) {
  std::mt19937_64 rng(67);
  for (int i = 0; i < 200; ++i) {
    const TimeMs h = 1 + static_cast<TimeMs>(rng() % 20000);
    const TimeMs p = 1 + static_cast<TimeMs>(rng() % h);
    Tom tom;
    tom.insert(tom.declare("c", p, true));
    if (i % 2) {
      tom.advance(h);
    } else {
      while (tom.now() < h) tom.advance(std::min<TimeMs>(1 + rng() % 997, h - tom.now()));
    }
    ASSERT_EQ(times(tom.fired_log(), "c"), oracle::cyclic_fire_times(p, h)) << p << " " << h;
  }
}

// Property: interleaved cyclic objects fire in nondecreasing time order.
TEST(Property, LogIsTimeOrdered) {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 100; ++i) {
    Tom tom;
    for (int k = 0; k < 5; ++k) tom.insert(tom.declare("t" + std::to_string(k), 1 + rng() % 50, true));
    tom.advance(1000);
    const auto& log = tom.fired_log();
    for (std::size_t j = 1; j < log.size(); ++j) ASSERT_LE(log[j - 1].time, log[j].time);
  }
}

}  // namespace
}  // namespace cpm::rt
