#include <gtest/gtest.h>

#include <random>

#include "cpm/runtime/context.hpp"

namespace cpm::rt {
namespace {

TEST(Registry, SensorSnapshots) {
  ContextRegistry reg;
  reg.register_var("t", Direction::kSensor);
  EXPECT_EQ(reg.sensor("t"), 0);
  reg.sensor_update("t", 42);
  EXPECT_EQ(reg.sensor("t"), 42);
  EXPECT_EQ(reg.binding("t"), "t");
  EXPECT_THROW(reg.sensor("nope"), UnknownContextVariable);
}

TEST(Registry, ActuatorsForwardToBinding) {
  ContextRegistry reg;
  reg.register_var("volume", Direction::kActuator, "mixer.volume");
  std::vector<std::pair<std::string, Value>> writes;
  EXPECT_FALSE(reg.actuator_write("volume", 1));
  EXPECT_EQ(reg.warnings().size(), 1u);
  reg.bind_actuator("mixer.volume", [&](const std::string& n, Value v) { writes.emplace_back(n, v); });
  EXPECT_TRUE(reg.actuator_write("volume", 7));
  EXPECT_EQ(writes, (std::vector<std::pair<std::string, Value>>{{"volume", 7}}));
  EXPECT_THROW(reg.sensor("volume"), UnknownContextVariable);
  EXPECT_THROW(reg.sensor_update("volume", 1), UnknownContextVariable);
}

TEST(Registry, BothDirections) {
  ContextRegistry reg;
  reg.register_var("w", Direction::kBoth);
  reg.sensor_update("w", 3);
  EXPECT_EQ(reg.sensor("w"), 3);
  EXPECT_FALSE(reg.actuator_write("w", 4));
  EXPECT_THROW(reg.register_var("w", Direction::kSensor), std::invalid_argument);
}

TEST(Guards, FireOnRisingEdgeOnly) {
  ContextRegistry reg;
  reg.register_var("t", Direction::kSensor);
  int fired = 0;
  reg.register_guard("hot", "t > 90", [&] { ++fired; });
  for (Value v : {50, 95, 99, 10, 91, 91}) reg.sensor_update("t", v);
  EXPECT_EQ(fired, 2);
}

TEST(Guards, InitiallyTrueDoesNotFire) {
  ContextRegistry reg;
  reg.register_var("t", Direction::kSensor);
  reg.define_constant("LIMIT", -1);
  int fired = 0;
  reg.register_guard("g", "t > LIMIT", [&] { ++fired; });
  reg.sensor_update("t", 5);
  EXPECT_EQ(fired, 0);
}

TEST(Guards, BodiesRunAfterAllGuardsSeeTheSnapshot) {
  ContextRegistry reg;
  reg.register_var("t", Direction::kSensor);
  std::vector<std::string> order;
  reg.register_guard("a", "t == 1", [&] { order.push_back("a"); });
  reg.register_guard("b", "t >= 1", [&] { order.push_back("b"); });
  const auto firings = reg.sensor_update("t", 1);
  ASSERT_EQ(firings.size(), 2u);
  EXPECT_EQ(firings[0].body_fn, "a");
  EXPECT_EQ(firings[1].guard_src, "t >= 1");
  EXPECT_EQ(order, (std::vector<std::string>{"a", "b"}));
}

TEST(Guards, OnlyGuardsMentioningTheSensorAreEvaluated) {
  ContextRegistry reg;
  reg.register_var("a", Direction::kSensor);
  reg.register_var("b", Direction::kSensor);
  int fired = 0;
  reg.register_guard("g", "b > 0", [&] { ++fired; });
  reg.sensor_update("a", 5);
  EXPECT_EQ(fired, 0);
  reg.sensor_update("b", 5);
  EXPECT_EQ(fired, 1);
}

TEST(Guards, RegistrationErrors) {
  ContextRegistry reg;
  reg.register_var("t", Direction::kSensor);
  reg.register_var("act", Direction::kActuator);
  EXPECT_THROW(reg.register_guard("g", "1", {}), std::invalid_argument);
  EXPECT_THROW(reg.register_guard("g", "act > 1", {}), std::invalid_argument);
  EXPECT_THROW(reg.register_guard("g", "t >", {}), expr::ExprError);
  EXPECT_THROW(reg.register_guard("g", "t > f(1)", {}), expr::ExprError);
}

TEST(Array, StalenessPerPeriod) {
  ReflectiveArray a("linkbeacons", 100);
  a.report_beacon("p1", 10);
  a.report_beacon("p1", 20);
  a.report_beacon("p2", 30);
  a.rollover(100);
  EXPECT_EQ(a.property("p1", "beacons"), 2);
  EXPECT_EQ(a.property("p1", "stale"), 0);
  a.report_beacon("p1", 150);
  a.rollover(200);
  EXPECT_EQ(a.property("p2", "stale"), 1);
  EXPECT_EQ(a.property("p2", "silent_periods"), 1);
  a.rollover(300);
  EXPECT_EQ(a.property("p2", "silent_periods"), 2);
  EXPECT_EQ(a.property("p1", "stale"), 1);
  a.report_beacon("p2", 310);
  EXPECT_EQ(a.property("p2", "stale"), 0);
  EXPECT_EQ(a.property("p2", "beacons_cur_period"), 1);
  a.rollover(400);
  EXPECT_EQ(a.property("p2", "silent_periods"), 0);
  EXPECT_THROW(a.rollover(399), std::invalid_argument);
}

TEST(Array, IterationAndUserProperties) {
  ReflectiveArray a("r");
  a.report_beacon("z", 0);
  a.set_property("a", "rate", 11);
  a.report_beacon("z", 1);
  std::size_t cursor = 0;
  EXPECT_EQ(a.anext(cursor), "z");
  EXPECT_EQ(a.anext(cursor), "a");
  EXPECT_EQ(a.anext(cursor), std::nullopt);
  EXPECT_EQ(a.property("a", "rate"), 11);
  EXPECT_EQ(a.property("z", "rate"), 0);
  EXPECT_THROW(a.property("missing", "rate"), UnknownContextVariable);
  EXPECT_THROW(ReflectiveArray("bad", 0), std::invalid_argument);
}

// Property: a key is stale after a rollover iff it had no beacon since the
// previous rollover, for random beacon/rollover interleavings.
TEST(Property, StaleIffSilentSinceLastRollover) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 300; ++trial) {
    ReflectiveArray a("r", 10);
    std::map<std::string, bool> heard;
    const std::vector<std::string> keys = {"a", "b", "c"};
    TimeMs t = 0;
    for (int step = 0; step < 50; ++step) {
      ++t;
      if (rng() % 4 == 0) {
        a.rollover(t);
        for (auto& [k, h] : heard) {
          ASSERT_EQ(a.property(k, "stale"), h ? 0 : 1);
          h = false;
        }
      } else {
        const auto& k = keys[rng() % keys.size()];
        a.report_beacon(k, t);
        heard[k] = true;
      }
    }
  }
}

}  // namespace
}  // namespace cpm::rt
