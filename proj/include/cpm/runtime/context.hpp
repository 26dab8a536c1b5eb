#pragma once

// Context registry: sensors hold snapshots written by sensor_update(),
// actuators forward writes to bound callbacks, guarded functions fire on a
// false->true transition of their guard, and reflective arrays track
// per-key beacon counts with staleness per observation period.
//
// Not synchronized; Runtime provides the serialized facade.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cpm/ext_reflective.hpp"
#include "cpm/runtime/clock.hpp"
#include "cpm/runtime/expr.hpp"

namespace cpm::rt {

using Value = expr::Value;
using reflective::Direction;

class UnknownContextVariable : public std::out_of_range {
 public:
  explicit UnknownContextVariable(const std::string& what) : std::out_of_range(what) {}
};

inline constexpr TimeMs kDefaultObservationPeriod = 60000;

class ReflectiveArray {
 public:
  struct Entry {
    std::uint64_t beacons_cur_period = 0;
    std::uint64_t beacons_last_period = 0;
    std::uint64_t silent_periods = 0;
    bool stale = false;
    std::map<std::string, Value> props;
  };

  explicit ReflectiveArray(std::string name, TimeMs observation_period = kDefaultObservationPeriod);

  const std::string& name() const { return name_; }
  TimeMs observation_period() const { return period_; }
  std::size_t size() const { return keys_.size(); }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const Entry& entry(const std::string& key) const;
  const std::vector<std::string>& keys() const { return keys_; }

  /// Creates the entry on first sight, counts the beacon and clears staleness.
  void report_beacon(const std::string& key, TimeMs at_time);
  /// Closes an observation period.
  void rollover(TimeMs at_time);
  /// Iterates keys in insertion order; std::nullopt after the last one.
  std::optional<std::string> anext(std::size_t& cursor) const;

  void set_property(const std::string& key, const std::string& prop, Value v);
  /// Built-in properties: beacons (last closed period), beacons_cur_period,
  /// silent_periods, stale. Anything else is a user property (0 when unset).
  Value property(const std::string& key, const std::string& prop) const;

 private:
  Entry& touch(const std::string& key);

  std::string name_;
  TimeMs period_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, Entry> entries_;
  std::optional<TimeMs> last_rollover_;
};

struct GuardFiring {
  std::string body_fn;
  std::string guard_src;
};

class ContextRegistry {
 public:
  using ActuatorCallback = std::function<void(const std::string& name, Value value)>;
  using GuardBody = std::function<void()>;

  void register_var(const std::string& name, Direction direction, std::string binding = {});
  bool has_var(const std::string& name) const { return vars_.count(name) != 0; }
  Direction direction(const std::string& name) const;
  const std::string& binding(const std::string& name) const;

  /// Named integer constants visible to guard expressions (e.g. WD_FIRED).
  void define_constant(const std::string& name, Value v) { constants_[name] = v; }
  std::optional<Value> constant(const std::string& name) const;

  Value sensor(const std::string& name) const;
  /// Replaces the snapshot, re-evaluates guards mentioning `name` and invokes
  /// the bodies of those that became true.
  std::vector<GuardFiring> sensor_update(const std::string& name, Value value);

  void bind_actuator(const std::string& binding, ActuatorCallback cb);
  /// Returns false (and records a warning) when no callback is bound.
  bool actuator_write(const std::string& name, Value value);

  /// Compiles `guard_src`. Throws std::invalid_argument when it references
  /// no registered sensor, expr::ExprError on syntax errors.
  void register_guard(const std::string& body_fn, const std::string& guard_src, GuardBody body);

  ReflectiveArray& register_array(const std::string& name,
                                  TimeMs observation_period = kDefaultObservationPeriod);
  bool has_array(const std::string& name) const { return arrays_.count(name) != 0; }
  ReflectiveArray& array(const std::string& name);
  const ReflectiveArray& array(const std::string& name) const;

  void set_pipeline_string(std::string s) { pipeline_ = std::move(s); }
  const std::string& pipeline_string() const { return pipeline_; }

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  struct Var {
    Direction direction;
    std::string binding;
    Value snapshot = 0;
  };
  struct Guard {
    std::string body_fn;
    std::string src;
    expr::NodePtr expr;
    std::vector<std::string> sensors;
    bool last_value = false;
    GuardBody body;
  };

  const Var& var(const std::string& name) const;
  bool evaluate(const Guard& g) const;

  std::map<std::string, Var> vars_;
  std::map<std::string, Value> constants_;
  std::map<std::string, ActuatorCallback> actuators_;
  std::vector<Guard> guards_;
  std::map<std::string, ReflectiveArray> arrays_;
  std::string pipeline_;
  std::vector<std::string> warnings_;
};

}  // namespace cpm::rt
