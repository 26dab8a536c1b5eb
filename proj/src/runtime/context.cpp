#include "cpm/runtime/context.hpp"

#include <algorithm>

namespace cpm::rt {

// ---- ReflectiveArray -------------------------------------------------------

ReflectiveArray::ReflectiveArray(std::string name, TimeMs observation_period)
    : name_(std::move(name)), period_(observation_period) {
  if (period_ <= 0) throw std::invalid_argument("observation period must be positive");
}

const ReflectiveArray::Entry& ReflectiveArray::entry(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw UnknownContextVariable("no key '" + key + "' in reflective array '" + name_ + "'");
  }
  return it->second;
}

ReflectiveArray::Entry& ReflectiveArray::touch(const std::string& key) {
  auto [it, inserted] = entries_.try_emplace(key);
  if (inserted) keys_.push_back(key);
  return it->second;
}

void ReflectiveArray::report_beacon(const std::string& key, TimeMs /*at_time*/) {
  Entry& e = touch(key);
  ++e.beacons_cur_period;
  e.stale = false;
}

void ReflectiveArray::rollover(TimeMs at_time) {
  if (last_rollover_ && at_time < *last_rollover_) {
    throw std::invalid_argument("rollover of '" + name_ + "' moves back in time");
  }
  last_rollover_ = at_time;
  for (auto& [key, e] : entries_) {
    e.beacons_last_period = e.beacons_cur_period;
    e.beacons_cur_period = 0;
    if (e.beacons_last_period == 0) {
      ++e.silent_periods;
    } else {
      e.silent_periods = 0;
    }
    e.stale = e.silent_periods >= 1;
  }
}

std::optional<std::string> ReflectiveArray::anext(std::size_t& cursor) const {
  if (cursor >= keys_.size()) return std::nullopt;
  return keys_[cursor++];
}

void ReflectiveArray::set_property(const std::string& key, const std::string& prop, Value v) {
  touch(key).props[prop] = v;
}

Value ReflectiveArray::property(const std::string& key, const std::string& prop) const {
  const Entry& e = entry(key);
  if (prop == "beacons") return static_cast<Value>(e.beacons_last_period);
  if (prop == "beacons_cur_period") return static_cast<Value>(e.beacons_cur_period);
  if (prop == "silent_periods") return static_cast<Value>(e.silent_periods);
  if (prop == "stale") return e.stale ? 1 : 0;
  const auto it = e.props.find(prop);
  return it == e.props.end() ? 0 : it->second;
}

// ---- ContextRegistry -------------------------------------------------------

namespace {

class GuardEnv final : public expr::Environment {
 public:
  GuardEnv(const ContextRegistry& reg) : reg_(reg) {}
  Value identifier(const std::string& name) override {
    if (reg_.has_var(name)) return reg_.sensor(name);
    if (const auto c = reg_.constant(name)) return *c;
    throw expr::ExprError("guard references unknown name '" + name + "'");
  }
  Value call(const std::string& callee, const std::vector<expr::NodePtr>&) override {
    throw expr::ExprError("guards may not call functions ('" + callee + "')");
  }

 private:
  const ContextRegistry& reg_;
};

}  // namespace

void ContextRegistry::register_var(const std::string& name, Direction direction,
                                   std::string binding) {
  if (binding.empty()) binding = name;
  auto [it, inserted] = vars_.try_emplace(name, Var{direction, binding, 0});
  if (!inserted) {
    if (it->second.direction != direction) {
      throw std::invalid_argument("context variable '" + name + "' re-registered with another direction");
    }
    it->second.binding = std::move(binding);
  }
}

const ContextRegistry::Var& ContextRegistry::var(const std::string& name) const {
  const auto it = vars_.find(name);
  if (it == vars_.end()) throw UnknownContextVariable("unknown context variable '" + name + "'");
  return it->second;
}

Direction ContextRegistry::direction(const std::string& name) const { return var(name).direction; }
const std::string& ContextRegistry::binding(const std::string& name) const { return var(name).binding; }

std::optional<Value> ContextRegistry::constant(const std::string& name) const {
  const auto it = constants_.find(name);
  if (it == constants_.end()) return std::nullopt;
  return it->second;
}

Value ContextRegistry::sensor(const std::string& name) const {
  const Var& v = var(name);
  if (v.direction == Direction::kActuator) {
    throw UnknownContextVariable("'" + name + "' is an actuator, not a sensor");
  }
  return v.snapshot;
}

bool ContextRegistry::evaluate(const Guard& g) const {
  GuardEnv env(*this);
  return expr::evaluate(*g.expr, env) != 0;
}

std::vector<GuardFiring> ContextRegistry::sensor_update(const std::string& name, Value value) {
  const auto it = vars_.find(name);
  if (it == vars_.end() || it->second.direction == Direction::kActuator) {
    throw UnknownContextVariable("unknown sensor '" + name + "'");
  }
  it->second.snapshot = value;

  std::vector<GuardFiring> fired;
  std::vector<GuardBody> bodies;
  for (auto& g : guards_) {
    if (std::find(g.sensors.begin(), g.sensors.end(), name) == g.sensors.end()) continue;
    const bool now = evaluate(g);
    if (now && !g.last_value) {
      fired.push_back({g.body_fn, g.src});
      if (g.body) bodies.push_back(g.body);
    }
    g.last_value = now;
  }
  // Bodies run after every guard has seen the new snapshot.
  for (auto& body : bodies) body();
  return fired;
}

void ContextRegistry::bind_actuator(const std::string& binding, ActuatorCallback cb) {
  actuators_[binding] = std::move(cb);
}

bool ContextRegistry::actuator_write(const std::string& name, Value value) {
  const auto it = vars_.find(name);
  if (it == vars_.end() || it->second.direction == Direction::kSensor) {
    throw UnknownContextVariable("unknown actuator '" + name + "'");
  }
  const auto cb = actuators_.find(it->second.binding);
  if (cb == actuators_.end() || !cb->second) {
    warnings_.push_back("write to actuator '" + name + "' with no bound callback ignored");
    return false;
  }
  auto callback = cb->second;
  callback(name, value);
  return true;
}

void ContextRegistry::register_guard(const std::string& body_fn, const std::string& guard_src,
                                     GuardBody body) {
  Guard g;
  g.body_fn = body_fn;
  g.src = guard_src;
  g.expr = expr::parse(guard_src);
  for (const auto& id : expr::identifiers(*g.expr)) {
    const auto it = vars_.find(id);
    if (it != vars_.end() && it->second.direction != Direction::kActuator) g.sensors.push_back(id);
  }
  if (g.sensors.empty()) {
    throw std::invalid_argument("guard of '" + body_fn + "' references no registered sensor: " +
                                guard_src);
  }
  g.body = std::move(body);
  g.last_value = evaluate(g);
  guards_.push_back(std::move(g));
}

ReflectiveArray& ContextRegistry::register_array(const std::string& name, TimeMs observation_period) {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) it = arrays_.emplace(name, ReflectiveArray(name, observation_period)).first;
  return it->second;
}

ReflectiveArray& ContextRegistry::array(const std::string& name) {
  const auto it = arrays_.find(name);
  if (it == arrays_.end()) throw UnknownContextVariable("unknown reflective array '" + name + "'");
  return it->second;
}

const ReflectiveArray& ContextRegistry::array(const std::string& name) const {
  const auto it = arrays_.find(name);
  if (it == arrays_.end()) throw UnknownContextVariable("unknown reflective array '" + name + "'");
  return it->second;
}

}  // namespace cpm::rt
