#include "cpm/runtime/runtime.hpp"

#include <chrono>
#include <stdexcept>

namespace cpm::rt {

Runtime::Runtime(ClockMode mode, RuntimeOptions options)
    : options_(options), clock_(std::make_shared<Clock>(mode)) {
  options_.policy.validate();
}

Runtime::~Runtime() { stop_wall_driver(); }

TimeMs Runtime::now() const {
  auto g = lock();
  return clock_->now();
}

void Runtime::advance(TimeMs dt) {
  auto g = lock();
  if (clock_->mode() != ClockMode::kVirtual) throw std::logic_error("advance() on a wall clock");
  if (dt < 0) throw std::invalid_argument("negative clock step");
  advance_to(clock_->now() + dt);
}

void Runtime::advance_to(TimeMs t) {
  auto g = lock();
  if (tom_) {
    tom_->advance_to(t);
  } else {
    clock_->sync_to(t);
  }
}

void Runtime::record(TraceKind kind, std::string name, std::uint64_t instance, std::string value) {
  trace_.push_back({clock_->now(), kind, std::move(name), instance, std::move(value)});
}

void Runtime::warn(std::string message) { warnings_.push_back(std::move(message)); }

// ---- redundancy ------------------------------------------------------------

void Runtime::red_storage(const std::string& name, int replicas) {
  auto g = lock();
  if (replicas_.count(name)) {
    warn("redundant variable '" + name + "' defined twice; first definition kept");
    return;
  }
  replicas_.emplace(name, ReplicaSet<Value>(name, replicas, options_.policy, options_.bank_stride_bytes));
}

void Runtime::red_extern(const std::string& name) {
  auto g = lock();
  // Storage lives in another unit; it must be defined before first use.
  (void)name;
}

bool Runtime::has_redundant(const std::string& name) const {
  auto g = lock();
  return replicas_.count(name) != 0;
}

ReplicaSet<Value>& Runtime::replica(const std::string& name) {
  const auto it = replicas_.find(name);
  if (it == replicas_.end()) throw std::out_of_range("redundant variable '" + name + "' has no storage");
  return it->second;
}

void Runtime::red_write(const std::string& name, Value v) {
  auto g = lock();
  replica(name).write(v);
}

Value Runtime::red_read(const std::string& name) {
  auto g = lock();
  auto& rs = replica(name);
  try {
    const auto out = rs.read();
    if (out.adaptation) {
      record(TraceKind::kAdapt, name, rs.stats().reads,
             std::to_string(out.adaptation->from) + "->" + std::to_string(out.adaptation->to));
    }
    return out.value;
  } catch (const NoMajority&) {
    record(TraceKind::kVoteFail, name, rs.stats().vote_failures, "");
    throw;
  }
}

void Runtime::inject_fault(const std::string& name, std::size_t index, Value corrupt) {
  auto g = lock();
  replica(name).inject_fault(index, corrupt);
}

ReplicaSet<Value> Runtime::replica_set(const std::string& name) const {
  auto g = lock();
  const auto it = replicas_.find(name);
  if (it == replicas_.end()) throw std::out_of_range("redundant variable '" + name + "' has no storage");
  return it->second;
}

// ---- context ---------------------------------------------------------------

void Runtime::ctx_register(const std::string& name, Direction dir, const std::string& binding) {
  auto g = lock();
  context_.register_var(name, dir, binding);
}

Value Runtime::ctx_read(const std::string& name) const {
  auto g = lock();
  return context_.sensor(name);
}

void Runtime::ctx_write(const std::string& name, Value v) {
  auto g = lock();
  record(TraceKind::kActuate, name, 0, std::to_string(v));
  if (!context_.actuator_write(name, v)) warn(context_.warnings().back());
}

std::vector<GuardFiring> Runtime::sensor_update(const std::string& name, Value v) {
  auto g = lock();
  return context_.sensor_update(name, v);
}

void Runtime::bind_actuator(const std::string& binding, ContextRegistry::ActuatorCallback cb) {
  auto g = lock();
  context_.bind_actuator(binding, std::move(cb));
}

void Runtime::guard_register(const std::string& fn, const std::string& guard_src) {
  auto g = lock();
  context_.register_guard(fn, guard_src, [this, fn] {
    record(TraceKind::kGuard, fn, 0, "");
    if (has_function(fn)) {
      call_function(fn);
    } else {
      warn("guard body '" + fn + "' is not bound");
    }
  });
}

void Runtime::define_constant(const std::string& name, Value v) {
  auto g = lock();
  context_.define_constant(name, v);
}

// ---- arrays ----------------------------------------------------------------

void Runtime::arr_register(const std::string& name) {
  auto g = lock();
  context_.register_array(name, options_.observation_period);
}

Value Runtime::arr_get(const std::string& name, const std::string& key, const std::string& prop) const {
  auto g = lock();
  return context_.array(name).property(key, prop);
}

void Runtime::arr_report_beacon(const std::string& name, const std::string& key) {
  auto g = lock();
  context_.array(name).report_beacon(key, clock_->now());
}

void Runtime::arr_rollover(const std::string& name) {
  auto g = lock();
  context_.array(name).rollover(clock_->now());
}

void Runtime::arr_set(const std::string& name, const std::string& key, const std::string& prop, Value v) {
  auto g = lock();
  context_.array(name).set_property(key, prop, v);
}

std::optional<std::string> Runtime::anext(const std::string& name, std::size_t& cursor) const {
  auto g = lock();
  return context_.array(name).anext(cursor);
}

// ---- cyclic ----------------------------------------------------------------

Tom& Runtime::ensure_tom() {
  if (!tom_) {
    tom_ = std::make_unique<Tom>(clock_);
    tom_->set_fire_observer([this](const FireRecord& r) {
      trace_.push_back({r.time, TraceKind::kFire, r.subid, r.instance_no, ""});
    });
  }
  return *tom_;
}

void Runtime::cycle_register(const std::string& fn) {
  auto g = lock();
  cyclic_.try_emplace(fn);
}

void Runtime::cycle_set(const std::string& fn, Value period) {
  auto g = lock();
  const auto it = cyclic_.find(fn);
  if (it == cyclic_.end()) throw std::out_of_range("'" + fn + "' is not a registered cyclic method");
  if (period < 0) throw std::invalid_argument("negative Cycle for '" + fn + "'");
  Tom& tom = ensure_tom();
  auto& handle = it->second;
  if (period == 0) {
    if (handle) {
      tom.remove(*handle);
    } else {
      warn("Cycle = 0 on '" + fn + "' that never started");
    }
    return;
  }
  if (!handle) {
    handle = tom.declare(fn, period, /*cyclic=*/true, /*enabled=*/true);
    tom.set_action(*handle, [this, fn](Tom&, const FireRecord&) {
      if (has_function(fn)) {
        call_function(fn);
      } else {
        warn("cyclic method '" + fn + "' has no body bound");
      }
    });
    tom.insert(*handle);
    return;
  }
  tom.set_deadline(*handle, period);
  if (tom.object(*handle).queued) {
    tom.renew(*handle);
  } else {
    tom.insert(*handle);
  }
}

Value Runtime::cycle_get(const std::string& fn) const {
  auto g = lock();
  const auto it = cyclic_.find(fn);
  if (it == cyclic_.end()) throw std::out_of_range("'" + fn + "' is not a registered cyclic method");
  if (!it->second || !tom_) return 0;
  const auto& o = tom_->object(*it->second);
  return o.queued ? o.deadline : 0;
}

void Runtime::schedule_at(TimeMs t, const std::string& subid, std::function<void()> action) {
  auto g = lock();
  if (t < clock_->now()) throw std::invalid_argument("'" + subid + "' scheduled in the past");
  Tom& tom = ensure_tom();
  const auto h = tom.declare(subid, t - clock_->now(), /*cyclic=*/false, /*enabled=*/true);
  tom.set_action(h, [action = std::move(action)](Tom&, const FireRecord&) { action(); });
  tom.insert(h);
}

bool Runtime::has_tom() const {
  auto g = lock();
  return tom_ != nullptr;
}

const Tom& Runtime::tom() const {
  auto g = lock();
  if (!tom_) throw std::logic_error("no timeout manager yet: no Cycle was ever set");
  return *tom_;
}

// ---- host functions --------------------------------------------------------

void Runtime::bind_function(const std::string& name, HostFunction fn) {
  auto g = lock();
  functions_[name] = std::move(fn);
}

bool Runtime::has_function(const std::string& name) const {
  auto g = lock();
  return functions_.count(name) != 0;
}

Value Runtime::call_function(const std::string& name, const std::vector<Value>& args) {
  auto g = lock();
  const auto it = functions_.find(name);
  if (it == functions_.end()) throw std::out_of_range("unknown function '" + name + "'");
  auto fn = it->second;
  return fn(*this, args);
}

void Runtime::set_pipeline_string(const std::string& s) {
  auto g = lock();
  context_.set_pipeline_string(s);
}

std::string Runtime::pipeline_string() const {
  auto g = lock();
  return context_.pipeline_string();
}

std::vector<TraceEvent> Runtime::trace() const {
  auto g = lock();
  return trace_;
}

std::string Runtime::trace_csv() const {
  auto g = lock();
  return to_csv(trace_);
}

std::vector<std::string> Runtime::warnings() const {
  auto g = lock();
  auto out = warnings_;
  if (tom_) out.insert(out.end(), tom_->warnings().begin(), tom_->warnings().end());
  return out;
}

// ---- wall clock ------------------------------------------------------------

void Runtime::start_wall_driver(TimeMs tick) {
  auto g = lock();
  if (clock_->mode() != ClockMode::kWall) throw std::logic_error("wall driver needs a wall clock");
  if (driver_.joinable()) return;
  if (tick <= 0) throw std::invalid_argument("tick must be positive");
  driver_ = std::jthread([this, tick](std::stop_token stop) {
    while (!stop.stop_requested()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(tick));
      auto lk = lock();
      advance_to(clock_->wall_elapsed());
    }
  });
}

void Runtime::stop_wall_driver() {
  if (driver_.joinable()) {
    driver_.request_stop();
    driver_.join();
  }
}

}  // namespace cpm::rt
