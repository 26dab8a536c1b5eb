#pragma once

// Serialized facade over the replica sets, the timeout manager and the
// context registry. Every public operation takes one recursive lock, so
// callers on several threads observe a single total order and callbacks may
// re-enter the runtime. In virtual-clock mode nothing runs in the background.
//
// The cpm_* methods mirror the ABI emitted by the extension passes.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cpm/runtime/clock.hpp"
#include "cpm/runtime/context.hpp"
#include "cpm/runtime/replica_set.hpp"
#include "cpm/runtime/tom.hpp"
#include "cpm/runtime/trace.hpp"

namespace cpm::rt {

struct RuntimeOptions {
  AdaptPolicy policy;
  std::size_t bank_stride_bytes = 4096;
  TimeMs observation_period = kDefaultObservationPeriod;
};

class Runtime {
 public:
  /// Host functions back cyclic methods and guard bodies.
  using HostFunction = std::function<Value(Runtime&, const std::vector<Value>& args)>;

  explicit Runtime(ClockMode mode = ClockMode::kVirtual, RuntimeOptions options = {});
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  TimeMs now() const;
  /// Virtual mode: fires every timeout due in (now, now + dt].
  void advance(TimeMs dt);
  void advance_to(TimeMs t);

  // Redundant variables.
  void red_storage(const std::string& name, int replicas);
  void red_extern(const std::string& name);
  bool has_redundant(const std::string& name) const;
  void red_write(const std::string& name, Value v);
  /// Throws NoMajority after logging a vote_fail event.
  Value red_read(const std::string& name);
  void inject_fault(const std::string& name, std::size_t replica, Value corrupt);
  /// Copy of the replica set for inspection.
  ReplicaSet<Value> replica_set(const std::string& name) const;

  // Context variables.
  void ctx_register(const std::string& name, Direction dir, const std::string& binding = {});
  Value ctx_read(const std::string& name) const;
  void ctx_write(const std::string& name, Value v);
  std::vector<GuardFiring> sensor_update(const std::string& name, Value v);
  void bind_actuator(const std::string& binding, ContextRegistry::ActuatorCallback cb);
  /// The guard body is the host function named `fn`, called with no arguments.
  void guard_register(const std::string& fn, const std::string& guard_src);
  void define_constant(const std::string& name, Value v);

  // Reflective arrays.
  void arr_register(const std::string& name);
  Value arr_get(const std::string& name, const std::string& key, const std::string& prop) const;
  void arr_report_beacon(const std::string& name, const std::string& key);
  void arr_rollover(const std::string& name);
  void arr_set(const std::string& name, const std::string& key, const std::string& prop, Value v);
  std::optional<std::string> anext(const std::string& name, std::size_t& cursor) const;

  // Cyclic methods.
  void cycle_register(const std::string& fn);
  /// 0 cancels; the first nonzero value starts the method, later ones change
  /// the period and restart it.
  void cycle_set(const std::string& fn, Value period);
  /// Current period, 0 when not running.
  Value cycle_get(const std::string& fn) const;
  /// One-shot timeout firing `action` at absolute time `t` (>= now). Ties
  /// with other timeouts resolve in insertion order.
  void schedule_at(TimeMs t, const std::string& subid, std::function<void()> action);
  bool has_tom() const;
  /// The lazily created timeout manager. Throws std::logic_error before the
  /// first cycle_set.
  const Tom& tom() const;

  // Host functions.
  void bind_function(const std::string& name, HostFunction fn);
  bool has_function(const std::string& name) const;
  Value call_function(const std::string& name, const std::vector<Value>& args = {});

  void set_pipeline_string(const std::string& s);
  std::string pipeline_string() const;

  std::vector<TraceEvent> trace() const;
  std::string trace_csv() const;
  std::vector<std::string> warnings() const;

  /// Wall mode only: a background thread moves the timeout manager to wall
  /// time every `tick` milliseconds until stop_wall_driver() or destruction.
  void start_wall_driver(TimeMs tick = 1);
  void stop_wall_driver();

  std::unique_lock<std::recursive_mutex> lock() const { return std::unique_lock(mu_); }

 private:
  ReplicaSet<Value>& replica(const std::string& name);
  Tom& ensure_tom();
  void record(TraceKind kind, std::string name, std::uint64_t instance, std::string value);
  void warn(std::string message);

  mutable std::recursive_mutex mu_;
  RuntimeOptions options_;
  std::shared_ptr<Clock> clock_;
  std::unique_ptr<Tom> tom_;
  std::map<std::string, ReplicaSet<Value>> replicas_;
  std::map<std::string, std::optional<TimeoutHandle>> cyclic_;
  ContextRegistry context_;
  std::map<std::string, HostFunction> functions_;
  std::vector<TraceEvent> trace_;
  std::vector<std::string> warnings_;
  std::jthread driver_;
};

}  // namespace cpm::rt
