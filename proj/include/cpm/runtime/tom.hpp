#pragma once

// Time-out manager. Timeout objects are declared once, then inserted into
// the pending list, controlled (enable/disable/set_deadline/renew) and
// deleted. advance() fires every enabled object whose deadline falls inside
// the step, in (next_fire, insertion sequence) order. Cyclic objects re-arm
// at a fixed rate: next_fire += deadline.
//
// Not synchronized; Runtime provides the serialized facade.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cpm/runtime/clock.hpp"

namespace cpm::rt {

using TimeoutHandle = std::size_t;

struct FireRecord {
  TimeMs time = 0;
  std::string subid;
  std::uint64_t instance_no = 0;

  friend bool operator==(const FireRecord&, const FireRecord&) = default;
};

class Tom;

struct TimeoutObject {
  using Action = std::function<void(Tom&, const FireRecord&)>;

  TimeoutHandle id = 0;
  std::string subid;
  TimeMs deadline = 0;
  bool cyclic = false;
  bool enabled = true;
  bool queued = false;
  TimeMs next_fire = 0;
  std::uint64_t sequence = 0;  // insertion order, tie-break for equal deadlines
  std::uint64_t instances = 0;
  Action action;
};

class Tom {
 public:
  explicit Tom(std::shared_ptr<Clock> clock = std::make_shared<Clock>());

  TimeMs now() const { return clock_->now(); }
  const Clock& clock() const { return *clock_; }

  /// tom_declare: creates an object that is not yet pending.
  TimeoutHandle declare(std::string subid, TimeMs deadline, bool cyclic, bool enabled = true);
  void set_action(TimeoutHandle h, TimeoutObject::Action action);

  /// Arms the object: next_fire = now + deadline.
  void insert(TimeoutHandle h);
  /// tom_delete. Deleting an object that is not pending is a no-op that is
  /// recorded in warnings().
  void remove(TimeoutHandle h);
  void enable(TimeoutHandle h);
  /// Keeps the object pending but suppresses firing.
  void disable(TimeoutHandle h);
  /// Changes the period without re-arming.
  void set_deadline(TimeoutHandle h, TimeMs deadline);
  /// Re-arms (next_fire = now + deadline) and enables. The object must be pending.
  void renew(TimeoutHandle h);

  /// Virtual clocks only: fires everything due in (now, now + dt].
  std::vector<FireRecord> advance(TimeMs dt);
  /// Fires everything due up to `t` and moves the clock there.
  std::vector<FireRecord> advance_to(TimeMs t);

  const TimeoutObject& object(TimeoutHandle h) const;
  /// Pending objects ordered by (next_fire, sequence), enabled or not.
  std::vector<TimeoutHandle> pending() const;
  const std::vector<FireRecord>& fired_log() const { return fired_log_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void set_fire_observer(std::function<void(const FireRecord&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  using Key = std::tuple<TimeMs, std::uint64_t, TimeoutHandle>;

  TimeoutObject& at(TimeoutHandle h);
  void schedule(TimeoutObject& o);
  void unschedule(const TimeoutObject& o);

  std::shared_ptr<Clock> clock_;
  std::vector<TimeoutObject> objects_;
  std::set<Key> due_;  // pending and enabled
  std::uint64_t next_sequence_ = 0;
  std::vector<FireRecord> fired_log_;
  std::vector<std::string> warnings_;
  std::function<void(const FireRecord&)> observer_;
};

}  // namespace cpm::rt
