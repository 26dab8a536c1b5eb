#include "cpm/runtime/tom.hpp"

#include <algorithm>
#include <stdexcept>

namespace cpm::rt {

Tom::Tom(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {
  if (!clock_) throw std::invalid_argument("Tom requires a clock");
}

TimeoutObject& Tom::at(TimeoutHandle h) {
  if (h >= objects_.size()) throw std::out_of_range("unknown timeout handle");
  return objects_[h];
}

const TimeoutObject& Tom::object(TimeoutHandle h) const {
  if (h >= objects_.size()) throw std::out_of_range("unknown timeout handle");
  return objects_[h];
}

TimeoutHandle Tom::declare(std::string subid, TimeMs deadline, bool cyclic, bool enabled) {
  if (deadline < 0 || (cyclic && deadline == 0)) {
    throw std::invalid_argument("timeout '" + subid + "': deadline must be positive");
  }
  TimeoutObject o;
  o.id = objects_.size();
  o.subid = std::move(subid);
  o.deadline = deadline;
  o.cyclic = cyclic;
  o.enabled = enabled;
  objects_.push_back(std::move(o));
  return objects_.back().id;
}

void Tom::set_action(TimeoutHandle h, TimeoutObject::Action action) { at(h).action = std::move(action); }

void Tom::schedule(TimeoutObject& o) {
  if (o.queued && o.enabled) due_.insert({o.next_fire, o.sequence, o.id});
}

void Tom::unschedule(const TimeoutObject& o) { due_.erase({o.next_fire, o.sequence, o.id}); }

void Tom::insert(TimeoutHandle h) {
  TimeoutObject& o = at(h);
  if (o.queued) {
    warnings_.push_back("insert of already pending timeout '" + o.subid + "' ignored");
    return;
  }
  o.queued = true;
  o.sequence = next_sequence_++;
  o.next_fire = now() + o.deadline;
  schedule(o);
}

void Tom::remove(TimeoutHandle h) {
  TimeoutObject& o = at(h);
  if (!o.queued) {
    warnings_.push_back("delete of timeout '" + o.subid + "' that is not pending");
    return;
  }
  unschedule(o);
  o.queued = false;
}

void Tom::enable(TimeoutHandle h) {
  TimeoutObject& o = at(h);
  if (o.enabled) return;
  o.enabled = true;
  if (o.queued && o.next_fire <= now()) {
    if (o.cyclic) {
      // Skip the slots missed while disabled, keeping the phase.
      o.next_fire += ((now() - o.next_fire) / o.deadline + 1) * o.deadline;
    } else {
      o.next_fire = now();
    }
  }
  schedule(o);
}

void Tom::disable(TimeoutHandle h) {
  TimeoutObject& o = at(h);
  if (!o.enabled) return;
  unschedule(o);
  o.enabled = false;
}

void Tom::set_deadline(TimeoutHandle h, TimeMs deadline) {
  TimeoutObject& o = at(h);
  if (deadline < 0 || (o.cyclic && deadline == 0)) {
    throw std::invalid_argument("timeout '" + o.subid + "': deadline must be positive");
  }
  o.deadline = deadline;
}

void Tom::renew(TimeoutHandle h) {
  TimeoutObject& o = at(h);
  if (!o.queued) throw std::logic_error("renew of timeout '" + o.subid + "' before insert");
  unschedule(o);
  o.enabled = true;
  o.next_fire = now() + o.deadline;
  schedule(o);
}

std::vector<FireRecord> Tom::advance(TimeMs dt) {
  if (clock_->mode() != ClockMode::kVirtual) throw std::logic_error("advance() on a wall clock");
  if (dt < 0) throw std::invalid_argument("negative clock step");
  return advance_to(now() + dt);
}

std::vector<FireRecord> Tom::advance_to(TimeMs t) {
  std::vector<FireRecord> fired;
  while (!due_.empty() && std::get<0>(*due_.begin()) <= t) {
    const auto [when, seq, h] = *due_.begin();
    due_.erase(due_.begin());
    TimeoutObject& o = objects_[h];
    clock_->sync_to(when);
    if (o.cyclic) {
      o.next_fire = when + o.deadline;
      schedule(o);
    } else {
      o.queued = false;
    }
    FireRecord record{when, o.subid, ++o.instances};
    fired_log_.push_back(record);
    fired.push_back(record);
    if (observer_) observer_(record);
    // Copy: the action may re-declare objects and invalidate `o`.
    if (auto action = o.action) action(*this, record);
  }
  clock_->sync_to(t);
  return fired;
}

std::vector<TimeoutHandle> Tom::pending() const {
  std::vector<const TimeoutObject*> queued;
  for (const auto& o : objects_) {
    if (o.queued) queued.push_back(&o);
  }
  std::sort(queued.begin(), queued.end(), [](const TimeoutObject* a, const TimeoutObject* b) {
    return std::tie(a->next_fire, a->sequence) < std::tie(b->next_fire, b->sequence);
  });
  std::vector<TimeoutHandle> out;
  for (const auto* o : queued) out.push_back(o->id);
  return out;
}

}  // namespace cpm::rt
