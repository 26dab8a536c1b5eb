#include "cpm/runtime/clock.hpp"

#include <stdexcept>

namespace cpm::rt {

Clock::Clock(ClockMode mode) : mode_(mode), start_(std::chrono::steady_clock::now()) {}

void Clock::advance(TimeMs dt) {
  if (mode_ != ClockMode::kVirtual) throw std::logic_error("advance() on a wall clock");
  if (dt < 0) throw std::invalid_argument("negative clock step");
  now_ += dt;
}

void Clock::sync_to(TimeMs t) {
  if (t > now_) now_ = t;
}

TimeMs Clock::wall_elapsed() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               start_)
      .count();
}

}  // namespace cpm::rt
