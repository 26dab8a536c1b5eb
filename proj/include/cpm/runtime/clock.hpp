#pragma once

#include <chrono>
#include <cstdint>

namespace cpm::rt {

/// Milliseconds since the clock's epoch.
using TimeMs = std::int64_t;

enum class ClockMode { kVirtual, kWall };

/// Virtual clocks only move through advance(); wall clocks follow
/// std::chrono::steady_clock and are moved by a driver via sync_to().
class Clock {
 public:
  explicit Clock(ClockMode mode = ClockMode::kVirtual);

  ClockMode mode() const { return mode_; }
  TimeMs now() const { return now_; }

  /// Virtual mode only. Throws std::logic_error in wall mode and
  /// std::invalid_argument for negative steps.
  void advance(TimeMs dt);

  /// Moves the clock forward to `t` (no-op when t <= now).
  void sync_to(TimeMs t);

  /// Milliseconds of real time since construction.
  TimeMs wall_elapsed() const;

 private:
  ClockMode mode_;
  TimeMs now_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace cpm::rt
