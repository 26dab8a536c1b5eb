#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpm/runtime/clock.hpp"

namespace cpm::rt {

enum class TraceKind { kFire, kGuard, kActuate, kVoteFail, kAdapt };

const char* to_string(TraceKind kind);

struct TraceEvent {
  TimeMs time = 0;
  TraceKind kind = TraceKind::kFire;
  std::string name;
  std::uint64_t instance = 0;
  std::string value;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline constexpr const char* kTraceCsvHeader = "time_ms,kind,name,instance,value";

/// One CSV record, no trailing newline. Fields containing a comma, quote or
/// newline are quoted.
std::string to_csv(const TraceEvent& e);
/// Header line plus one line per event, each newline-terminated.
std::string to_csv(const std::vector<TraceEvent>& events);

/// Quotes `field` for CSV when needed.
std::string csv_field(const std::string& field);

}  // namespace cpm::rt
