#pragma once

// End-to-end case studies over the runtime with a virtual clock:
//
//  * run_wdt: a watchdog timer whose state lives in the redundant context
//    variable `watchdog` and whose period check is the cyclic method
//    `wdt_tick`.
//  * run_switchboard: beacon observations fed into the reflective array
//    `linkbeacons`, with one routing-metric record per peer and observation
//    cycle. The latest rate estimate per peer plays the role of `linkrates`.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpm/runtime/runtime.hpp"

namespace cpm::scenarios {

using rt::TimeMs;
using rt::Value;

// Encoded watchdog conditions; non-negative values count timer resets.
inline constexpr Value WD_END = -4;
inline constexpr Value WD_FIRED = -3;
inline constexpr Value WD_ACTIVE = -2;
inline constexpr Value WD_STARTED = -1;

/// "WD_FIRED" etc. for conditions, the decimal count otherwise.
std::string wdt_state_name(Value state);

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FaultInjection {
  TimeMs time = 0;
  std::size_t replica = 0;
  Value corrupt = 0;
  friend bool operator==(const FaultInjection&, const FaultInjection&) = default;
};

struct WdtParams {
  TimeMs period = 100;
  std::vector<TimeMs> heartbeats;
  TimeMs horizon = 1000;
  int replicas = 3;
  std::vector<FaultInjection> faults;
  /// Writes to the watchdog actuator; a write restarts a fired WDT.
  std::vector<TimeMs> actuator_writes;

  /// Throws InvalidParams.
  void validate() const;
};

struct WdtEvent {
  TimeMs time = 0;
  std::string event;
  std::string detail;
  friend bool operator==(const WdtEvent&, const WdtEvent&) = default;
};

using StateTrace = std::vector<std::pair<TimeMs, Value>>;

struct WdtResult {
  StateTrace states;
  std::vector<WdtEvent> events;
  std::vector<rt::TraceEvent> runtime_trace;

  /// Last non-negative state reached, if any.
  std::optional<Value> final_counter() const;
  std::size_t count(Value state) const;
  /// CSV `time_ms,event,detail` with header.
  std::string csv() const;
};

WdtResult run_wdt(const WdtParams& params);

/// Parses the [wdt] section of an INI document.
WdtParams parse_wdt_params(const std::string& ini_text);
WdtParams load_wdt_params(const std::filesystem::path& path);

struct Beacon {
  TimeMs time = 0;
  std::string mac;
  double rate_estimate = 0.0;
  friend bool operator==(const Beacon&, const Beacon&) = default;
};

struct BeaconTrace {
  std::vector<Beacon> records;
  /// Throws InvalidParams when times decrease or are negative.
  void validate() const;
};

/// CSV with header `time_ms,mac,rate`.
BeaconTrace parse_beacon_csv(const std::string& csv_text);

struct SwitchboardRecord {
  std::size_t cycle = 0;
  std::string mac;
  bool stale = false;
  double metric = 0.0;
  friend bool operator==(const SwitchboardRecord&, const SwitchboardRecord&) = default;
};

using MetricSink = std::function<void(const SwitchboardRecord&)>;

/// Cycle k covers ((k-1)*period, k*period] (cycle 1 also includes time 0);
/// one boundary per whole period inside the horizon.
std::vector<SwitchboardRecord> run_switchboard(const BeaconTrace& trace,
                                               TimeMs observation_period, TimeMs horizon,
                                               const MetricSink& sink = {});

/// CSV `cycle,mac,metric_or_stale` with header.
std::string to_csv(const std::vector<SwitchboardRecord>& records);

struct SwitchboardParams {
  TimeMs observation_period = rt::kDefaultObservationPeriod;
  TimeMs horizon = 0;
  BeaconTrace trace;
};

/// Parses the [switchboard] section; `trace` names a beacon CSV resolved
/// against `base_dir`.
SwitchboardParams parse_switchboard_params(const std::string& ini_text,
                                           const std::filesystem::path& base_dir);
SwitchboardParams load_switchboard_params(const std::filesystem::path& path);

}  // namespace cpm::scenarios
