#pragma once

// Context-aware variables. Two pipeline stages share one scanner:
//
//  * `refractive` handles scalar context variables and guarded functions:
//      sensor_t int cpu_load;         -> cpm_ctx_register(cpu_load, CPM_SENSOR, "cpu_load");
//      actuator_t int volume;         -> cpm_ctx_register(volume, CPM_ACTUATOR, "volume");
//      context_t int watchdog;        -> cpm_ctx_register(watchdog, CPM_BOTH, "watchdog");
//      guard_t (cpu_load > 90) shed;  -> cpm_guard_register(shed, "cpu_load > 90");
//    Reads of sensors become cpm_ctx_read(x); `x = e;` on actuators becomes
//    cpm_ctx_write(x, (e));
//
//  * `array` handles string-indexed reflective arrays:
//      reflective_array_t linkbeacons { beacons:int, silent_periods:int };
//      linkbeacons[mac].beacons       -> cpm_arr_get(linkbeacons, (mac), beacons)
//
// Context variables and arrays can also be declared out of band through the
// configuration (see ContextDecls::from_config).

#include <cstddef>
#include <string>
#include <vector>

#include "cpm/pipeline.hpp"

namespace cpm::reflective {

inline constexpr const char* kRefractiveName = "refractive";
inline constexpr const char* kArrayName = "array";
inline constexpr const char* kVersion = "0.5";

enum class Direction { kSensor, kActuator, kBoth };

const char* abi_token(Direction d);  // CPM_SENSOR, CPM_ACTUATOR, CPM_BOTH

struct ContextVarSpec {
  std::string name;
  Direction direction = Direction::kSensor;
  std::string binding;
  std::string value_type;

  bool readable() const { return direction != Direction::kActuator; }
  bool writable() const { return direction != Direction::kSensor; }

  friend bool operator==(const ContextVarSpec&, const ContextVarSpec&) = default;
};

struct ArrayProperty {
  std::string name;
  std::string value_type;
  friend bool operator==(const ArrayProperty&, const ArrayProperty&) = default;
};

struct ReflectiveArraySpec {
  std::string name;
  std::string key_kind = "string";
  std::vector<ArrayProperty> properties;

  bool has_property(const std::string& prop) const;
  friend bool operator==(const ReflectiveArraySpec&, const ReflectiveArraySpec&) = default;
};

struct GuardedFunctionSpec {
  std::string guard_expr;
  std::string body_fn;
  friend bool operator==(const GuardedFunctionSpec&, const GuardedFunctionSpec&) = default;
};

/// Which declaration families a scan consumes; the other families are seen
/// (so guards can reference in-source sensors) but left in place.
enum class ScanScope { kScalars, kArrays, kAll };

struct ContextScan {
  SourceUnit unit;
  std::vector<ContextVarSpec> vars;
  std::vector<ReflectiveArraySpec> arrays;
  std::vector<GuardedFunctionSpec> guards;
  Diagnostics diagnostics;
};

/// Parses "name:type[@binding], ..." as used by the refractive.* keys.
std::vector<ContextVarSpec> parse_var_list(const std::string& text, Direction direction,
                                           Diagnostics& diags);
/// Parses "prop:type, ..." as used by the array.<name> keys.
std::vector<ArrayProperty> parse_property_list(const std::string& text, Diagnostics& diags);

ContextScan scan_context(const SourceUnit& unit, const PassConfig& config,
                         ScanScope scope = ScanScope::kAll);

SourceUnit lower_context_accesses(const SourceUnit& unit, const std::vector<ContextVarSpec>& vars,
                                  Diagnostics& diags);

SourceUnit lower_array_accesses(const SourceUnit& unit,
                                const std::vector<ReflectiveArraySpec>& arrays,
                                Diagnostics& diags);

class RefractivePass final : public ExtensionPass {
 public:
  ExtensionId id() const override { return {kRefractiveName, kVersion}; }
  PassResult transform(const SourceUnit& unit, const PassConfig& config) const override;
  bool accepts_key(std::string_view key) const override;
};

class ArrayPass final : public ExtensionPass {
 public:
  ExtensionId id() const override { return {kArrayName, kVersion}; }
  PassResult transform(const SourceUnit& unit, const PassConfig& config) const override;
  bool accepts_key(std::string_view key) const override;
};

}  // namespace cpm::reflective
