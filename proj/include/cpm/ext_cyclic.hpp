#pragma once

// The `cyclic` pass.
//
//   cyclic_t int PeriodicMethod1(TOM*);
//     -> int PeriodicMethod1(TOM*); cpm_cycle_register(PeriodicMethod1);
//   PeriodicMethod1.Cycle = DEADLINE1;
//     -> cpm_cycle_set(PeriodicMethod1, (DEADLINE1));
//
// The runtime decides what a set means: the first nonzero period starts the
// method, later nonzero values change the period, zero cancels.

#include <cstddef>
#include <string>
#include <vector>

#include "cpm/pipeline.hpp"

namespace cpm::cyclic {

inline constexpr const char* kName = "cyclic";
inline constexpr const char* kVersion = "1.0";

struct CyclicMethodSpec {
  std::string fn_name;
  std::string return_type;
  std::string param_types;
  std::size_t decl_line = 0;

  friend bool operator==(const CyclicMethodSpec&, const CyclicMethodSpec&) = default;
};

struct CyclicScan {
  SourceUnit unit;
  std::vector<CyclicMethodSpec> specs;
  Diagnostics diagnostics;
};

CyclicScan scan_cyclic(const SourceUnit& unit, const PassConfig& config);

SourceUnit lower_cycle_member(const SourceUnit& unit, const std::vector<CyclicMethodSpec>& specs,
                              Diagnostics& diags);

class CyclicPass final : public ExtensionPass {
 public:
  ExtensionId id() const override { return {kName, kVersion}; }
  PassResult transform(const SourceUnit& unit, const PassConfig& config) const override;
  bool accepts_key(std::string_view) const override { return false; }
};

}  // namespace cpm::cyclic
