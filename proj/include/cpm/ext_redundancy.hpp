#pragma once

// The `redundancy` pass. Lines of the form
//
//   [extern] redundant_t <type> <name> [= <init>];
//
// become replica storage definitions (or declarations for `extern`), and
// every later access to <name> is routed through the voting runtime:
//
//   redundant_t int x;   ->  cpm_red_storage(x, int, 3);
//   x = 5;               ->  cpm_red_write(x, (5));
//   y = x + 1;           ->  y = cpm_red_read(x) + 1;

#include <cstddef>
#include <string>
#include <vector>

#include "cpm/pipeline.hpp"

namespace cpm::redundancy {

inline constexpr const char* kName = "redundancy";
inline constexpr const char* kVersion = "1.1";
inline constexpr int kDefaultReplicas = 3;

struct RedundantDecl {
  std::string var_name;
  std::string base_type;
  int replicas = kDefaultReplicas;
  bool is_extern = false;
  std::size_t decl_line = 0;

  friend bool operator==(const RedundantDecl&, const RedundantDecl&) = default;
};

struct ScanResult {
  SourceUnit unit;
  std::vector<RedundantDecl> decls;
  Diagnostics diagnostics;
};

/// Replica count from `redundancy.replicas`, forced odd and >= 3 (with a
/// warning when the configured value had to be adjusted).
int configured_replicas(const PassConfig& config, Diagnostics* diags = nullptr);

ScanResult scan_redundant(const SourceUnit& unit, const PassConfig& config);

SourceUnit lower_accesses(const SourceUnit& unit, const std::vector<RedundantDecl>& decls,
                          Diagnostics& diags);

class RedundancyPass final : public ExtensionPass {
 public:
  ExtensionId id() const override { return {kName, kVersion}; }
  PassResult transform(const SourceUnit& unit, const PassConfig& config) const override;
  bool accepts_key(std::string_view key) const override;
};

}  // namespace cpm::redundancy
