#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cpm {

// Transform-time problems are never fatal: input that a pass cannot handle
// is flushed through unchanged and reported here.
enum class Severity { kInfo, kWarning };

struct Diagnostic {
  Severity severity = Severity::kWarning;
  std::size_t line_no = 0;  // 0 when not tied to a line
  std::string message;
  std::string emitted_by;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

const char* to_string(Severity severity);

/// "warning cpm://redundancy/1.1 line 3: message"
std::string format_diagnostic(const Diagnostic& d);

}  // namespace cpm
