#pragma once

// Token-level rewriting shared by the extension passes. A pass describes the
// entities it owns through AccessRules; the engine finds reads and
// statement-level writes of those entities on one line and rewrites them.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpm/diagnostic.hpp"
#include "cpm/srcmodel.hpp"

namespace cpm::lowering {

using Tokens = std::vector<Token>;

struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct AccessMatch {
  std::size_t end = 0;  // one past the last token of the access
  std::string name;
  std::optional<TokenRange> inner;  // sub-expression lowered recursively (array keys)
  std::string reject;               // non-empty: recognized but not rewritable
  std::string detail;               // pass-specific payload (array property)
};

class AccessRules {
 public:
  virtual ~AccessRules() = default;

  /// Recognizes an access starting at identifier token `i`.
  virtual std::optional<AccessMatch> match(const Tokens& tokens, std::size_t i) const = 0;
  virtual bool readable(const AccessMatch& m) const = 0;
  virtual bool writable(const AccessMatch& m) const = 0;
  virtual std::string read_form(const AccessMatch& m, std::string_view lowered_inner) const = 0;
  /// Call expression (without ';') that stores `value` into the entity.
  virtual std::string write_form(const AccessMatch& m, std::string_view value) const = 0;
  /// Human-readable entity kind for diagnostics, e.g. "redundant variable".
  virtual std::string_view entity_kind() const = 0;
};

struct LineContext {
  std::size_t line_no = 0;
  std::string emitted_by;
};

/// Rewrites one line. Returns the new text (equal to the input when nothing
/// applies) and appends diagnostics.
std::string lower_line(const Tokens& tokens, const AccessRules& rules, const LineContext& ctx,
                       Diagnostics& diags);

// Helpers shared with the declaration scanners.

std::optional<std::size_t> next_significant(const Tokens& tokens, std::size_t from);
std::optional<std::size_t> prev_significant(const Tokens& tokens, std::size_t before);
/// Indices of significant tokens, in order.
std::vector<std::size_t> significant_indices(const Tokens& tokens);
/// Index of the bracket closing the one at `open`, or nullopt if unbalanced on this line.
std::optional<std::size_t> matching_close(const Tokens& tokens, std::size_t open);
/// Lexemes of [begin, end) with leading and trailing whitespace tokens dropped.
std::string trimmed_text(const Tokens& tokens, std::size_t begin, std::size_t end);

bool is_preprocessor_line(const SourceLine& line);
/// Lines a pass named `pass_name` may rewrite: not comment-only, not a
/// preprocessor directive, and untagged or tagged for this pass.
bool eligible(const SourceLine& line, std::string_view pass_name);

}  // namespace cpm::lowering
