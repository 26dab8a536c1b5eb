#pragma once

// Integer C expressions: literals, identifiers, calls, unary and binary
// operators with C precedence, and the conditional operator. Used for guard
// conditions and by the interpreter that executes lowered code.

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cpm/srcmodel.hpp"

namespace cpm::rt::expr {

using Value = std::int64_t;

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { kNumber, kString, kIdentifier, kUnary, kBinary, kConditional, kCall };

struct Node {
  NodeKind kind;
  std::string text;  // operator, identifier, callee, or unescaped string literal
  Value number = 0;
  std::vector<std::shared_ptr<const Node>> children;
};

using NodePtr = std::shared_ptr<const Node>;

/// Parses a complete expression. Throws ExprError on syntax errors.
NodePtr parse(std::string_view source);
/// Parses significant tokens [begin, end) of `tokens` (whitespace and
/// comments are skipped).
NodePtr parse(const std::vector<Token>& tokens, std::size_t begin, std::size_t end);

class Environment {
 public:
  virtual ~Environment() = default;
  virtual Value identifier(const std::string& name) = 0;
  /// Calls receive unevaluated arguments so ABI helpers can take names.
  virtual Value call(const std::string& callee, const std::vector<NodePtr>& args) = 0;
};

Value evaluate(const Node& node, Environment& env);

/// Identifiers referenced outside call-callee position.
std::set<std::string> identifiers(const Node& node);

/// Source text of `node` in canonical spacing, for diagnostics.
std::string to_source(const Node& node);

}  // namespace cpm::rt::expr
