#pragma once

// A small interpreter for lowered output, used as an end-to-end oracle: it
// executes the cpm_* ABI calls against a Runtime so that the effect of a
// transformed program can be compared with hand-written runtime calls.
//
// Supported subset: `#define NAME <int-expr>`, global and local integer
// declarations, `const char *name = "...";` strings, prototypes, function
// definitions with blocks, if/else, while, return, assignments (=, op=),
// ++/--, and expression statements. Top-level statements (the ABI lines the
// passes emit at file scope) run while loading. Everything else is an
// InterpreterError.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cpm/runtime/expr.hpp"
#include "cpm/runtime/runtime.hpp"
#include "cpm/srcmodel.hpp"

namespace cpm::rt {

class InterpreterError : public std::runtime_error {
 public:
  InterpreterError(std::size_t line_no, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + message), line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class Interpreter {
 public:
  /// Defined functions are bound into `rt` as host functions, so cyclic
  /// methods and guard bodies call back into this interpreter; it must
  /// outlive any further use of `rt`.
  explicit Interpreter(Runtime& rt);
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  void load(const SourceUnit& unit);
  void load(std::string_view text);

  Value call(const std::string& fn, const std::vector<Value>& args = {});
  bool has_function(const std::string& fn) const { return functions_.count(fn) != 0; }

  std::optional<Value> global(const std::string& name) const;
  std::optional<std::string> string_global(const std::string& name) const;

 private:
  struct Tok {
    Token token;
    std::size_t line_no;
  };
  struct Function {
    std::vector<std::string> params;  // empty string for unnamed parameters
    std::size_t body_begin;            // index of '{'
    std::size_t body_end;              // index of matching '}'
  };
  class Env;
  friend class Env;

  // Token helpers.
  const Tok& tok(std::size_t i) const;
  bool is_punct(std::size_t i, std::string_view p) const;
  bool is_kw(std::size_t i, std::string_view kw) const;
  bool is_ident(std::size_t i) const;
  bool starts_type(std::size_t i) const;
  std::size_t match(std::size_t open) const;
  std::size_t find_semicolon(std::size_t i) const;
  [[noreturn]] void fail(std::size_t i, const std::string& message) const;

  void define(const SourceLine& line);
  std::size_t top_level(std::size_t i);
  std::size_t declaration(std::size_t i, bool global);

  std::size_t skip_statement(std::size_t i) const;
  std::size_t exec_statement(std::size_t i);
  std::size_t exec_simple(std::size_t i);
  bool abi_declaration(std::size_t i, std::size_t end);

  Value eval(std::size_t begin, std::size_t end);
  Value eval(const expr::Node& n);
  Value lookup(const std::string& name) const;
  void assign(const std::string& name, Value v, std::size_t at);
  std::string key_of(const expr::Node& n);
  std::string name_of(const expr::Node& n) const;

  Runtime& rt_;
  std::vector<Tok> toks_;
  std::map<std::string, Value> constants_;
  std::map<std::string, Value> globals_;
  std::map<std::string, std::string> strings_;
  std::map<std::string, Function> functions_;
  std::vector<std::map<std::string, Value>> frames_;  // innermost scope last
  std::size_t call_depth_ = 0;
  bool returning_ = false;
  Value return_value_ = 0;
};

}  // namespace cpm::rt
