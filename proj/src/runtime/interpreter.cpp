#include "cpm/runtime/interpreter.hpp"

#include <set>

namespace cpm::rt {

namespace {

const std::set<std::string, std::less<>> kTypeWords = {
    "int",   "long",    "short",  "char",     "unsigned", "signed", "const",
    "void",  "static",  "extern", "volatile", "float",    "double", "register"};

const std::set<std::string, std::less<>> kCompound = {"+=", "-=", "*=", "/=", "%=",
                                                      "&=", "|=", "^=", "<<=", ">>="};

constexpr std::size_t kMaxLoopIterations = 1'000'000;
constexpr std::size_t kMaxCallDepth = 256;

Direction parse_direction(const std::string& token) {
  if (token == "CPM_SENSOR") return Direction::kSensor;
  if (token == "CPM_ACTUATOR") return Direction::kActuator;
  if (token == "CPM_BOTH") return Direction::kBoth;
  throw expr::ExprError("unknown direction '" + token + "'");
}

}  // namespace

class Interpreter::Env final : public expr::Environment {
 public:
  explicit Env(Interpreter& in) : in_(in) {}
  Value identifier(const std::string& name) override { return in_.lookup(name); }
  Value call(const std::string& callee, const std::vector<expr::NodePtr>& args) override;

 private:
  void arity(const std::string& callee, const std::vector<expr::NodePtr>& args, std::size_t n) {
    if (args.size() != n) {
      throw expr::ExprError(callee + " expects " + std::to_string(n) + " arguments");
    }
  }
  Interpreter& in_;
};

Value Interpreter::Env::call(const std::string& callee, const std::vector<expr::NodePtr>& args) {
  Runtime& rt = in_.rt_;
  auto name = [&](std::size_t i) { return in_.name_of(*args[i]); };
  auto value = [&](std::size_t i) { return in_.eval(*args[i]); };

  if (callee == "cpm_red_write") {
    arity(callee, args, 2);
    rt.red_write(name(0), value(1));
    return 0;
  }
  if (callee == "cpm_red_read") {
    arity(callee, args, 1);
    return rt.red_read(name(0));
  }
  if (callee == "cpm_ctx_register") {
    arity(callee, args, 3);
    if (args[2]->kind != expr::NodeKind::kString) throw expr::ExprError("binding must be a string");
    rt.ctx_register(name(0), parse_direction(name(1)), args[2]->text);
    return 0;
  }
  if (callee == "cpm_ctx_read") {
    arity(callee, args, 1);
    return rt.ctx_read(name(0));
  }
  if (callee == "cpm_ctx_write") {
    arity(callee, args, 2);
    rt.ctx_write(name(0), value(1));
    return 0;
  }
  if (callee == "cpm_guard_register") {
    arity(callee, args, 2);
    if (args[1]->kind != expr::NodeKind::kString) throw expr::ExprError("guard must be a string");
    rt.guard_register(name(0), args[1]->text);
    return 0;
  }
  if (callee == "cpm_arr_register") {
    arity(callee, args, 1);
    rt.arr_register(name(0));
    return 0;
  }
  if (callee == "cpm_arr_get") {
    arity(callee, args, 3);
    return rt.arr_get(name(0), in_.key_of(*args[1]), name(2));
  }
  if (callee == "cpm_cycle_register") {
    arity(callee, args, 1);
    rt.cycle_register(name(0));
    return 0;
  }
  if (callee == "cpm_cycle_set") {
    arity(callee, args, 2);
    rt.cycle_set(name(0), value(1));
    return 0;
  }
  if (callee == "cpm_cycle_get") {
    arity(callee, args, 1);
    return rt.cycle_get(name(0));
  }

  std::vector<Value> values;
  for (std::size_t i = 0; i < args.size(); ++i) values.push_back(value(i));
  if (in_.has_function(callee)) return in_.call(callee, values);
  if (rt.has_function(callee)) return rt.call_function(callee, values);
  throw expr::ExprError("call of unknown function '" + callee + "'");
}

Interpreter::Interpreter(Runtime& rt) : rt_(rt) {}

// ---- tokens ----------------------------------------------------------------

const Interpreter::Tok& Interpreter::tok(std::size_t i) const {
  if (i >= toks_.size()) {
    throw InterpreterError(toks_.empty() ? 0 : toks_.back().line_no, "unexpected end of program");
  }
  return toks_[i];
}

bool Interpreter::is_punct(std::size_t i, std::string_view p) const {
  return i < toks_.size() && toks_[i].token.is(TokenKind::kPunctuator, p);
}

bool Interpreter::is_kw(std::size_t i, std::string_view kw) const {
  return i < toks_.size() && toks_[i].token.is(TokenKind::kKeyword, kw);
}

bool Interpreter::is_ident(std::size_t i) const {
  return i < toks_.size() && toks_[i].token.kind == TokenKind::kIdentifier;
}

bool Interpreter::starts_type(std::size_t i) const {
  return i < toks_.size() && toks_[i].token.kind == TokenKind::kKeyword &&
         kTypeWords.count(toks_[i].token.lexeme) != 0;
}

void Interpreter::fail(std::size_t i, const std::string& message) const {
  const std::size_t line = i < toks_.size() ? toks_[i].line_no
                                            : (toks_.empty() ? 0 : toks_.back().line_no);
  throw InterpreterError(line, message);
}

std::size_t Interpreter::match(std::size_t open) const {
  const std::string& o = tok(open).token.lexeme;
  const std::string c = o == "(" ? ")" : o == "{" ? "}" : "]";
  int depth = 0;
  for (std::size_t i = open; i < toks_.size(); ++i) {
    if (is_punct(i, o)) ++depth;
    if (is_punct(i, c) && --depth == 0) return i;
  }
  fail(open, "unbalanced '" + o + "'");
}

std::size_t Interpreter::find_semicolon(std::size_t i) const {
  int depth = 0;
  for (; i < toks_.size(); ++i) {
    const auto& t = toks_[i].token;
    if (t.kind != TokenKind::kPunctuator) continue;
    if (t.lexeme == "(" || t.lexeme == "[" || t.lexeme == "{") ++depth;
    if (t.lexeme == ")" || t.lexeme == "]" || t.lexeme == "}") --depth;
    if (t.lexeme == ";" && depth == 0) return i;
    if (depth < 0) break;
  }
  fail(i, "missing ';'");
}

// ---- loading ---------------------------------------------------------------

void Interpreter::load(std::string_view text) { load(load_unit(text)); }

void Interpreter::load(const SourceUnit& unit) {
  const std::size_t first = toks_.size();
  for (const auto& line : unit.lines()) {
    std::vector<Token> sig;
    for (const auto& t : line.tokens()) {
      if (t.significant()) sig.push_back(t);
    }
    if (sig.empty()) continue;
    if (sig.front().is(TokenKind::kPunctuator, "#")) {
      define(line);
      continue;
    }
    for (auto& t : sig) toks_.push_back({std::move(t), line.line_no()});
  }
  std::size_t i = first;
  while (i < toks_.size()) i = top_level(i);
}

void Interpreter::define(const SourceLine& line) {
  std::vector<Token> sig;
  for (const auto& t : line.tokens()) {
    if (t.significant()) sig.push_back(t);
  }
  if (sig.size() < 2 || sig[1].lexeme != "define") return;  // #include and friends are ignored
  if (sig.size() < 4 || sig[2].kind != TokenKind::kIdentifier) {
    throw InterpreterError(line.line_no(), "unsupported #define");
  }
  try {
    const auto node = expr::parse(sig, 3, sig.size());
    const Value v = eval(*node);
    constants_[sig[2].lexeme] = v;
    rt_.define_constant(sig[2].lexeme, v);
  } catch (const expr::ExprError& e) {
    throw InterpreterError(line.line_no(), std::string("#define ") + sig[2].lexeme + ": " + e.what());
  }
}

std::size_t Interpreter::top_level(std::size_t i) {
  if (is_punct(i, ";")) return i + 1;
  if (starts_type(i)) return declaration(i, /*global=*/true);
  return exec_simple(i);
}

std::size_t Interpreter::declaration(std::size_t i, bool global) {
  std::string type;
  while (starts_type(i) || is_punct(i, "*")) type += tok(i++).token.lexeme + " ";
  const bool is_pointer = type.find('*') != std::string::npos;

  for (;;) {
    while (is_punct(i, "*")) ++i;
    if (!is_ident(i)) fail(i, "expected a name in declaration");
    const std::string name = tok(i++).token.lexeme;

    if (is_punct(i, "(")) {
      const std::size_t close = match(i);
      if (!is_punct(close + 1, "{")) {
        // Prototype; further declarators may follow.
        i = close + 1;
        if (is_punct(i, ",")) {
          ++i;
          continue;
        }
        if (!is_punct(i, ";")) fail(i, "expected ';' after prototype");
        return i + 1;
      }
      if (!global) fail(i, "nested function definition");
      Function fn;
      std::size_t p = i + 1;
      while (p < close) {
        std::size_t q = p;
        int depth = 0;
        while (q < close && !(depth == 0 && is_punct(q, ","))) {
          if (is_punct(q, "(")) ++depth;
          if (is_punct(q, ")")) --depth;
          ++q;
        }
        const bool named = q - p >= 2 && is_ident(q - 1);
        const bool is_void = q - p == 1 && is_kw(p, "void");
        if (!is_void) fn.params.push_back(named ? tok(q - 1).token.lexeme : "");
        p = q + 1;
      }
      fn.body_begin = close + 1;
      fn.body_end = match(close + 1);
      functions_[name] = fn;
      rt_.bind_function(name, [this, name](Runtime&, const std::vector<Value>& args) {
        return call(name, args);
      });
      return fn.body_end + 1;
    }

    if (is_punct(i, "=")) {
      ++i;
      const std::size_t start = i;
      int depth = 0;
      while (i < toks_.size() && !(depth == 0 && (is_punct(i, ",") || is_punct(i, ";")))) {
        if (is_punct(i, "(")) ++depth;
        if (is_punct(i, ")")) --depth;
        ++i;
      }
      if (is_pointer && i == start + 1 && tok(start).token.kind == TokenKind::kString) {
        const auto node = expr::parse(std::vector<Token>{tok(start).token}, 0, 1);
        if (!global) fail(start, "local string variables are not supported");
        strings_[name] = node->text;
        if (name == "extensions_pipeline") rt_.set_pipeline_string(node->text);
      } else {
        const Value v = eval(start, i);
        if (global) {
          globals_[name] = v;
        } else {
          frames_.back()[name] = v;
        }
      }
    } else if (global) {
      globals_[name] = 0;
    } else {
      frames_.back()[name] = 0;
    }

    if (is_punct(i, ",")) {
      ++i;
      continue;
    }
    if (!is_punct(i, ";")) fail(i, "expected ';' after declaration");
    return i + 1;
  }
}

// ---- statements ------------------------------------------------------------

std::size_t Interpreter::skip_statement(std::size_t i) const {
  if (is_punct(i, "{")) return match(i) + 1;
  if (is_kw(i, "if")) {
    std::size_t end = skip_statement(match(i + 1) + 1);
    if (is_kw(end, "else")) end = skip_statement(end + 1);
    return end;
  }
  if (is_kw(i, "while")) return skip_statement(match(i + 1) + 1);
  return find_semicolon(i) + 1;
}

std::size_t Interpreter::exec_statement(std::size_t i) {
  if (is_punct(i, ";")) return i + 1;
  if (is_punct(i, "{")) {
    const std::size_t close = match(i);
    frames_.emplace_back();
    std::size_t p = i + 1;
    while (p < close && !returning_) p = exec_statement(p);
    frames_.pop_back();
    return close + 1;
  }
  if (is_kw(i, "if")) {
    if (!is_punct(i + 1, "(")) fail(i, "expected '(' after if");
    const std::size_t close = match(i + 1);
    const bool taken = eval(i + 2, close) != 0;
    const std::size_t then_end = skip_statement(close + 1);
    const bool has_else = is_kw(then_end, "else");
    const std::size_t end = has_else ? skip_statement(then_end + 1) : then_end;
    if (taken) {
      exec_statement(close + 1);
    } else if (has_else) {
      exec_statement(then_end + 1);
    }
    return end;
  }
  if (is_kw(i, "while")) {
    if (!is_punct(i + 1, "(")) fail(i, "expected '(' after while");
    const std::size_t close = match(i + 1);
    std::size_t n = 0;
    while (!returning_ && eval(i + 2, close) != 0) {
      if (++n > kMaxLoopIterations) fail(i, "loop iteration limit exceeded");
      exec_statement(close + 1);
    }
    return skip_statement(close + 1);
  }
  if (is_kw(i, "return")) {
    const std::size_t semi = find_semicolon(i);
    return_value_ = semi > i + 1 ? eval(i + 1, semi) : 0;
    returning_ = true;
    return semi + 1;
  }
  if (starts_type(i)) return declaration(i, /*global=*/false);
  return exec_simple(i);
}

bool Interpreter::abi_declaration(std::size_t i, std::size_t end) {
  // The type argument of these two is a token sequence, not an expression.
  const bool storage = is_ident(i) && tok(i).token.lexeme == "cpm_red_storage";
  const bool ext = is_ident(i) && tok(i).token.lexeme == "cpm_red_extern";
  if (!storage && !ext) return false;
  if (!is_punct(i + 1, "(") || !is_ident(i + 2) || !is_punct(i + 3, ",") || !is_punct(end - 1, ")")) {
    fail(i, "malformed " + tok(i).token.lexeme);
  }
  const std::string name = tok(i + 2).token.lexeme;
  if (ext) {
    rt_.red_extern(name);
    return true;
  }
  if (tok(end - 2).token.kind != TokenKind::kNumber || !is_punct(end - 3, ",")) {
    fail(i, "cpm_red_storage needs a replica count");
  }
  rt_.red_storage(name, static_cast<int>(eval(end - 2, end - 1)));
  return true;
}

std::size_t Interpreter::exec_simple(std::size_t i) {
  const std::size_t semi = find_semicolon(i);
  if (abi_declaration(i, semi)) return semi + 1;
  try {
    // ++x; --x;
    if ((is_punct(i, "++") || is_punct(i, "--")) && is_ident(i + 1) && semi == i + 2) {
      const std::string name = tok(i + 1).token.lexeme;
      assign(name, lookup(name) + (is_punct(i, "++") ? 1 : -1), i);
      return semi + 1;
    }
    if (is_ident(i) && i + 1 < semi && tok(i + 1).token.kind == TokenKind::kPunctuator) {
      const std::string name = tok(i).token.lexeme;
      const std::string op = tok(i + 1).token.lexeme;
      if ((op == "++" || op == "--") && semi == i + 2) {
        assign(name, lookup(name) + (op == "++" ? 1 : -1), i);
        return semi + 1;
      }
      if (op == "=") {
        assign(name, eval(i + 2, semi), i);
        return semi + 1;
      }
      if (kCompound.count(op)) {
        const Value rhs = eval(i + 2, semi);
        const auto lit = [](Value v) {
          return std::make_shared<const expr::Node>(expr::Node{expr::NodeKind::kNumber, "", v, {}});
        };
        const expr::Node combined{expr::NodeKind::kBinary, op.substr(0, op.size() - 1), 0,
                                  {lit(lookup(name)), lit(rhs)}};
        assign(name, eval(combined), i);
        return semi + 1;
      }
    }
  } catch (const expr::ExprError& e) {
    fail(i, e.what());
  }
  eval(i, semi);
  return semi + 1;
}

// ---- evaluation ------------------------------------------------------------

Value Interpreter::eval(std::size_t begin, std::size_t end) {
  std::vector<Token> slice;
  for (std::size_t k = begin; k < end; ++k) slice.push_back(tok(k).token);
  try {
    const auto node = expr::parse(slice, 0, slice.size());
    return eval(*node);
  } catch (const expr::ExprError& e) {
    fail(begin, e.what());
  } catch (const std::out_of_range& e) {
    fail(begin, e.what());
  } catch (const std::invalid_argument& e) {
    fail(begin, e.what());
  }
}

Value Interpreter::eval(const expr::Node& n) {
  Env env(*this);
  return expr::evaluate(n, env);
}

Value Interpreter::lookup(const std::string& name) const {
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
    const auto v = it->find(name);
    if (v != it->end()) return v->second;
  }
  if (const auto g = globals_.find(name); g != globals_.end()) return g->second;
  if (const auto c = constants_.find(name); c != constants_.end()) return c->second;
  throw expr::ExprError("unknown identifier '" + name + "'");
}

void Interpreter::assign(const std::string& name, Value v, std::size_t at) {
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
    const auto slot = it->find(name);
    if (slot != it->end()) {
      slot->second = v;
      return;
    }
  }
  const auto g = globals_.find(name);
  if (g == globals_.end()) fail(at, "assignment to undeclared '" + name + "'");
  g->second = v;
}

std::string Interpreter::name_of(const expr::Node& n) const {
  if (n.kind != expr::NodeKind::kIdentifier) {
    throw expr::ExprError("expected a name, got '" + expr::to_source(n) + "'");
  }
  return n.text;
}

std::string Interpreter::key_of(const expr::Node& n) {
  if (n.kind == expr::NodeKind::kString) return n.text;
  if (n.kind == expr::NodeKind::kIdentifier) {
    const auto s = strings_.find(n.text);
    if (s != strings_.end()) return s->second;
  }
  return std::to_string(eval(n));
}

Value Interpreter::call(const std::string& fn, const std::vector<Value>& args) {
  const auto it = functions_.find(fn);
  if (it == functions_.end()) throw std::out_of_range("unknown function '" + fn + "'");
  const Function f = it->second;
  if (++call_depth_ > kMaxCallDepth) {
    call_depth_ = 0;
    fail(f.body_begin, "call depth limit exceeded in '" + fn + "'");
  }
  std::map<std::string, Value> params;
  for (std::size_t k = 0; k < f.params.size(); ++k) {
    if (!f.params[k].empty()) params[f.params[k]] = k < args.size() ? args[k] : 0;
  }
  auto saved = std::move(frames_);
  frames_.clear();
  frames_.push_back(std::move(params));
  const bool saved_returning = returning_;
  returning_ = false;
  return_value_ = 0;
  exec_statement(f.body_begin);
  const Value result = returning_ ? return_value_ : 0;
  returning_ = saved_returning;
  frames_ = std::move(saved);
  --call_depth_;
  return result;
}

std::optional<Value> Interpreter::global(const std::string& name) const {
  const auto it = globals_.find(name);
  if (it == globals_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> Interpreter::string_global(const std::string& name) const {
  const auto it = strings_.find(name);
  if (it == strings_.end()) return std::nullopt;
  return it->second;
}

}  // namespace cpm::rt
