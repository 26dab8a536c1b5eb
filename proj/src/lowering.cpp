#include "lowering.hpp"

#include <algorithm>
#include <array>

namespace cpm::lowering {

namespace {

constexpr std::array<std::string_view, 11> kAssignOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=", "<<=", ">>="};

constexpr std::array<std::string_view, 15> kTypeWords = {
    "int",   "char",     "short",  "long",   "float",    "double", "signed", "unsigned",
    "void",  "_Bool",    "const",  "volatile", "static", "extern", "register"};

bool is_punct(const Token& t, std::string_view text) {
  return t.is(TokenKind::kPunctuator, text);
}

bool is_assign_op(const Token& t) {
  return t.kind == TokenKind::kPunctuator &&
         std::find(kAssignOps.begin(), kAssignOps.end(), t.lexeme) != kAssignOps.end();
}

bool is_incdec(const Token& t) { return is_punct(t, "++") || is_punct(t, "--"); }

bool is_type_word(const Token& t) {
  return t.kind == TokenKind::kKeyword &&
         std::find(kTypeWords.begin(), kTypeWords.end(), t.lexeme) != kTypeWords.end();
}

// Binary operator of a compound assignment: "+=" -> "+".
std::string binary_of(std::string_view op) { return std::string(op.substr(0, op.size() - 1)); }

class LineLowerer {
 public:
  LineLowerer(const Tokens& tokens, const AccessRules& rules, const LineContext& ctx,
              Diagnostics& diags)
      : toks_(tokens), rules_(rules), ctx_(ctx), diags_(diags) {}

  std::string lower(std::size_t begin, std::size_t end, bool statement_level) {
    std::string out;
    bool stmt_start = statement_level;
    std::vector<bool> parens;  // true when the paren opened a control header
    std::size_t i = begin;
    while (i < end) {
      const Token& t = toks_[i];
      if (!t.significant()) {
        out += t.lexeme;
        ++i;
        continue;
      }
      if (stmt_start) {
        if (auto next = statement_write(i, end, out)) {
          i = *next;
          stmt_start = false;
          continue;
        }
      }
      if (t.kind == TokenKind::kIdentifier) {
        if (auto m = rules_.match(toks_, i)) {
          i = expression_access(i, *m, out);
          stmt_start = false;
          continue;
        }
      }

      bool next_start = false;
      if (t.kind == TokenKind::kPunctuator) {
        if (t.lexeme == "(") {
          const auto p = prev_significant(toks_, i);
          const bool control =
              p && toks_[*p].kind == TokenKind::kKeyword &&
              (toks_[*p].lexeme == "if" || toks_[*p].lexeme == "while" ||
               toks_[*p].lexeme == "for" || toks_[*p].lexeme == "switch");
          parens.push_back(control);
        } else if (t.lexeme == ")") {
          if (!parens.empty()) {
            next_start = parens.back();
            parens.pop_back();
          }
        } else if (t.lexeme == ";") {
          next_start = parens.empty();
        } else if (t.lexeme == "{" || t.lexeme == "}") {
          next_start = true;
        }
      } else if (t.kind == TokenKind::kKeyword && (t.lexeme == "else" || t.lexeme == "do")) {
        next_start = true;
      }
      stmt_start = statement_level && next_start;
      out += t.lexeme;
      ++i;
    }
    return out;
  }

 private:
  void warn(const std::string& message) {
    diags_.push_back(Diagnostic{Severity::kWarning, ctx_.line_no, message, ctx_.emitted_by});
  }

  std::string describe(const AccessMatch& m) const {
    return std::string(rules_.entity_kind()) + " '" + m.name + "'";
  }

  std::string raw(std::size_t begin, std::size_t end) const {
    std::string s;
    for (std::size_t k = begin; k < end; ++k) s += toks_[k].lexeme;
    return s;
  }

  // Lowered text of [begin, end) with surrounding whitespace trimmed.
  std::string lowered_trimmed(std::size_t begin, std::size_t end) {
    while (begin < end && toks_[begin].is(TokenKind::kWhitespace)) ++begin;
    while (end > begin && toks_[end - 1].is(TokenKind::kWhitespace)) --end;
    return lower(begin, end, false);
  }

  std::string read_of(const AccessMatch& m) {
    std::string inner;
    if (m.inner) inner = lowered_trimmed(m.inner->begin, m.inner->end);
    return rules_.read_form(m, inner);
  }

  std::optional<AccessMatch> usable_match(std::size_t i) const {
    if (i >= toks_.size() || toks_[i].kind != TokenKind::kIdentifier) return std::nullopt;
    auto m = rules_.match(toks_, i);
    if (!m || !m->reject.empty()) return std::nullopt;
    return m;
  }

  // First ';' at bracket depth 0 in [from, end).
  std::optional<std::size_t> statement_end(std::size_t from, std::size_t end) const {
    int depth = 0;
    for (std::size_t k = from; k < end; ++k) {
      const Token& t = toks_[k];
      if (t.kind != TokenKind::kPunctuator) continue;
      if (t.lexeme == "(" || t.lexeme == "[" || t.lexeme == "{") ++depth;
      if (t.lexeme == ")" || t.lexeme == "]" || t.lexeme == "}") {
        if (--depth < 0) return std::nullopt;
      }
      if (t.lexeme == ";" && depth == 0) return k;
    }
    return std::nullopt;
  }

  bool check_write(const AccessMatch& m, bool needs_read) {
    if (!rules_.writable(m)) {
      warn("write to " + describe(m) + " is not supported; left unrewritten");
      return false;
    }
    if (needs_read && !rules_.readable(m)) {
      warn("read-modify-write of write-only " + describe(m) + "; left unrewritten");
      return false;
    }
    return true;
  }

  // Recognizes `e = v;`, `e op= v;`, `e++;`, `++e;` at a statement start.
  // Returns the index to continue from after appending the rewrite (the
  // terminating ';'), or after the untouched access when it was refused.
  std::optional<std::size_t> statement_write(std::size_t i, std::size_t end, std::string& out) {
    const Token& t = toks_[i];
    if (is_incdec(t)) {
      const auto j = next_significant(toks_, i + 1);
      if (!j || *j >= end) return std::nullopt;
      auto m = usable_match(*j);
      if (!m) return std::nullopt;
      const auto semi = next_significant(toks_, m->end);
      if (!semi || *semi >= end || !is_punct(toks_[*semi], ";")) return std::nullopt;
      if (!check_write(*m, true)) {
        out += t.lexeme + raw(i + 1, m->end);
        return m->end;
      }
      const std::string op = t.lexeme == "++" ? "+" : "-";
      out += rules_.write_form(*m, read_of(*m) + " " + op + " (1)");
      return *semi;
    }

    auto m = usable_match(i);
    if (!m) return std::nullopt;
    const auto k = next_significant(toks_, m->end);
    if (!k || *k >= end) return std::nullopt;
    const Token& op = toks_[*k];

    if (is_incdec(op)) {
      const auto semi = next_significant(toks_, *k + 1);
      if (!semi || *semi >= end || !is_punct(toks_[*semi], ";")) return std::nullopt;
      if (!check_write(*m, true)) {
        out += raw(i, m->end);
        return m->end;
      }
      out += rules_.write_form(*m, read_of(*m) + " " + (op.lexeme == "++" ? "+" : "-") + " (1)");
      return *semi;
    }
    if (!is_assign_op(op)) return std::nullopt;

    const auto semi = statement_end(*k + 1, end);
    if (!semi) {
      warn("assignment to " + describe(*m) + " does not end on this line; left unrewritten");
      out += raw(i, m->end);
      return m->end;
    }
    const bool compound = op.lexeme != "=";
    if (!check_write(*m, compound)) {
      out += raw(i, m->end);
      return m->end;
    }
    const std::string value = lowered_trimmed(*k + 1, *semi);
    if (compound) {
      out += rules_.write_form(*m, read_of(*m) + " " + binary_of(op.lexeme) + " (" + value + ")");
    } else {
      out += rules_.write_form(*m, "(" + value + ")");
    }
    return *semi;
  }

  bool address_taken(std::size_t i) const {
    const auto p = prev_significant(toks_, i);
    if (!p || !is_punct(toks_[*p], "&")) return false;
    const auto pp = prev_significant(toks_, *p);
    if (!pp) return true;
    const Token& before = toks_[*pp];
    if (before.kind == TokenKind::kIdentifier || before.kind == TokenKind::kNumber ||
        before.kind == TokenKind::kString) {
      return false;
    }
    return !(is_punct(before, ")") || is_punct(before, "]"));
  }

  bool declared_here(std::size_t i) const {
    auto p = prev_significant(toks_, i);
    if (p && is_punct(toks_[*p], "*")) {
      while (p && is_punct(toks_[*p], "*")) p = prev_significant(toks_, *p);
    }
    return p && is_type_word(toks_[*p]);
  }

  bool abi_argument(std::size_t i) const {
    const auto p = prev_significant(toks_, i);
    if (!p || !is_punct(toks_[*p], "(")) return false;
    const auto callee = prev_significant(toks_, *p);
    return callee && toks_[*callee].kind == TokenKind::kIdentifier &&
           toks_[*callee].lexeme.rfind("cpm_", 0) == 0;
  }

  std::size_t expression_access(std::size_t i, const AccessMatch& m, std::string& out) {
    const auto p = prev_significant(toks_, i);
    if ((p && (is_punct(toks_[*p], ".") || is_punct(toks_[*p], "->"))) || abi_argument(i)) {
      out += toks_[i].lexeme;
      return i + 1;
    }
    if (!m.reject.empty()) {
      warn(m.reject);
    } else if (address_taken(i)) {
      warn("address of " + describe(m) + " taken; left unrewritten");
    } else if (declared_here(i)) {
      warn("declaration shadows " + describe(m) + "; left unrewritten");
    } else if (const auto n = next_significant(toks_, m.end);
               (n && (is_assign_op(toks_[*n]) || is_incdec(toks_[*n]))) ||
               (p && is_incdec(toks_[*p]))) {
      warn("assignment to " + describe(m) +
           " inside a larger expression is not supported; left unrewritten");
    } else if (!rules_.readable(m)) {
      warn("read of write-only " + describe(m) + "; left unrewritten");
    } else {
      out += read_of(m);
      return m.end;
    }
    out += raw(i, m.end);
    return m.end;
  }

  const Tokens& toks_;
  const AccessRules& rules_;
  const LineContext& ctx_;
  Diagnostics& diags_;
};

}  // namespace

std::string lower_line(const Tokens& tokens, const AccessRules& rules, const LineContext& ctx,
                       Diagnostics& diags) {
  return LineLowerer(tokens, rules, ctx, diags).lower(0, tokens.size(), true);
}

std::optional<std::size_t> next_significant(const Tokens& tokens, std::size_t from) {
  for (std::size_t k = from; k < tokens.size(); ++k) {
    if (tokens[k].significant()) return k;
  }
  return std::nullopt;
}

std::optional<std::size_t> prev_significant(const Tokens& tokens, std::size_t before) {
  for (std::size_t k = before; k-- > 0;) {
    if (tokens[k].significant()) return k;
  }
  return std::nullopt;
}

std::vector<std::size_t> significant_indices(const Tokens& tokens) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k].significant()) out.push_back(k);
  }
  return out;
}

std::optional<std::size_t> matching_close(const Tokens& tokens, std::size_t open) {
  const std::string& o = tokens.at(open).lexeme;
  const std::string c = o == "(" ? ")" : o == "[" ? "]" : o == "{" ? "}" : "";
  if (c.empty()) return std::nullopt;
  int depth = 0;
  for (std::size_t k = open; k < tokens.size(); ++k) {
    if (tokens[k].kind != TokenKind::kPunctuator) continue;
    if (tokens[k].lexeme == o) ++depth;
    if (tokens[k].lexeme == c && --depth == 0) return k;
  }
  return std::nullopt;
}

std::string trimmed_text(const Tokens& tokens, std::size_t begin, std::size_t end) {
  while (begin < end && tokens[begin].is(TokenKind::kWhitespace)) ++begin;
  while (end > begin && tokens[end - 1].is(TokenKind::kWhitespace)) --end;
  std::string s;
  for (std::size_t k = begin; k < end; ++k) s += tokens[k].lexeme;
  return s;
}

bool is_preprocessor_line(const SourceLine& line) {
  const auto first = next_significant(line.tokens(), 0);
  return first && line.tokens()[*first].is(TokenKind::kPunctuator, "#") &&
         !line.starts_in_comment();
}

bool eligible(const SourceLine& line, std::string_view pass_name) {
  if (line.comment_only() || is_preprocessor_line(line)) return false;
  if (!next_significant(line.tokens(), 0)) return false;
  return line.tag().empty() || line.tag() == pass_name;
}

}  // namespace cpm::lowering
