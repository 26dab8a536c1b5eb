#include "cpm/ext_redundancy.hpp"

#include <algorithm>
#include <charconv>

#include "lowering.hpp"

namespace cpm::redundancy {

namespace {

using lowering::AccessMatch;
using lowering::Tokens;

std::string emitter() { return ExtensionId(kName, kVersion).str(); }

class RedundantRules final : public lowering::AccessRules {
 public:
  explicit RedundantRules(const std::vector<RedundantDecl>& decls) {
    for (const auto& d : decls) names_.push_back(d.var_name);
  }

  std::optional<AccessMatch> match(const Tokens& tokens, std::size_t i) const override {
    if (std::find(names_.begin(), names_.end(), tokens[i].lexeme) == names_.end()) {
      return std::nullopt;
    }
    return AccessMatch{i + 1, tokens[i].lexeme, std::nullopt, {}, {}};
  }
  bool readable(const AccessMatch&) const override { return true; }
  bool writable(const AccessMatch&) const override { return true; }
  std::string read_form(const AccessMatch& m, std::string_view) const override {
    return "cpm_red_read(" + m.name + ")";
  }
  std::string write_form(const AccessMatch& m, std::string_view value) const override {
    return "cpm_red_write(" + m.name + ", " + std::string(value) + ")";
  }
  std::string_view entity_kind() const override { return "redundant variable"; }

 private:
  std::vector<std::string> names_;
};

struct ParsedDecl {
  RedundantDecl decl;
  std::string init;        // initializer text, empty when absent
  std::size_t semi = 0;    // token index of the terminating ';'
  std::size_t first = 0;   // token index of the first significant token
};

enum class DeclShape { kNone, kMalformed, kOk };

// Matches `[extern] redundant_t <type...> <name> [= <init>] ;` covering the
// whole line apart from trailing whitespace and comments.
DeclShape parse_decl(const Tokens& tokens, ParsedDecl& out) {
  const auto sig = lowering::significant_indices(tokens);
  std::size_t k = 0;
  bool is_extern = false;
  if (k < sig.size() && tokens[sig[k]].is(TokenKind::kKeyword, "extern")) {
    is_extern = true;
    ++k;
  }
  if (k >= sig.size() || !tokens[sig[k]].is(TokenKind::kIdentifier, "redundant_t")) {
    return DeclShape::kNone;
  }
  out.first = sig[0];
  ++k;

  // Declarator tokens run until '=' or ';'.
  std::size_t stop = k;
  while (stop < sig.size()) {
    const Token& t = tokens[sig[stop]];
    if (t.is(TokenKind::kPunctuator, "=") || t.is(TokenKind::kPunctuator, ";")) break;
    const bool type_like = t.kind == TokenKind::kKeyword || t.kind == TokenKind::kIdentifier ||
                           t.is(TokenKind::kPunctuator, "*");
    if (!type_like) return DeclShape::kMalformed;
    ++stop;
  }
  if (stop >= sig.size() || stop < k + 2) return DeclShape::kMalformed;
  const Token& name = tokens[sig[stop - 1]];
  if (name.kind != TokenKind::kIdentifier) return DeclShape::kMalformed;

  std::string type;
  for (std::size_t t = k; t + 1 < stop; ++t) {
    if (!type.empty()) type += ' ';
    type += tokens[sig[t]].lexeme;
  }

  std::size_t semi_pos = stop;
  if (tokens[sig[stop]].lexeme == "=") {
    int depth = 0;
    semi_pos = stop + 1;
    for (; semi_pos < sig.size(); ++semi_pos) {
      const std::string& lx = tokens[sig[semi_pos]].lexeme;
      if (lx == "(" || lx == "[" || lx == "{") ++depth;
      if (lx == ")" || lx == "]" || lx == "}") --depth;
      if (depth == 0 && (lx == ";" || lx == ",")) break;
    }
    if (semi_pos >= sig.size() || tokens[sig[semi_pos]].lexeme != ";") {
      return DeclShape::kMalformed;
    }
    out.init = lowering::trimmed_text(tokens, sig[stop] + 1, sig[semi_pos]);
    if (out.init.empty()) return DeclShape::kMalformed;
  }
  if (semi_pos + 1 != sig.size()) return DeclShape::kMalformed;

  out.semi = sig[semi_pos];
  out.decl.var_name = name.lexeme;
  out.decl.base_type = type;
  out.decl.is_extern = is_extern;
  return DeclShape::kOk;
}

}  // namespace

int configured_replicas(const PassConfig& config, Diagnostics* diags) {
  const std::string key = std::string(kName) + ".replicas";
  if (!config.contains(key)) return kDefaultReplicas;
  const std::string text = config.get(key);
  int n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  auto note = [&](const std::string& message) {
    if (diags) diags->push_back(Diagnostic{Severity::kWarning, 0, message, emitter()});
  };
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    note("redundancy.replicas '" + text + "' is not an integer; using " +
         std::to_string(kDefaultReplicas));
    return kDefaultReplicas;
  }
  if (n < 3) {
    note("redundancy.replicas " + text + " is below 3; using 3");
    return 3;
  }
  if (n % 2 == 0) {
    note("redundancy.replicas " + text + " is even; using " + std::to_string(n + 1));
    return n + 1;
  }
  return n;
}

ScanResult scan_redundant(const SourceUnit& unit, const PassConfig& config) {
  ScanResult result{unit, {}, {}};
  const int replicas = configured_replicas(config, &result.diagnostics);

  for (std::size_t idx = 0; idx < unit.size(); ++idx) {
    const SourceLine& line = unit.line(idx);
    if (!lowering::eligible(line, kName)) continue;
    const Tokens& tokens = line.tokens();

    ParsedDecl parsed;
    const DeclShape shape = parse_decl(tokens, parsed);
    if (shape == DeclShape::kNone) continue;
    if (shape == DeclShape::kMalformed) {
      result.diagnostics.push_back(
          {Severity::kWarning, line.line_no(),
           "unsupported redundant_t declaration (expected one scalar declarator per line); "
           "line passed through",
           emitter()});
      continue;
    }

    RedundantDecl decl = parsed.decl;
    decl.decl_line = line.line_no();
    decl.replicas = replicas;
    const bool duplicate =
        std::any_of(result.decls.begin(), result.decls.end(),
                    [&](const RedundantDecl& d) { return d.var_name == decl.var_name; });
    if (duplicate) {
      result.diagnostics.push_back({Severity::kWarning, line.line_no(),
                                    "duplicate redundant_t declaration of '" + decl.var_name +
                                        "'; line passed through",
                                    emitter()});
      continue;
    }

    std::string text;
    for (std::size_t k = 0; k < parsed.first; ++k) text += tokens[k].lexeme;
    if (decl.is_extern) {
      text += "cpm_red_extern(" + decl.var_name + ", " + decl.base_type + ");";
      if (!parsed.init.empty()) {
        result.diagnostics.push_back({Severity::kWarning, line.line_no(),
                                      "initializer on extern redundant_t '" + decl.var_name +
                                          "' ignored",
                                      emitter()});
      }
    } else {
      text += "cpm_red_storage(" + decl.var_name + ", " + decl.base_type + ", " +
              std::to_string(decl.replicas) + ");";
      if (!parsed.init.empty()) {
        text += " cpm_red_write(" + decl.var_name + ", (" + parsed.init + "));";
        result.diagnostics.push_back({Severity::kInfo, line.line_no(),
                                      "initializer of redundant '" + decl.var_name +
                                          "' lowered to a multiplexed write",
                                      emitter()});
      }
    }
    for (std::size_t k = parsed.semi + 1; k < tokens.size(); ++k) text += tokens[k].lexeme;

    result.unit.replace_line(idx, std::move(text));
    result.decls.push_back(std::move(decl));
  }
  return result;
}

SourceUnit lower_accesses(const SourceUnit& unit, const std::vector<RedundantDecl>& decls,
                          Diagnostics& diags) {
  SourceUnit out = unit;
  if (decls.empty()) return out;
  const RedundantRules rules(decls);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const SourceLine& line = out.line(idx);
    if (!lowering::eligible(line, kName)) continue;
    std::string text =
        lowering::lower_line(line.tokens(), rules, {line.line_no(), emitter()}, diags);
    if (text != line.raw()) out.replace_line(idx, std::move(text));
  }
  return out;
}

PassResult RedundancyPass::transform(const SourceUnit& unit, const PassConfig& config) const {
  auto scanned = scan_redundant(unit, config);
  PassResult result{{}, std::move(scanned.diagnostics)};
  result.unit = lower_accesses(scanned.unit, scanned.decls, result.diagnostics);
  return result;
}

bool RedundancyPass::accepts_key(std::string_view key) const {
  return key == "replicas" || key == "bank_stride";
}

}  // namespace cpm::redundancy
