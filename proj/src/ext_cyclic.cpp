#include "cpm/ext_cyclic.hpp"

#include <algorithm>

#include "lowering.hpp"

namespace cpm::cyclic {

namespace {

using lowering::AccessMatch;
using lowering::Tokens;

std::string emitter() { return ExtensionId(kName, kVersion).str(); }

std::string text_of(const Tokens& tokens, std::size_t begin, std::size_t end) {
  std::string s;
  for (std::size_t k = begin; k < end && k < tokens.size(); ++k) s += tokens[k].lexeme;
  return s;
}

// `<fn>.Cycle`
class CycleRules final : public lowering::AccessRules {
 public:
  explicit CycleRules(const std::vector<CyclicMethodSpec>& specs) : specs_(specs) {}

  std::optional<AccessMatch> match(const Tokens& tokens, std::size_t i) const override {
    const auto dot = lowering::next_significant(tokens, i + 1);
    if (!dot || !tokens[*dot].is(TokenKind::kPunctuator, ".")) return std::nullopt;
    const auto member = lowering::next_significant(tokens, *dot + 1);
    if (!member || !tokens[*member].is(TokenKind::kIdentifier, "Cycle")) return std::nullopt;
    AccessMatch m{*member + 1, tokens[i].lexeme, std::nullopt, {}, {}};
    const bool known = std::any_of(specs_.begin(), specs_.end(),
                                   [&](const auto& s) { return s.fn_name == m.name; });
    if (!known) {
      m.reject = "'.Cycle' applied to '" + m.name + "', which is not a cyclic_t method; left unrewritten";
    }
    return m;
  }
  bool readable(const AccessMatch&) const override { return true; }
  bool writable(const AccessMatch&) const override { return true; }
  std::string read_form(const AccessMatch& m, std::string_view) const override {
    return "cpm_cycle_get(" + m.name + ")";
  }
  std::string write_form(const AccessMatch& m, std::string_view value) const override {
    return "cpm_cycle_set(" + m.name + ", " + std::string(value) + ")";
  }
  std::string_view entity_kind() const override { return "cyclic method"; }

 private:
  const std::vector<CyclicMethodSpec>& specs_;
};

}  // namespace

CyclicScan scan_cyclic(const SourceUnit& unit, const PassConfig&) {
  CyclicScan result{unit, {}, {}};
  for (std::size_t idx = 0; idx < unit.size(); ++idx) {
    const SourceLine& line = unit.line(idx);
    if (!lowering::eligible(line, kName)) continue;
    const Tokens& tokens = line.tokens();
    const auto sig = lowering::significant_indices(tokens);
    if (!tokens[sig[0]].is(TokenKind::kIdentifier, "cyclic_t")) continue;

    auto warn = [&](const std::string& message) {
      result.diagnostics.push_back({Severity::kWarning, line.line_no(), message, emitter()});
    };

    // cyclic_t <return type...> <name> ( <params> ) ; | {
    std::size_t open_pos = 1;
    while (open_pos < sig.size() && !tokens[sig[open_pos]].is(TokenKind::kPunctuator, "(")) {
      ++open_pos;
    }
    const bool has_name = open_pos < sig.size() && open_pos >= 3 &&
                          tokens[sig[open_pos - 1]].kind == TokenKind::kIdentifier;
    const auto close = has_name ? lowering::matching_close(tokens, sig[open_pos]) : std::nullopt;
    const auto after = close ? lowering::next_significant(tokens, *close + 1) : std::nullopt;
    const bool prototype = after && tokens[*after].is(TokenKind::kPunctuator, ";") &&
                           *after == sig.back();
    const bool definition = after && tokens[*after].is(TokenKind::kPunctuator, "{");
    if (!prototype && !definition) {
      warn("cyclic_t applies only to function declarations; line passed through");
      continue;
    }

    CyclicMethodSpec spec;
    spec.fn_name = tokens[sig[open_pos - 1]].lexeme;
    spec.return_type = lowering::trimmed_text(tokens, sig[1], sig[open_pos - 1]);
    spec.param_types = lowering::trimmed_text(tokens, sig[open_pos] + 1, *close);
    spec.decl_line = line.line_no();
    const bool duplicate = std::any_of(result.specs.begin(), result.specs.end(),
                                       [&](const auto& s) { return s.fn_name == spec.fn_name; });

    // Everything between `cyclic_t` (and its trailing blank) and the end.
    const std::string lead = text_of(tokens, 0, sig[0]);
    const std::string decl = text_of(tokens, sig[1], *close + 1);
    const std::string registration = "cpm_cycle_register(" + spec.fn_name + ");";
    std::string text = lead;
    if (prototype) {
      text += decl + ";";
      if (!duplicate) text += " " + registration;
      text += text_of(tokens, *after + 1, tokens.size());
    } else {
      if (!duplicate) text += decl + "; " + registration + " ";
      text += text_of(tokens, sig[1], tokens.size());
    }
    if (duplicate) {
      warn("duplicate cyclic_t declaration of '" + spec.fn_name + "'; registered once");
    } else {
      result.specs.push_back(std::move(spec));
    }
    result.unit.replace_line(idx, std::move(text));
  }
  return result;
}

SourceUnit lower_cycle_member(const SourceUnit& unit, const std::vector<CyclicMethodSpec>& specs,
                              Diagnostics& diags) {
  SourceUnit out = unit;
  const CycleRules rules(specs);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const SourceLine& line = out.line(idx);
    if (!lowering::eligible(line, kName)) continue;
    std::string text = lowering::lower_line(line.tokens(), rules, {line.line_no(), emitter()}, diags);
    if (text != line.raw()) out.replace_line(idx, std::move(text));
  }
  return out;
}

PassResult CyclicPass::transform(const SourceUnit& unit, const PassConfig& config) const {
  auto scan = scan_cyclic(unit, config);
  PassResult result{{}, std::move(scan.diagnostics)};
  result.unit = lower_cycle_member(scan.unit, scan.specs, result.diagnostics);
  return result;
}

}  // namespace cpm::cyclic
