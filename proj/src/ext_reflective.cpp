#include "cpm/ext_reflective.hpp"

#include <algorithm>

#include "lowering.hpp"

namespace cpm::reflective {

namespace {

using lowering::AccessMatch;
using lowering::Tokens;

std::string refractive_id() { return ExtensionId(kRefractiveName, kVersion).str(); }
std::string array_id() { return ExtensionId(kArrayName, kVersion).str(); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto toks = tokenize_line(s);
  return toks.size() == 1 && toks[0].kind == TokenKind::kIdentifier;
}

std::string c_string_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string leading(const Tokens& tokens, std::size_t first) {
  std::string s;
  for (std::size_t k = 0; k < first; ++k) s += tokens[k].lexeme;
  return s;
}

std::string trailing(const Tokens& tokens, std::size_t after) {
  std::string s;
  for (std::size_t k = after + 1; k < tokens.size(); ++k) s += tokens[k].lexeme;
  return s;
}

enum class Family { kNone, kScalar, kArray, kGuard };

struct ParsedLine {
  Family family = Family::kNone;
  bool malformed = false;
  std::size_t first = 0;
  std::size_t last = 0;  // index of the terminating ';'
  ContextVarSpec var;
  ReflectiveArraySpec array;
  GuardedFunctionSpec guard;
  std::vector<std::string> guard_identifiers;
  std::string duplicate_property;
};

// `<sensor_t|actuator_t|context_t> <type...> <name> ;`
void parse_scalar(const Tokens& tokens, const std::vector<std::size_t>& sig, ParsedLine& out) {
  const std::string& kw = tokens[sig[0]].lexeme;
  out.var.direction = kw == "sensor_t"     ? Direction::kSensor
                      : kw == "actuator_t" ? Direction::kActuator
                                           : Direction::kBoth;
  std::size_t stop = 1;
  while (stop < sig.size() && !tokens[sig[stop]].is(TokenKind::kPunctuator, ";")) {
    const Token& t = tokens[sig[stop]];
    if (t.kind != TokenKind::kKeyword && t.kind != TokenKind::kIdentifier &&
        !t.is(TokenKind::kPunctuator, "*")) {
      out.malformed = true;
      return;
    }
    ++stop;
  }
  if (stop != sig.size() - 1 || stop < 3 ||
      tokens[sig[stop - 1]].kind != TokenKind::kIdentifier) {
    out.malformed = true;
    return;
  }
  for (std::size_t k = 1; k + 1 < stop; ++k) {
    if (!out.var.value_type.empty()) out.var.value_type += ' ';
    out.var.value_type += tokens[sig[k]].lexeme;
  }
  out.var.name = tokens[sig[stop - 1]].lexeme;
  out.var.binding = out.var.name;
  out.last = sig[stop];
}

// `reflective_array_t <name> { <prop>:<type>, ... } ;`
void parse_array(const Tokens& tokens, const std::vector<std::size_t>& sig, ParsedLine& out) {
  if (sig.size() < 5 || tokens[sig[1]].kind != TokenKind::kIdentifier ||
      !tokens[sig[2]].is(TokenKind::kPunctuator, "{") ||
      !tokens[sig.back()].is(TokenKind::kPunctuator, ";") ||
      !tokens[sig[sig.size() - 2]].is(TokenKind::kPunctuator, "}")) {
    out.malformed = true;
    return;
  }
  out.array.name = tokens[sig[1]].lexeme;
  std::size_t k = 3;
  const std::size_t close = sig.size() - 2;
  while (k < close) {
    if (tokens[sig[k]].kind != TokenKind::kIdentifier || k + 2 >= close + 1 ||
        !tokens[sig[k + 1]].is(TokenKind::kPunctuator, ":")) {
      out.malformed = true;
      return;
    }
    ArrayProperty prop{tokens[sig[k]].lexeme, {}};
    k += 2;
    while (k < close && !tokens[sig[k]].is(TokenKind::kPunctuator, ",")) {
      if (!prop.value_type.empty()) prop.value_type += ' ';
      prop.value_type += tokens[sig[k]].lexeme;
      ++k;
    }
    if (prop.value_type.empty()) {
      out.malformed = true;
      return;
    }
    if (out.array.has_property(prop.name)) {
      out.duplicate_property = prop.name;
    } else {
      out.array.properties.push_back(std::move(prop));
    }
    if (k < close) ++k;  // ','
  }
  out.last = sig.back();
}

// `guard_t ( <expr> ) <fn> ;`
void parse_guard(const Tokens& tokens, const std::vector<std::size_t>& sig, ParsedLine& out) {
  if (sig.size() < 5 || !tokens[sig[1]].is(TokenKind::kPunctuator, "(")) {
    out.malformed = true;
    return;
  }
  const auto close = lowering::matching_close(tokens, sig[1]);
  if (!close) {
    out.malformed = true;
    return;
  }
  const auto fn = lowering::next_significant(tokens, *close + 1);
  const auto semi = fn ? lowering::next_significant(tokens, *fn + 1) : std::nullopt;
  if (!fn || !semi || tokens[*fn].kind != TokenKind::kIdentifier ||
      !tokens[*semi].is(TokenKind::kPunctuator, ";") || *semi != sig.back()) {
    out.malformed = true;
    return;
  }
  out.guard.guard_expr = lowering::trimmed_text(tokens, sig[1] + 1, *close);
  out.guard.body_fn = tokens[*fn].lexeme;
  if (out.guard.guard_expr.empty()) {
    out.malformed = true;
    return;
  }
  for (std::size_t k = sig[1] + 1; k < *close; ++k) {
    if (tokens[k].kind == TokenKind::kIdentifier) out.guard_identifiers.push_back(tokens[k].lexeme);
  }
  out.last = *semi;
}

ParsedLine parse_line(const Tokens& tokens) {
  ParsedLine out;
  const auto sig = lowering::significant_indices(tokens);
  if (sig.empty() || tokens[sig[0]].kind != TokenKind::kIdentifier) return out;
  const std::string& kw = tokens[sig[0]].lexeme;
  out.first = sig[0];
  if (kw == "sensor_t" || kw == "actuator_t" || kw == "context_t") {
    out.family = Family::kScalar;
    parse_scalar(tokens, sig, out);
  } else if (kw == "reflective_array_t") {
    out.family = Family::kArray;
    parse_array(tokens, sig, out);
  } else if (kw == "guard_t") {
    out.family = Family::kGuard;
    parse_guard(tokens, sig, out);
  }
  return out;
}

class ContextRules final : public lowering::AccessRules {
 public:
  explicit ContextRules(const std::vector<ContextVarSpec>& vars) : vars_(vars) {}

  std::optional<AccessMatch> match(const Tokens& tokens, std::size_t i) const override {
    if (!find(tokens[i].lexeme)) return std::nullopt;
    return AccessMatch{i + 1, tokens[i].lexeme, std::nullopt, {}, {}};
  }
  bool readable(const AccessMatch& m) const override { return find(m.name)->readable(); }
  bool writable(const AccessMatch& m) const override { return find(m.name)->writable(); }
  std::string read_form(const AccessMatch& m, std::string_view) const override {
    return "cpm_ctx_read(" + m.name + ")";
  }
  std::string write_form(const AccessMatch& m, std::string_view value) const override {
    return "cpm_ctx_write(" + m.name + ", " + std::string(value) + ")";
  }
  std::string_view entity_kind() const override { return "context variable"; }

 private:
  const ContextVarSpec* find(const std::string& name) const {
    const auto it = std::find_if(vars_.begin(), vars_.end(),
                                 [&](const ContextVarSpec& v) { return v.name == name; });
    return it == vars_.end() ? nullptr : &*it;
  }

  const std::vector<ContextVarSpec>& vars_;
};

class ArrayRules final : public lowering::AccessRules {
 public:
  explicit ArrayRules(const std::vector<ReflectiveArraySpec>& arrays) : arrays_(arrays) {}

  std::optional<AccessMatch> match(const Tokens& tokens, std::size_t i) const override {
    const auto it = std::find_if(arrays_.begin(), arrays_.end(), [&](const auto& a) {
      return a.name == tokens[i].lexeme;
    });
    if (it == arrays_.end()) return std::nullopt;
    const auto open = lowering::next_significant(tokens, i + 1);
    if (!open || !tokens[*open].is(TokenKind::kPunctuator, "[")) return std::nullopt;
    const auto close = lowering::matching_close(tokens, *open);
    if (!close) return std::nullopt;
    const auto dot = lowering::next_significant(tokens, *close + 1);
    if (!dot || !tokens[*dot].is(TokenKind::kPunctuator, ".")) return std::nullopt;
    const auto prop = lowering::next_significant(tokens, *dot + 1);
    if (!prop || tokens[*prop].kind != TokenKind::kIdentifier) return std::nullopt;

    AccessMatch m{*prop + 1, it->name, lowering::TokenRange{*open + 1, *close}, {},
                  tokens[*prop].lexeme};
    if (!it->has_property(m.detail)) {
      m.reject = "unknown property '" + m.detail + "' of reflective array '" + it->name +
                 "'; left unrewritten";
    }
    return m;
  }
  bool readable(const AccessMatch&) const override { return true; }
  bool writable(const AccessMatch&) const override { return false; }
  std::string read_form(const AccessMatch& m, std::string_view key) const override {
    return "cpm_arr_get(" + m.name + ", (" + std::string(key) + "), " + m.detail + ")";
  }
  std::string write_form(const AccessMatch&, std::string_view) const override { return {}; }
  std::string_view entity_kind() const override { return "reflective array"; }

 private:
  const std::vector<ReflectiveArraySpec>& arrays_;
};

template <typename Rules>
SourceUnit lower_with(const SourceUnit& unit, const Rules& rules, const char* pass_name,
                      const std::string& emitter, Diagnostics& diags) {
  SourceUnit out = unit;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const SourceLine& line = out.line(idx);
    if (!lowering::eligible(line, pass_name)) continue;
    std::string text = lowering::lower_line(line.tokens(), rules, {line.line_no(), emitter}, diags);
    if (text != line.raw()) out.replace_line(idx, std::move(text));
  }
  return out;
}

}  // namespace

const char* abi_token(Direction d) {
  switch (d) {
    case Direction::kSensor: return "CPM_SENSOR";
    case Direction::kActuator: return "CPM_ACTUATOR";
    case Direction::kBoth: return "CPM_BOTH";
  }
  return "CPM_SENSOR";
}

bool ReflectiveArraySpec::has_property(const std::string& prop) const {
  return std::any_of(properties.begin(), properties.end(),
                     [&](const ArrayProperty& p) { return p.name == prop; });
}

std::vector<ContextVarSpec> parse_var_list(const std::string& text, Direction direction,
                                           Diagnostics& diags) {
  std::vector<ContextVarSpec> out;
  if (trim(text).empty()) return out;
  for (const auto& entry : split(text, ',')) {
    ContextVarSpec spec;
    spec.direction = direction;
    std::string rest = entry;
    if (const auto at = rest.find('@'); at != std::string::npos) {
      spec.binding = trim(rest.substr(at + 1));
      rest = rest.substr(0, at);
    }
    const auto colon = rest.find(':');
    spec.name = trim(rest.substr(0, colon));
    spec.value_type = colon == std::string::npos ? "int" : trim(rest.substr(colon + 1));
    if (spec.binding.empty()) spec.binding = spec.name;
    if (!is_identifier(spec.name) || spec.value_type.empty()) {
      diags.push_back({Severity::kWarning, 0,
                       "malformed context variable entry '" + entry + "' in configuration",
                       refractive_id()});
      continue;
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<ArrayProperty> parse_property_list(const std::string& text, Diagnostics& diags) {
  std::vector<ArrayProperty> out;
  if (trim(text).empty()) return out;
  for (const auto& entry : split(text, ',')) {
    const auto colon = entry.find(':');
    ArrayProperty prop{trim(entry.substr(0, colon)),
                       colon == std::string::npos ? "int" : trim(entry.substr(colon + 1))};
    if (!is_identifier(prop.name)) {
      diags.push_back({Severity::kWarning, 0,
                       "malformed array property entry '" + entry + "' in configuration",
                       array_id()});
      continue;
    }
    out.push_back(std::move(prop));
  }
  return out;
}

ContextScan scan_context(const SourceUnit& unit, const PassConfig& config, ScanScope scope) {
  ContextScan result{unit, {}, {}, {}, {}};
  const bool scalars = scope != ScanScope::kArrays;
  const bool arrays = scope != ScanScope::kScalars;
  // Diagnostics of families outside the scope are produced by the other stage.
  Diagnostics ignored;
  Diagnostics& scalar_diags = scalars ? result.diagnostics : ignored;
  Diagnostics& array_diags = arrays ? result.diagnostics : ignored;

  auto add_var = [&](ContextVarSpec spec, std::size_t line_no) {
    const bool dup = std::any_of(result.vars.begin(), result.vars.end(),
                                 [&](const auto& v) { return v.name == spec.name; });
    if (dup) {
      scalar_diags.push_back({Severity::kWarning, line_no,
                              "duplicate context variable '" + spec.name + "'", refractive_id()});
      return false;
    }
    result.vars.push_back(std::move(spec));
    return true;
  };
  auto add_array = [&](ReflectiveArraySpec spec, std::size_t line_no) {
    const bool dup = std::any_of(result.arrays.begin(), result.arrays.end(),
                                 [&](const auto& a) { return a.name == spec.name; });
    if (dup) {
      array_diags.push_back({Severity::kWarning, line_no,
                             "duplicate reflective array '" + spec.name + "'", array_id()});
      return false;
    }
    result.arrays.push_back(std::move(spec));
    return true;
  };

  // Out-of-band declarations.
  const std::pair<const char*, Direction> lists[] = {{"refractive.sensors", Direction::kSensor},
                                                     {"refractive.actuators", Direction::kActuator},
                                                     {"refractive.context", Direction::kBoth}};
  for (const auto& [key, dir] : lists) {
    for (auto& spec : parse_var_list(config.get(key), dir, scalar_diags)) add_var(std::move(spec), 0);
  }
  const std::string array_prefix = std::string(kArrayName) + ".";
  for (const auto& [key, value] : config.values()) {
    if (key.rfind(array_prefix, 0) != 0) continue;
    ReflectiveArraySpec spec;
    spec.name = key.substr(array_prefix.size());
    spec.properties = parse_property_list(value, array_diags);
    add_array(std::move(spec), 0);
  }

  // In-source declarations: collect first so guards may precede the sensors
  // they reference.
  std::vector<std::pair<std::size_t, ParsedLine>> parsed;
  for (std::size_t idx = 0; idx < unit.size(); ++idx) {
    const SourceLine& line = unit.line(idx);
    const bool eligible_scalar = lowering::eligible(line, kRefractiveName);
    const bool eligible_array = lowering::eligible(line, kArrayName);
    if (!eligible_scalar && !eligible_array) continue;
    ParsedLine p = parse_line(line.tokens());
    if (p.family == Family::kNone) continue;
    const bool is_array = p.family == Family::kArray;
    if (is_array ? !eligible_array : !eligible_scalar) continue;
    Diagnostics& diags = is_array ? array_diags : scalar_diags;
    if (p.malformed) {
      diags.push_back({Severity::kWarning, line.line_no(),
                       "unsupported context declaration syntax; line passed through",
                       is_array ? array_id() : refractive_id()});
      continue;
    }
    if (p.family == Family::kScalar && !add_var(p.var, line.line_no())) continue;
    if (p.family == Family::kArray) {
      if (!p.duplicate_property.empty()) {
        diags.push_back({Severity::kWarning, line.line_no(),
                         "duplicate property '" + p.duplicate_property + "' in reflective array '" +
                             p.array.name + "'",
                         array_id()});
      }
      if (!add_array(p.array, line.line_no())) continue;
    }
    parsed.emplace_back(idx, std::move(p));
  }

  for (auto& [idx, p] : parsed) {
    const Tokens& tokens = unit.line(idx).tokens();
    const std::size_t line_no = unit.line(idx).line_no();
    std::string text = leading(tokens, p.first);
    switch (p.family) {
      case Family::kScalar:
        if (!scalars) continue;
        text += "cpm_ctx_register(" + p.var.name + ", " + abi_token(p.var.direction) + ", \"" +
                c_string_escape(p.var.binding) + "\");";
        break;
      case Family::kArray:
        if (!arrays) continue;
        text += "cpm_arr_register(" + p.array.name + ");";
        break;
      case Family::kGuard: {
        if (!scalars) continue;
        const bool references_sensor =
            std::any_of(p.guard_identifiers.begin(), p.guard_identifiers.end(),
                        [&](const std::string& id) {
                          return std::any_of(result.vars.begin(), result.vars.end(),
                                             [&](const ContextVarSpec& v) {
                                               return v.name == id && v.readable();
                                             });
                        });
        if (!references_sensor) {
          scalar_diags.push_back({Severity::kWarning, line_no,
                                  "guard '" + p.guard.guard_expr + "' of '" + p.guard.body_fn +
                                      "' references no declared sensor; guard dropped",
                                  refractive_id()});
          continue;
        }
        text += "cpm_guard_register(" + p.guard.body_fn + ", \"" +
                c_string_escape(p.guard.guard_expr) + "\");";
        result.guards.push_back(p.guard);
        break;
      }
      case Family::kNone: continue;
    }
    text += trailing(tokens, p.last);
    result.unit.replace_line(idx, std::move(text));
  }
  return result;
}

SourceUnit lower_context_accesses(const SourceUnit& unit, const std::vector<ContextVarSpec>& vars,
                                  Diagnostics& diags) {
  if (vars.empty()) return unit;
  return lower_with(unit, ContextRules(vars), kRefractiveName, refractive_id(), diags);
}

SourceUnit lower_array_accesses(const SourceUnit& unit,
                                const std::vector<ReflectiveArraySpec>& arrays,
                                Diagnostics& diags) {
  if (arrays.empty()) return unit;
  return lower_with(unit, ArrayRules(arrays), kArrayName, array_id(), diags);
}

PassResult RefractivePass::transform(const SourceUnit& unit, const PassConfig& config) const {
  auto scan = scan_context(unit, config, ScanScope::kScalars);
  PassResult result{{}, std::move(scan.diagnostics)};
  result.unit = lower_context_accesses(scan.unit, scan.vars, result.diagnostics);
  return result;
}

bool RefractivePass::accepts_key(std::string_view key) const {
  return key == "sensors" || key == "actuators" || key == "context";
}

PassResult ArrayPass::transform(const SourceUnit& unit, const PassConfig& config) const {
  auto scan = scan_context(unit, config, ScanScope::kArrays);
  PassResult result{{}, std::move(scan.diagnostics)};
  result.unit = lower_array_accesses(scan.unit, scan.arrays, result.diagnostics);
  return result;
}

bool ArrayPass::accepts_key(std::string_view key) const { return is_identifier(key); }

}  // namespace cpm::reflective
