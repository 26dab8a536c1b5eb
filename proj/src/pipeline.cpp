#include "cpm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cpm/ext_cyclic.hpp"
#include "cpm/ext_redundancy.hpp"
#include "cpm/ext_reflective.hpp"
#include "lowering.hpp"

namespace cpm {

namespace {

constexpr const char* kPipelineEmitter = "pipeline";
constexpr std::string_view kTagPrefix = "@ext:";

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Extension keywords and the passes that consume them.
struct KeywordOwner {
  std::string_view keyword;
  std::string_view candidates;
};
constexpr KeywordOwner kKeywordOwners[] = {
    {"redundant_t", "redundancy"},       {"cyclic_t", "cyclic"},
    {"Cycle", "cyclic"},                 {"sensor_t", "refractive"},
    {"actuator_t", "refractive"},        {"context_t", "refractive"},
    {"guard_t", "refractive"},           {"reflective_array_t", "array"},
};

// Strips `@ext:<name>` prefixes into line tags.
SourceUnit apply_tags(const SourceUnit& unit, const PassRegistry* known, Diagnostics& diags) {
  SourceUnit out = unit;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    const SourceLine& line = out.line(idx);
    if (line.starts_in_comment()) continue;
    const std::string& raw = line.raw();
    const auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw.compare(first, kTagPrefix.size(), kTagPrefix) != 0) {
      continue;
    }
    std::size_t end = first + kTagPrefix.size();
    while (end < raw.size() && (std::isalnum(static_cast<unsigned char>(raw[end])) || raw[end] == '_')) {
      ++end;
    }
    const std::string tag = raw.substr(first + kTagPrefix.size(), end - first - kTagPrefix.size());
    if (tag.empty()) continue;
    if (known && known->count(tag) == 0) {
      diags.push_back({Severity::kWarning, line.line_no(),
                       "line tagged for unknown extension '" + tag + "'", kPipelineEmitter});
    }
    std::size_t body = end;
    if (body < raw.size() && raw[body] == ' ') ++body;
    std::string text = raw.substr(0, first) + raw.substr(body);
    out.replace_line(idx, std::move(text));
    out.set_tag(idx, tag);
  }
  return out;
}

void check_unconsumed(const SourceUnit& unit, Diagnostics& diags) {
  for (const SourceLine& line : unit.lines()) {
    if (line.comment_only()) continue;
    const auto& tokens = line.tokens();
    std::set<std::string_view> seen;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (tokens[k].kind != TokenKind::kIdentifier) continue;
      for (const auto& owner : kKeywordOwners) {
        if (tokens[k].lexeme != owner.keyword) continue;
        if (owner.keyword == "Cycle") {
          const auto p = lowering::prev_significant(tokens, k);
          if (!p || !tokens[*p].is(TokenKind::kPunctuator, ".")) continue;
        }
        if (!seen.insert(owner.keyword).second) continue;
        const std::string shown =
            owner.keyword == "Cycle" ? std::string(".Cycle") : std::string(owner.keyword);
        diags.push_back({Severity::kWarning, line.line_no(),
                         "extension keyword '" + shown +
                             "' not consumed by any pass; candidate passes: " +
                             std::string(owner.candidates),
                         kPipelineEmitter});
      }
    }
  }
}

}  // namespace

const char* to_string(Severity severity) {
  return severity == Severity::kInfo ? "info" : "warning";
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string s = std::string(to_string(d.severity)) + " " + d.emitted_by;
  if (d.line_no) s += " line " + std::to_string(d.line_no);
  return s + ": " + d.message;
}

UnknownExtension::UnknownExtension(std::string name, std::vector<std::string> registered)
    : std::runtime_error("unknown extension '" + name + "' (registered: " + join(registered, ", ") +
                         ")"),
      name_(std::move(name)),
      registered_(std::move(registered)) {}

VersionMismatch::VersionMismatch(const std::string& name, const std::string& requested,
                                 const std::string& registered)
    : std::runtime_error("extension '" + name + "' requested at version " + requested +
                         " but version " + registered + " is registered") {}

bool valid_extension_name(std::string_view name) {
  static const std::regex re("[a-z0-9_]+");
  return std::regex_match(name.begin(), name.end(), re);
}

bool valid_extension_version(std::string_view version) {
  static const std::regex re("[0-9]+(\\.[0-9]+)*");
  return std::regex_match(version.begin(), version.end(), re);
}

ExtensionId::ExtensionId(std::string name, std::string version)
    : name_(std::move(name)), version_(std::move(version)) {
  if (!valid_extension_name(name_)) throw InvalidExtensionId("invalid extension name '" + name_ + "'");
  if (!valid_extension_version(version_)) {
    throw InvalidExtensionId("invalid extension version '" + version_ + "'");
  }
}

ExtensionId ExtensionId::parse(std::string_view canonical) {
  constexpr std::string_view scheme = "cpm://";
  if (canonical.substr(0, scheme.size()) != scheme) {
    throw InvalidExtensionId("extension id must start with cpm://: '" + std::string(canonical) + "'");
  }
  const auto rest = canonical.substr(scheme.size());
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) {
    throw InvalidExtensionId("extension id lacks a version: '" + std::string(canonical) + "'");
  }
  return ExtensionId(std::string(rest.substr(0, slash)), std::string(rest.substr(slash + 1)));
}

std::string PassConfig::get(const std::string& key, std::string fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

PassConfig parse_pass_config(std::string_view ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::runtime_error("malformed configuration: " + e.message() + " (line " +
                             std::to_string(e.line()) + ")");
  }
  PassConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      config.set(section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) config.set(section + "." + key, value.data());
  }
  return config;
}

PassConfig load_pass_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read configuration file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_pass_config(text.str());
}

const PassRegistry& builtin_registry() {
  static const PassRegistry registry = [] {
    PassRegistry r;
    r[redundancy::kName] = std::make_shared<redundancy::RedundancyPass>();
    r[reflective::kRefractiveName] = std::make_shared<reflective::RefractivePass>();
    r[reflective::kArrayName] = std::make_shared<reflective::ArrayPass>();
    r[cyclic::kName] = std::make_shared<cyclic::CyclicPass>();
    return r;
  }();
  return registry;
}

Pipeline::Pipeline(std::vector<std::shared_ptr<const ExtensionPass>> passes, PassConfig config,
                   Diagnostics compose_diagnostics)
    : passes_(std::move(passes)),
      config_(std::move(config)),
      compose_diagnostics_(std::move(compose_diagnostics)) {}

Pipeline compose(const std::vector<std::string>& requested, const PassRegistry& registry,
                 PassConfig config) {
  std::vector<std::string> registered;
  for (const auto& [name, pass] : registry) registered.push_back(name);

  std::vector<std::shared_ptr<const ExtensionPass>> passes;
  Diagnostics diags;
  std::set<std::string> seen;
  for (const auto& entry : requested) {
    const auto at = entry.find('@');
    const std::string name = entry.substr(0, at);
    const auto it = registry.find(name);
    if (it == registry.end()) throw UnknownExtension(name, registered);
    const ExtensionId id = it->second->id();
    if (at != std::string::npos && entry.substr(at + 1) != id.version()) {
      throw VersionMismatch(name, entry.substr(at + 1), id.version());
    }
    if (!seen.insert(name).second) {
      diags.push_back({Severity::kWarning, 0,
                       "extension '" + id.str() + "' appears more than once in the pipeline",
                       kPipelineEmitter});
    }
    passes.push_back(it->second);
  }

  for (const auto& [key, value] : config.values()) {
    const auto dot = key.find('.');
    const std::string ns = key.substr(0, dot);
    const std::string sub = dot == std::string::npos ? std::string() : key.substr(dot + 1);
    if (ns == "pipeline" && sub == "strict_tags") continue;
    const auto it = registry.find(ns);
    if (it == registry.end() || !it->second->accepts_key(sub)) {
      diags.push_back({Severity::kWarning, 0, "unknown configuration key '" + key + "'",
                       kPipelineEmitter});
    }
  }
  return Pipeline(std::move(passes), std::move(config), std::move(diags));
}

std::string publish_ids(const Pipeline& pipeline) {
  std::vector<std::string> ids;
  for (const auto& pass : pipeline.passes()) ids.push_back(pass->id().str());
  return join(ids, ";");
}

std::string preamble_line(std::string_view joined_ids) {
  return "const char *extensions_pipeline = \"" + std::string(joined_ids) +
         "\"; /* cpm preamble */";
}

std::pair<SourceUnit, PipelineReport> run(const Pipeline& pipeline, const SourceUnit& unit) {
  PipelineReport report;
  report.diagnostics = pipeline.compose_diagnostics();
  const bool strict = pipeline.config().strict_tags();

  SourceUnit current = strict ? apply_tags(unit, &builtin_registry(), report.diagnostics) : unit;
  for (const auto& pass : pipeline.passes()) {
    PassResult result = pass->transform(current, pipeline.config());
    current = std::move(result.unit);
    report.diagnostics.insert(report.diagnostics.end(), result.diagnostics.begin(),
                              result.diagnostics.end());
    report.applied_ids.push_back(pass->id());
  }
  if (strict) check_unconsumed(current, report.diagnostics);

  report.extensions_pipeline = publish_ids(pipeline);
  if (current.empty()) current.set_final_newline(true);
  current.insert_line(0, preamble_line(report.extensions_pipeline));
  return {std::move(current), std::move(report)};
}

}  // namespace cpm
