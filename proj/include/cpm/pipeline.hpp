#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpm/diagnostic.hpp"
#include "cpm/srcmodel.hpp"

namespace cpm {

class UnknownExtension : public std::runtime_error {
 public:
  UnknownExtension(std::string name, std::vector<std::string> registered);
  const std::string& name() const { return name_; }
  const std::vector<std::string>& registered() const { return registered_; }

 private:
  std::string name_;
  std::vector<std::string> registered_;
};

class VersionMismatch : public std::runtime_error {
 public:
  VersionMismatch(const std::string& name, const std::string& requested,
                  const std::string& registered);
};

class InvalidExtensionId : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Published name of a pass: "cpm://<name>/<version>".
class ExtensionId {
 public:
  ExtensionId(std::string name, std::string version);

  static ExtensionId parse(std::string_view canonical);

  const std::string& name() const { return name_; }
  const std::string& version() const { return version_; }
  std::string str() const { return "cpm://" + name_ + "/" + version_; }

  friend bool operator==(const ExtensionId&, const ExtensionId&) = default;

 private:
  std::string name_;
  std::string version_;
};

bool valid_extension_name(std::string_view name);
bool valid_extension_version(std::string_view version);

/// Flat key/value configuration; keys are namespaced by extension name,
/// e.g. "redundancy.replicas".
class PassConfig {
 public:
  PassConfig() = default;
  PassConfig(std::initializer_list<std::pair<const std::string, std::string>> init)
      : values_(init) {}

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, std::string fallback = {}) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  bool strict_tags() const { return get("pipeline.strict_tags") == "true"; }

 private:
  std::map<std::string, std::string> values_;
};

/// Reads an INI file with one section per extension ("[redundancy]\nreplicas=5")
/// into a PassConfig. Throws std::runtime_error on unreadable or malformed files.
PassConfig load_pass_config(const std::string& path);
PassConfig parse_pass_config(std::string_view ini_text);

struct PassResult {
  SourceUnit unit;
  Diagnostics diagnostics;
};

/// A source-to-source filter. Implementations must be stateless between
/// calls and must never reject input.
class ExtensionPass {
 public:
  virtual ~ExtensionPass() = default;

  virtual ExtensionId id() const = 0;
  virtual PassResult transform(const SourceUnit& unit, const PassConfig& config) const = 0;
  /// Whether `key` (without the "<name>." prefix) is a configuration key this
  /// pass understands.
  virtual bool accepts_key(std::string_view key) const = 0;
};

using PassRegistry = std::map<std::string, std::shared_ptr<const ExtensionPass>>;

/// The four built-in passes: redundancy, refractive, array, cyclic.
const PassRegistry& builtin_registry();

struct PipelineReport {
  std::vector<ExtensionId> applied_ids;
  Diagnostics diagnostics;
  std::string extensions_pipeline;
};

class Pipeline {
 public:
  Pipeline() = default;
  Pipeline(std::vector<std::shared_ptr<const ExtensionPass>> passes, PassConfig config,
           Diagnostics compose_diagnostics = {});

  const std::vector<std::shared_ptr<const ExtensionPass>>& passes() const { return passes_; }
  const PassConfig& config() const { return config_; }
  const Diagnostics& compose_diagnostics() const { return compose_diagnostics_; }

 private:
  std::vector<std::shared_ptr<const ExtensionPass>> passes_;
  PassConfig config_;
  Diagnostics compose_diagnostics_;
};

/// Builds a pipeline from "name" or "name@version" entries, in the given order.
Pipeline compose(const std::vector<std::string>& requested, const PassRegistry& registry,
                 PassConfig config = {});

/// Semicolon-joined canonical ids, in application order.
std::string publish_ids(const Pipeline& pipeline);

/// The line injected at the top of every output unit.
std::string preamble_line(std::string_view joined_ids);

std::pair<SourceUnit, PipelineReport> run(const Pipeline& pipeline, const SourceUnit& unit);

}  // namespace cpm
