#include "cpm/cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpm/scenarios.hpp"

namespace cpm::cli {

namespace {

bool read_text(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  text = ss.str();
  return true;
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  return static_cast<bool>(out);
}

// CLI11 consumes a reversed argument vector without the program name.
int parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
          std::ostream& err, bool& done) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    done = true;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    done = true;
    return 1;
  }
  done = false;
  return 0;
}

}  // namespace

std::string text_report(const PipelineReport& report) {
  std::string s = "extensions_pipeline: " + report.extensions_pipeline + "\n";
  for (const auto& id : report.applied_ids) s += "applied: " + id.str() + "\n";
  std::size_t warnings = 0;
  for (const auto& d : report.diagnostics) {
    if (d.severity == Severity::kWarning) ++warnings;
    s += "diagnostic: " + format_diagnostic(d) + "\n";
  }
  s += "summary: " + std::to_string(report.diagnostics.size()) + " diagnostics, " +
       std::to_string(warnings) + " warnings\n";
  return s;
}

std::string json_report(const PipelineReport& report) {
  nlohmann::ordered_json j;
  j["extensions_pipeline"] = report.extensions_pipeline;
  j["applied_ids"] = nlohmann::json::array();
  for (const auto& id : report.applied_ids) j["applied_ids"].push_back(id.str());
  j["diagnostics"] = nlohmann::json::array();
  for (const auto& d : report.diagnostics) {
    nlohmann::ordered_json e;
    e["severity"] = to_string(d.severity);
    e["line"] = d.line_no;
    e["emitted_by"] = d.emitted_by;
    e["message"] = d.message;
    j["diagnostics"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

int cpmc_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Apply language-extension passes to augmented C source", "cpmc"};
  std::vector<std::string> exts;
  std::string input, output, config_path, report_path, report_format = "text";
  bool strict = false, list = false;
  app.add_option("--ext", exts, "Extension pass name[@version]; repeat in application order")
      ->allow_extra_args(false);
  app.add_option("-o,--output", output, "Output file (default: standard output)");
  app.add_option("--config", config_path, "INI configuration, one section per extension");
  app.add_flag("--strict-tags", strict, "Honour @ext: line tags and report unconsumed syntax");
  app.add_option("--emit-report", report_path, "Write a report file");
  app.add_option("--report-format", report_format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--list-extensions", list, "Print the registered extension identifiers");
  app.add_option("input", input, "Input file (.cpm)");

  bool done = false;
  const int parsed = parse(app, args, out, err, done);
  if (done) return parsed;

  const auto& registry = builtin_registry();
  if (list) {
    for (const auto& [name, pass] : registry) out << pass->id().str() << "\n";
    return 0;
  }
  if (input.empty()) {
    err << "cpmc: no input file\n";
    return 1;
  }

  std::string text;
  if (!read_text(input, text)) {
    err << "cpmc: cannot read " << input << "\n";
    return 1;
  }

  PassConfig config;
  try {
    if (!config_path.empty()) config = load_pass_config(config_path);
  } catch (const std::exception& e) {
    err << "cpmc: " << e.what() << "\n";
    return 1;
  }
  if (strict) config.set("pipeline.strict_tags", "true");

  Pipeline pipeline;
  try {
    pipeline = compose(exts, registry, config);
  } catch (const std::exception& e) {
    err << "cpmc: " << e.what() << "\n";
    return 1;
  }

  const auto [unit, report] = run(pipeline, load_unit(text, input));
  const std::string rendered = render(unit);
  for (const auto& d : report.diagnostics) err << format_diagnostic(d) << "\n";

  if (output.empty()) {
    out << rendered;
  } else if (!write_text(output, rendered)) {
    err << "cpmc: cannot write " << output << "\n";
    return 1;
  }
  if (!report_path.empty()) {
    const std::string body = report_format == "json" ? json_report(report) : text_report(report);
    if (!write_text(report_path, body)) {
      err << "cpmc: cannot write " << report_path << "\n";
      return 1;
    }
  }
  return 0;
}

int scenario_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Run a case study on the virtual-clock runtime", "cpm-scenario"};
  app.require_subcommand(1);
  std::string params, output;
  auto* wdt = app.add_subcommand("wdt", "Fault-tolerant watchdog timer");
  auto* sb = app.add_subcommand("switchboard", "Cross-layer switchboard over a beacon trace");
  for (auto* sub : {wdt, sb}) {
    sub->add_option("params", params, "INI parameter file")->required();
    sub->add_option("-o,--output", output, "CSV trace file (default: standard output)");
  }

  bool done = false;
  const int parsed = parse(app, args, out, err, done);
  if (done) return parsed;

  std::string csv;
  try {
    if (wdt->parsed()) {
      csv = scenarios::run_wdt(scenarios::load_wdt_params(params)).csv();
    } else {
      const auto p = scenarios::load_switchboard_params(params);
      csv = scenarios::to_csv(scenarios::run_switchboard(p.trace, p.observation_period, p.horizon));
    }
  } catch (const std::exception& e) {
    err << "cpm-scenario: " << e.what() << "\n";
    return 1;
  }
  if (output.empty()) {
    out << csv;
  } else if (!write_text(output, csv)) {
    err << "cpm-scenario: cannot write " << output << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cpm::cli
