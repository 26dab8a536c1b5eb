#pragma once

// Entry points of the two command-line tools, callable in-process for tests.
// Both return the process exit status: 0 on success, 1 on error.

#include <iosfwd>
#include <string>
#include <vector>

#include "cpm/pipeline.hpp"

namespace cpm::cli {

/// cpmc: compose passes in command-line order, transform one input file.
///   cpmc [--ext name[@ver]]... [-o out.c] [--config cfg.ini] [--strict-tags]
///        [--emit-report path] [--report-format text|json] [--list-extensions] in.cpm
int cpmc_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// cpm-scenario: run a case study from an INI parameter file.
///   cpm-scenario wdt params.ini [-o trace.csv]
///   cpm-scenario switchboard params.ini [-o records.csv]
int scenario_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Plain-text report: one `key: value` record per line.
std::string text_report(const PipelineReport& report);
/// The same content as a JSON object.
std::string json_report(const PipelineReport& report);

}  // namespace cpm::cli
