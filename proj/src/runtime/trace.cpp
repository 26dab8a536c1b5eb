#include "cpm/runtime/trace.hpp"

namespace cpm::rt {

const char* to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::kFire: return "fire";
    case TraceKind::kGuard: return "guard";
    case TraceKind::kActuate: return "actuate";
    case TraceKind::kVoteFail: return "vote_fail";
    case TraceKind::kAdapt: return "adapt";
  }
  return "?";
}

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const TraceEvent& e) {
  return std::to_string(e.time) + "," + to_string(e.kind) + "," + csv_field(e.name) + "," +
         std::to_string(e.instance) + "," + csv_field(e.value);
}

std::string to_csv(const std::vector<TraceEvent>& events) {
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (const auto& e : events) out += to_csv(e) + "\n";
  return out;
}

}  // namespace cpm::rt
