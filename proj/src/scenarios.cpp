#include "cpm/scenarios.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cpm::scenarios {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long to_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidParams(what + ": '" + text + "' is not an integer");
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidParams(what + ": '" + text + "' is not a number");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParams("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

boost::property_tree::ptree parse_ini(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidParams(std::string("malformed INI: ") + e.what());
  }
  return tree;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string wdt_state_name(Value state) {
  switch (state) {
    case WD_END: return "WD_END";
    case WD_FIRED: return "WD_FIRED";
    case WD_ACTIVE: return "WD_ACTIVE";
    case WD_STARTED: return "WD_STARTED";
    default: return std::to_string(state);
  }
}

// ---- watchdog --------------------------------------------------------------

void WdtParams::validate() const {
  if (period <= 0) throw InvalidParams("wdt period must be positive");
  if (horizon < 0) throw InvalidParams("horizon must not be negative");
  if (replicas < 3 || replicas % 2 == 0) throw InvalidParams("replicas must be odd and >= 3");
  const auto in_horizon = [&](TimeMs t, const char* what) {
    if (t < 0 || t > horizon) {
      throw InvalidParams(std::string(what) + " at " + std::to_string(t) + " ms lies outside [0, " +
                          std::to_string(horizon) + "]");
    }
  };
  for (TimeMs t : heartbeats) in_horizon(t, "heartbeat");
  for (TimeMs t : actuator_writes) in_horizon(t, "actuator write");
  for (const auto& f : faults) {
    in_horizon(f.time, "fault");
    if (f.replica >= static_cast<std::size_t>(replicas)) {
      throw InvalidParams("fault replica index " + std::to_string(f.replica) + " out of range");
    }
  }
}

std::optional<Value> WdtResult::final_counter() const {
  for (auto it = states.rbegin(); it != states.rend(); ++it) {
    if (it->second >= 0) return it->second;
  }
  return std::nullopt;
}

std::size_t WdtResult::count(Value state) const {
  return static_cast<std::size_t>(std::count_if(
      states.begin(), states.end(), [&](const auto& s) { return s.second == state; }));
}

std::string WdtResult::csv() const {
  std::string out = "time_ms,event,detail\n";
  for (const auto& e : events) {
    out += std::to_string(e.time) + "," + rt::csv_field(e.event) + "," + rt::csv_field(e.detail) + "\n";
  }
  return out;
}

WdtResult run_wdt(const WdtParams& p) {
  p.validate();
  rt::Runtime rt;
  WdtResult res;
  std::size_t beats = 0;
  bool ended = false;

  const auto log = [&](std::string event, std::string detail) {
    res.events.push_back({rt.now(), std::move(event), std::move(detail)});
  };
  // The WDT task publishes every state change through the sensor side.
  const auto set_state = [&](Value s) {
    rt.red_write("watchdog", s);
    res.states.emplace_back(rt.now(), s);
    log("state", wdt_state_name(s));
    rt.sensor_update("watchdog", s);
  };
  const auto read_state = [&]() -> std::optional<Value> {
    try {
      return rt.red_read("watchdog");
    } catch (const rt::NoMajority&) {
      log("vote_fail", "watchdog");
      return std::nullopt;
    }
  };

  rt.define_constant("WD_END", WD_END);
  rt.define_constant("WD_FIRED", WD_FIRED);
  rt.define_constant("WD_ACTIVE", WD_ACTIVE);
  rt.define_constant("WD_STARTED", WD_STARTED);
  rt.red_storage("watchdog", p.replicas);
  rt.ctx_register("watchdog", rt::Direction::kBoth, "wdt_control");

  rt.bind_function("wdt_alarm", [&](rt::Runtime&, const std::vector<Value>&) -> Value {
    log("alarm", "watchdog == WD_FIRED");
    return 0;
  });
  rt.guard_register("wdt_alarm", "watchdog == WD_FIRED");

  rt.cycle_register("wdt_tick");
  rt.bind_function("wdt_tick", [&](rt::Runtime& r, const std::vector<Value>&) -> Value {
    const auto s = read_state();
    // An unreadable state is treated like a missed heartbeat: fail safe.
    if (!s || beats == 0) {
      set_state(WD_FIRED);
      r.cycle_set("wdt_tick", 0);
    } else {
      set_state(*s < 0 ? 1 : *s + 1);
    }
    beats = 0;
    return 0;
  });

  rt.bind_actuator("wdt_control", [&](const std::string&, Value v) {
    if (ended) return;
    const auto s = read_state();
    if (!s || *s == WD_FIRED) {
      log("actuator_write", "value=" + std::to_string(v) + " restart");
      beats = 0;
      set_state(WD_ACTIVE);
      rt.cycle_set("wdt_tick", p.period);
    } else {
      log("actuator_write", "value=" + std::to_string(v) + " ignored");
    }
  });

  // External events are inserted before the timer so that at equal times
  // they run first: faults, heartbeats, actuator writes, then the horizon.
  for (const auto& f : p.faults) {
    rt.schedule_at(f.time, "fault", [&, f] {
      if (ended) return;
      const auto n = static_cast<std::size_t>(rt.replica_set("watchdog").size());
      const std::size_t index = f.replica % n;
      rt.inject_fault("watchdog", index, f.corrupt);
      log("fault", "replica=" + std::to_string(index) + " value=" + std::to_string(f.corrupt));
    });
  }
  for (TimeMs t : p.heartbeats) {
    rt.schedule_at(t, "heartbeat", [&] {
      if (ended) return;
      ++beats;
      log("heartbeat", "");
    });
  }
  for (TimeMs t : p.actuator_writes) {
    rt.schedule_at(t, "actuator_write", [&] { rt.ctx_write("watchdog", 1); });
  }
  rt.schedule_at(p.horizon, "horizon", [&] {
    if (rt.cycle_get("wdt_tick") != 0) rt.cycle_set("wdt_tick", 0);
    set_state(WD_END);
    ended = true;
  });

  // Activation message at t = 0.
  set_state(WD_STARTED);
  log("activation", "");
  set_state(WD_ACTIVE);
  rt.cycle_set("wdt_tick", p.period);

  rt.advance_to(p.horizon);
  res.runtime_trace = rt.trace();
  return res;
}

WdtParams parse_wdt_params(const std::string& ini_text) {
  const auto tree = parse_ini(ini_text);
  const auto section = tree.get_child_optional("wdt");
  if (!section) throw InvalidParams("missing [wdt] section");
  WdtParams p;
  for (const auto& [key, node] : *section) {
    const std::string value = trim(node.data());
    const std::string what = "wdt." + key;
    if (key == "period") {
      p.period = to_int(value, what);
    } else if (key == "horizon") {
      p.horizon = to_int(value, what);
    } else if (key == "replicas") {
      p.replicas = static_cast<int>(to_int(value, what));
    } else if (key == "heartbeats") {
      for (const auto& t : split(value, ',')) p.heartbeats.push_back(to_int(t, what));
    } else if (key == "heartbeat_every") {
      const TimeMs every = to_int(value, what);
      if (every <= 0) throw InvalidParams(what + " must be positive");
      p.heartbeats.push_back(-every);  // expanded once the horizon is known
    } else if (key == "actuator_writes") {
      for (const auto& t : split(value, ',')) p.actuator_writes.push_back(to_int(t, what));
    } else if (key == "faults") {
      for (const auto& f : split(value, ',')) {
        const auto parts = split(f, ':');
        if (parts.size() != 3) throw InvalidParams(what + ": expected time:replica:value, got '" + f + "'");
        p.faults.push_back({to_int(parts[0], what), static_cast<std::size_t>(to_int(parts[1], what)),
                            to_int(parts[2], what)});
      }
    } else {
      throw InvalidParams("unknown key " + what);
    }
  }
  std::vector<TimeMs> beats;
  for (TimeMs t : p.heartbeats) {
    if (t >= 0) {
      beats.push_back(t);
      continue;
    }
    for (TimeMs k = -t; k <= p.horizon; k += -t) beats.push_back(k);
  }
  std::sort(beats.begin(), beats.end());
  p.heartbeats = std::move(beats);
  p.validate();
  return p;
}

WdtParams load_wdt_params(const std::filesystem::path& path) { return parse_wdt_params(read_file(path)); }

// ---- switchboard -----------------------------------------------------------

void BeaconTrace::validate() const {
  TimeMs last = 0;
  for (const auto& b : records) {
    if (b.time < last) throw InvalidParams("beacon times must be non-decreasing");
    if (b.mac.empty()) throw InvalidParams("beacon without a MAC address");
    last = b.time;
  }
}

BeaconTrace parse_beacon_csv(const std::string& csv_text) {
  BeaconTrace trace;
  std::istringstream in(csv_text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line != "time_ms,mac,rate") throw InvalidParams("beacon CSV must start with 'time_ms,mac,rate'");
      continue;
    }
    const auto fields = split(line, ',');
    const std::string where = "beacon line " + std::to_string(line_no);
    if (fields.size() != 3) throw InvalidParams(where + ": expected 3 fields");
    trace.records.push_back({to_int(fields[0], where), fields[1], to_double(fields[2], where)});
  }
  trace.validate();
  return trace;
}

std::vector<SwitchboardRecord> run_switchboard(const BeaconTrace& trace, TimeMs observation_period,
                                               TimeMs horizon, const MetricSink& sink) {
  if (observation_period <= 0) throw InvalidParams("observation period must be positive");
  if (horizon < 0) throw InvalidParams("horizon must not be negative");
  trace.validate();
  for (const auto& b : trace.records) {
    if (b.time > horizon) throw InvalidParams("beacon at " + std::to_string(b.time) + " ms beyond horizon");
  }

  rt::RuntimeOptions options;
  options.observation_period = observation_period;
  rt::Runtime rt(rt::ClockMode::kVirtual, options);
  rt.arr_register("linkbeacons");
  std::map<std::string, double> linkrates;  // latest rate estimate per peer
  std::vector<SwitchboardRecord> records;
  std::size_t cycle = 0;
  const TimeMs last_boundary = (horizon / observation_period) * observation_period;

  // Beacons go in first so that one arriving exactly on a boundary counts
  // for the cycle that boundary closes.
  for (const auto& b : trace.records) {
    if (b.time > last_boundary) break;
    rt.schedule_at(b.time, "beacon", [&, b] {
      rt.arr_report_beacon("linkbeacons", b.mac);
      linkrates[b.mac] = b.rate_estimate;
    });
  }

  rt.cycle_register("observe");
  rt.bind_function("observe", [&](rt::Runtime& r, const std::vector<Value>&) -> Value {
    ++cycle;
    r.arr_rollover("linkbeacons");
    std::size_t cursor = 0;
    while (const auto mac = r.anext("linkbeacons", cursor)) {
      SwitchboardRecord rec{cycle, *mac, r.arr_get("linkbeacons", *mac, "stale") != 0, 0.0};
      if (!rec.stale) {
        const auto silent = r.arr_get("linkbeacons", *mac, "silent_periods");
        rec.metric = linkrates[*mac] / (1.0 + static_cast<double>(silent));
      }
      if (sink) sink(rec);
      records.push_back(std::move(rec));
    }
    return 0;
  });
  if (last_boundary > 0) rt.cycle_set("observe", observation_period);
  rt.advance_to(horizon);
  return records;
}

std::string to_csv(const std::vector<SwitchboardRecord>& records) {
  std::string out = "cycle,mac,metric_or_stale\n";
  for (const auto& r : records) {
    out += std::to_string(r.cycle) + "," + rt::csv_field(r.mac) + "," +
           (r.stale ? std::string("stale") : format_number(r.metric)) + "\n";
  }
  return out;
}

SwitchboardParams parse_switchboard_params(const std::string& ini_text,
                                           const std::filesystem::path& base_dir) {
  const auto tree = parse_ini(ini_text);
  const auto section = tree.get_child_optional("switchboard");
  if (!section) throw InvalidParams("missing [switchboard] section");
  SwitchboardParams p;
  bool have_horizon = false;
  for (const auto& [key, node] : *section) {
    const std::string value = trim(node.data());
    const std::string what = "switchboard." + key;
    if (key == "observation_period") {
      p.observation_period = to_int(value, what);
    } else if (key == "horizon") {
      p.horizon = to_int(value, what);
      have_horizon = true;
    } else if (key == "trace") {
      std::filesystem::path path(value);
      if (path.is_relative()) path = base_dir / path;
      p.trace = parse_beacon_csv(read_file(path));
    } else {
      throw InvalidParams("unknown key " + what);
    }
  }
  if (!have_horizon) throw InvalidParams("switchboard.horizon is required");
  return p;
}

SwitchboardParams load_switchboard_params(const std::filesystem::path& path) {
  return parse_switchboard_params(read_file(path), path.parent_path());
}

}  // namespace cpm::scenarios
