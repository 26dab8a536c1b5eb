// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails. Expected values come from the reference models in
// support/oracles.hpp or from direct enumeration, never from the code under
// test.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cpm/pipeline.hpp"
#include "cpm/runtime/interpreter.hpp"
#include "cpm/runtime/runtime.hpp"
#include "cpm/scenarios.hpp"
#include "support/oracles.hpp"

namespace {

using namespace cpm;
using rt::TimeMs;
using rt::Value;

const std::string kTests = CPM_TEST_DATA;

struct Check {
  bool ok = true;
  std::string detail;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

std::string transform(const std::vector<std::string>& exts, const std::string& text) {
  return render(run(compose(exts, builtin_registry()), load_unit(text)).first);
}

std::string drop_first_line(const std::string& s) {
  const auto nl = s.find('\n');
  return nl == std::string::npos ? "" : s.substr(nl + 1);
}

// 1. Identifier reconstruction.
Check identifiers() {
  Check c;
  const auto p = compose({"redundancy@1.1", "refractive@0.5", "array@0.5"}, builtin_registry());
  const std::string expected = "cpm://redundancy/1.1;cpm://refractive/0.5;cpm://array/0.5";
  c.expect(publish_ids(p) == expected, "publish_ids = " + publish_ids(p));
  const auto [unit, report] = run(p, load_unit("int y;\n"));
  c.expect(report.extensions_pipeline == expected, "report string differs");
  c.expect(render(unit).rfind("const char *extensions_pipeline = \"" + expected + "\";", 0) == 0,
           "preamble differs");
  return c;
}

// 2. The lowered cyclic example against the equivalent direct TOM calls.
Check table_equivalence() {
  Check c;
  constexpr TimeMs kDeadline1 = 100, kDeadline2 = 250, kNewDeadline2 = 400;
  constexpr TimeMs kControlAt = 500, kHorizon = 10 * kDeadline1;

  rt::Runtime runtime;
  rt::Interpreter program(runtime);
  program.load(transform({"cyclic"}, oracle::read_file(kTests + "/golden/table2.cpm")));
  program.call("insertion");
  runtime.advance_to(kControlAt);
  program.call("control");
  runtime.advance_to(kHorizon);

  // The same schedule written against the timeout manager directly.
  rt::Tom tom;
  const auto t1 = tom.declare("PeriodicMethod1", kDeadline1, true, true);
  tom.set_action(t1, [](rt::Tom&, const rt::FireRecord&) {});
  const auto t2 = tom.declare("PeriodicMethod2", kDeadline2, true, true);
  tom.set_action(t2, [](rt::Tom&, const rt::FireRecord&) {});
  tom.insert(t1);
  tom.insert(t2);
  tom.advance_to(kControlAt);
  tom.disable(t2);
  tom.set_deadline(t2, kNewDeadline2);
  tom.renew(t2);
  tom.remove(t1);
  tom.advance_to(kHorizon);

  c.expect(runtime.tom().fired_log() == tom.fired_log(), "fired logs differ");
  c.expect(!tom.fired_log().empty(), "nothing fired");
  // Both method bodies ran once per firing.
  std::size_t n1 = 0, n2 = 0;
  for (const auto& r : tom.fired_log()) (r.subid == "PeriodicMethod1" ? n1 : n2)++;
  c.expect(program.global("runs1") == static_cast<Value>(n1) && program.global("runs2") == static_cast<Value>(n2),
           "method bodies ran a different number of times");
  return c;
}

// 3. Exhaustive voting over a 3-symbol domain.
Check voting() {
  Check c;
  rt::AdaptPolicy frozen;
  frozen.escalate_threshold = 1.0;  // keep N fixed while enumerating
  for (int n : {3, 5}) {
    const int tolerable = (n - 1) / 2;
    std::vector<Value> pattern(n);
    // Every assignment of the 3 symbols to n replicas, for every written value.
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (Value written = 0; written < 3; ++written) {
      for (int code = 0; code < total; ++code) {
        int corrupted = 0;
        for (int i = 0, k = code; i < n; ++i, k /= 3) {
          pattern[i] = k % 3;
          corrupted += pattern[i] != written;
        }
        if (corrupted > tolerable) continue;
        rt::ReplicaSet<Value> s("v", n, frozen, 8);
        s.write(written);
        for (int i = 0; i < n; ++i) s.inject_fault(i, pattern[i]);
        c.expect(s.read().value == written, "N=" + std::to_string(n) + " lost the written value");
      }
    }
  }
  // N = 3 beyond the tolerance: two identical corruptions win, three distinct fail.
  for (Value w = 0; w < 3; ++w) {
    for (Value bad = 0; bad < 3; ++bad) {
      if (bad == w) continue;
      for (int keep = 0; keep < 3; ++keep) {
        rt::ReplicaSet<Value> s("v", 3, frozen, 8);
        s.write(w);
        for (int i = 0; i < 3; ++i) {
          if (i != keep) s.inject_fault(i, bad);
        }
        c.expect(s.read().value == bad, "2-of-3 corruption did not return the corrupt value");
      }
    }
  }
  const std::vector<std::vector<Value>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                                 {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms) {
    rt::ReplicaSet<Value> s("v", 3, frozen, 8);
    for (int i = 0; i < 3; ++i) s.inject_fault(i, p[i]);
    bool raised = false;
    try {
      s.read();
    } catch (const rt::NoMajority&) {
      raised = true;
    }
    c.expect(raised, "3-distinct pattern did not raise NoMajority");
  }
  return c;
}

// 4. Plain C passes through every pass untouched.
Check pass_through() {
  Check c;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(kTests + "/corpus/plain")) files.push_back(e.path());
  c.expect(files.size() >= 20, "corpus has fewer than 20 files");
  const std::vector<std::vector<std::string>> pipelines = {
      {"redundancy"}, {"refractive"}, {"array"}, {"cyclic"}, {"redundancy", "refractive", "array", "cyclic"}};
  for (const auto& f : files) {
    const std::string text = oracle::read_file(f.string());
    for (const auto& exts : pipelines) {
      const auto p = compose(exts, builtin_registry());
      const std::string out = render(run(p, load_unit(text)).first);
      c.expect(out == preamble_line(publish_ids(p)) + "\n" + text,
               f.filename().string() + " changed under " + oracle::join(exts, ","));
    }
  }
  return c;
}

// 5. Cyclic firing count for random (p, H).
Check cyclic_count() {
  Check c;
  std::mt19937_64 rng(20241016);
  for (int i = 0; i < 50; ++i) {
    const TimeMs h = std::uniform_int_distribution<TimeMs>(1, 1000000)(rng);
    const TimeMs p = std::uniform_int_distribution<TimeMs>(1, h)(rng);
    rt::Runtime runtime;
    runtime.cycle_register("m");
    runtime.bind_function("m", [](rt::Runtime&, const std::vector<Value>&) { return 0; });
    runtime.cycle_set("m", p);
    runtime.advance_to(h);
    std::vector<TimeMs> got;
    for (const auto& r : runtime.tom().fired_log()) got.push_back(r.time);
    c.expect(static_cast<TimeMs>(got.size()) == h / p, "count != floor(H/p) for p=" + std::to_string(p));
    c.expect(got == oracle::cyclic_fire_times(p, h), "fire times differ for p=" + std::to_string(p));
  }
  return c;
}

// 6. Watchdog timer cases against the discrete-event oracle.
Check wdt() {
  using namespace cpm::scenarios;
  Check c;
  WdtParams a;
  for (TimeMs t = 50; t <= 1000; t += 50) a.heartbeats.push_back(t);
  WdtParams b;
  WdtParams restart;
  restart.actuator_writes = {150};

  const auto ra = run_wdt(a), rb = run_wdt(b), rc = run_wdt(restart);
  c.expect(ra.states == oracle::wdt(a), "(a) differs from oracle");
  c.expect(ra.count(WD_FIRED) == 0, "(a) fired");
  c.expect(ra.final_counter() == 9, "(a) final counter is not 9");
  c.expect(rb.states == oracle::wdt(b), "(b) differs from oracle");
  const StateTrace b_head = {{0, WD_STARTED}, {0, WD_ACTIVE}, {100, WD_FIRED}};
  c.expect(rb.states.size() >= 3 && StateTrace(rb.states.begin(), rb.states.begin() + 3) == b_head,
           "(b) did not fire at exactly 100 ms");
  c.expect(rc.states == oracle::wdt(restart), "(c) differs from oracle");
  bool active_at_150 = false;
  for (const auto& [t, s] : rc.states) active_at_150 |= t == 150 && s == WD_ACTIVE;
  c.expect(active_at_150, "(c) not WD_ACTIVE at 150 ms");

  // (d) every single-replica fault at every 10 ms step leaves the traces unchanged.
  for (const auto* base : {&a, &b, &restart}) {
    const auto clean = run_wdt(*base).states;
    for (TimeMs t = 0; t <= base->horizon; t += 10) {
      for (std::size_t replica = 0; replica < 3; ++replica) {
        for (Value corrupt : {WD_FIRED, Value{0}, Value{1000}}) {
          WdtParams p = *base;
          p.faults = {{t, replica, corrupt}};
          c.expect(run_wdt(p).states == clean, "(d) fault at " + std::to_string(t) + " changed the trace");
        }
      }
    }
  }
  return c;
}

// 7. Staleness over five observation periods.
Check staleness() {
  using namespace cpm::scenarios;
  Check c;
  const auto p = load_switchboard_params(kTests + "/data/switchboard.ini");
  c.expect(p.horizon / p.observation_period == 5, "fixture does not span 5 periods");
  const auto records = run_switchboard(p.trace, p.observation_period, p.horizon);
  c.expect(records == oracle::switchboard(p.trace, p.observation_period, p.horizon), "differs from oracle");
  c.expect(records.size() == 15, "expected 3 peers x 5 reports");
  for (const auto& r : records) {
    c.expect(r.stale == (r.mac == "peer2" && r.cycle == 3),
             "cycle " + std::to_string(r.cycle) + " " + r.mac + " staleness wrong");
  }
  return c;
}

// 8. Adaptive escalation and de-escalation.
Check adaptation() {
  Check c;
  rt::Runtime runtime;
  runtime.red_storage("x", 3);
  runtime.red_write("x", 42);
  const auto adapts = [&] {
    std::vector<std::string> out;
    for (const auto& e : runtime.trace()) {
      if (e.kind == rt::TraceKind::kAdapt) out.push_back(e.value);
    }
    return out;
  };
  // One replica corrupted on 5 of the first 16 reads (31%).
  for (int i = 0; i < 16; ++i) {
    if (i % 3 == 0 && runtime.replica_set("x").size() == 3) runtime.inject_fault("x", 1, 7);
    c.expect(runtime.red_read("x") == 42, "wrong voted value");
  }
  c.expect(adapts() == std::vector<std::string>{"3->5"}, "expected exactly one 3->5");
  // Four clean windows of 16 reads after the escalation.
  for (int i = 0; i < 4 * 16; ++i) runtime.red_read("x");
  c.expect(adapts() == std::vector<std::string>{"3->5", "5->3"}, "expected exactly one 5->3");
  for (int i = 0; i < 200; ++i) runtime.red_read("x");
  c.expect(adapts().size() == 2, "further clean reads adapted again");
  c.expect(runtime.replica_set("x").size() == 3, "final replica count is not 3");
  return c;
}

// 9. Passes on disjoint lines commute.
Check confluence() {
  Check c;
  const std::string fixture =
      "redundant_t int counter;\n"
      "cyclic_t int tick(TOM*);\n"
      "int tick(TOM *t) { return 0; }\n"
      "void start(void) {\n"
      "  counter = 0;\n"
      "  tick.Cycle = 100;\n"
      "}\n"
      "int step(void) { counter += 1; return counter; }\n"
      "void stop(void) {\n"
      "  tick.Cycle = 0;\n"
      "}\n";
  const std::string ab = transform({"redundancy", "cyclic"}, fixture);
  const std::string ba = transform({"cyclic", "redundancy"}, fixture);
  c.expect(drop_first_line(ab) == drop_first_line(ba), "bodies differ");
  c.expect(ab != fixture && drop_first_line(ab) != fixture, "fixture was not transformed");
  c.expect(ab.substr(0, ab.find('\n')) != ba.substr(0, ba.find('\n')), "identifier strings should differ");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 identifier reconstruction", identifiers},
      {"2 cyclic syntax equals direct timeout calls", table_equivalence},
      {"3 exhaustive voting", voting},
      {"4 corpus pass-through", pass_through},
      {"5 cyclic firing count", cyclic_count},
      {"6 watchdog timer scenario", wdt},
      {"7 staleness", staleness},
      {"8 adaptive escalation", adaptation},
      {"9 order confluence", confluence},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start).count();
    std::cout << (result.ok ? "PASS " : "FAIL ") << name << " (" << ms << " ms)";
    if (!result.ok) std::cout << ": " << result.detail;
    std::cout << "\n";
    failures += result.ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
