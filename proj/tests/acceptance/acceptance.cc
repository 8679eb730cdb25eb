// Copyright 2026 The hwv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance suite. Each check runs under its own wall-clock
// budget and prints a single PASS/FAIL line; the exit status is nonzero when
// any hard check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "axi4_oracle.h"
#include "coverage_oracle.h"
#include "crv_oracle.h"
#include "hwv/axi4.h"
#include "hwv/branch_cov.h"
#include "hwv/crv.h"
#include "hwv/demos.h"
#include "hwv/error.h"
#include "hwv/func_cov.h"
#include "hwv/heapq.h"
#include "hwv/ir.h"
#include "hwv/random.h"
#include "hwv/sim.h"
#include "test_circuits.h"

namespace hwv::acceptance {
namespace {

using ValueMap = std::map<std::string, std::uint64_t, std::less<>>;

// A failed check; `what` says which comparison went wrong.
struct Failure {
  std::string what;
};

void Require(bool condition, const std::string& what) {
  if (!condition) throw Failure{what};
}

struct Check {
  int id;
  std::string name;
  double limit_seconds;
  // Returns an optional note appended to the result line.
  std::function<std::string()> body;
};

// 1. Branch coverage of the single-mux circuit.
std::string BranchCoverage() {
  bcov::Instrumented inst =
      bcov::Instrument(ir::ParseCircuit(demos::kTest1Circuit));
  sim::Simulator sim(inst.circuit);
  bcov::CoverageDb db(inst.validators);
  db.Attach(sim);

  sim.Poke("io_a", 1);
  sim.Expect("out", 0);
  std::string half = bcov::Report(db, inst.circuit).Text();
  Require(half.rfind("COVERAGE: 50.0\n", 0) == 0, "first report is not 50.0");
  std::vector<std::string> minus;
  std::size_t start = 0;
  while (start < half.size()) {
    std::size_t end = half.find('\n', start);
    std::string line = half.substr(start, end - start);
    if (!line.empty() && line[0] == '-') minus.push_back(line);
    start = end == std::string::npos ? half.size() : end + 1;
  }
  Require(minus.size() == 1, fmt::format("{} uncovered lines", minus.size()));
  Require(minus[0] == "-     io_cov_valid_1 <= not(io_a)",
          "wrong uncovered line: " + minus[0]);

  sim.Poke("io_a", 0);
  sim.Expect("out", 0);
  std::string full = bcov::Report(db, inst.circuit).Text();
  Require(full.rfind("COVERAGE: 100.0\n", 0) == 0, "second report is not 100.0");
  Require(full.find("\n-") == std::string::npos, "uncovered line after both");
  return "";
}

// 2. Accumulator plan over 1,000 random samples.
std::string FunctionalCoverage() {
  sim::Simulator sim(ir::ParseCircuit(demos::kAccuCircuit));
  fcov::CoverageReporter cr(sim);
  fcov::CoverGroup plan = demos::AccuPlan();
  cr.Register(plan);
  Rng rng(20260);
  std::uint64_t accu = 0;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t in = rng.Below(4);
    std::uint64_t test = rng.Below(16);
    sim.Poke("in", in);
    sim.Poke("test_in", test);
    cr.Sample(sim);
    const fcov::TraceSample& s = cr.trace().back();
    Require(s.values[cr.PointIndex("accu")] == accu, "stored accu value");
    Require(s.values[cr.PointIndex("test")] == test, "stored test value");
    sim.Step();
    accu = (accu + in) & 0xff;
  }
  Require(cr.trace().size() == 1000, "trace length");

  fcov::FunctionalReport report = cr.GetReport();
  for (const fcov::CoverPoint& p : plan.points) {
    std::size_t index = cr.PointIndex(p.name);
    for (const fcov::Bin& b : p.bins) {
      std::uint64_t recount = 0;
      for (const fcov::TraceSample& s : cr.trace()) {
        recount += testing::In(s.values[index], b.range.lo, b.range.hi);
      }
      Require(report.BinNCases(p.name, b.name) == recount,
              fmt::format("bin {}.{}", p.name, b.name));
    }
  }
  for (const fcov::Cross& c : plan.crosses) {
    std::size_t a = cr.PointIndex(c.point_a), b = cr.PointIndex(c.point_b);
    for (const fcov::CrossBin& bin : c.bins) {
      std::uint64_t recount = 0;
      for (const fcov::TraceSample& s : cr.trace()) {
        recount += testing::In(s.values[a], bin.a.lo, bin.a.hi) &&
                   testing::In(s.values[b], bin.b.lo, bin.b.hi);
      }
      Require(report.CrossBinNCases(c.name, bin.name) == recount,
              fmt::format("cross {}.{}", c.name, bin.name));
    }
  }
  Require(cr.PrintReport() == testing::ExpectedReportText({plan}, cr.trace()),
          "report text differs from the expected rendering");
  return "";
}

// 3. Delayed crosses against the full-scan oracle.
std::string DelayedCoverage() {
  Rng rng(31337);
  const fcov::CrossBin bin{"hit", {1, 1}, {1, 2}};
  int with_gaps = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<testing::OracleSample> trace;
    std::uint64_t cycle = rng.Below(3);
    int length = 1 + static_cast<int>(rng.Below(200));
    bool gap = false;
    for (int i = 0; i < length; ++i) {
      trace.push_back({cycle, rng.Below(3), rng.Below(3)});
      std::uint64_t step = rng.Chance(1, 4) ? 2 + rng.Below(3) : 1;
      gap = gap || (step > 1 && i + 1 < length);
      cycle += step;
    }
    with_gaps += gap;
    for (fcov::DelayKind kind : {fcov::DelayKind::kExactly,
                                 fcov::DelayKind::kEventually,
                                 fcov::DelayKind::kAlways}) {
      for (std::uint64_t n : {1u, 2u, 5u}) {
        fcov::CoverGroup g;
        g.points.push_back({"a", "a", {{"any", {0, 3}}}});
        g.points.push_back({"b", "b", {{"any", {0, 3}}}});
        g.delayed.push_back({"d", "a", "b", {bin}, {kind, n}});
        fcov::CoverageReporter cr;
        cr.Register(g);
        for (const testing::OracleSample& s : trace) {
          cr.Sample(s.cycle, ValueMap{{"a", s.a}, {"b", s.b}});
        }
        std::uint64_t got = cr.GetReport().CrossBinNCases("d", "hit");
        std::uint64_t want = testing::DelayedHitsOracle(trace, kind, n, bin);
        Require(got == want, fmt::format("trace {} kind {} n {}: {} != {}", trial,
                                         static_cast<int>(kind), n, got, want));
      }
    }
  }
  Require(with_gaps > 250, "too few traces with sampling gaps");
  return fmt::format("{} of 500 traces with gaps", with_gaps);
}

// 4. Constraint solving.
std::string ConstraintSolver() {
  crv::RandomProblem unicast = crv::FrameProblem();
  unicast.SetActive(std::vector<std::string>{"common", "unicast"});
  std::vector<crv::Assignment> all = testing::BruteForceSolutions(unicast);
  Require(all.size() == 3, fmt::format("{} unicast solutions", all.size()));
  std::set<crv::Assignment> seen;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    crv::Assignment a = crv::Solve(unicast, seed);
    Require(std::find(all.begin(), all.end(), a) != all.end(),
            fmt::format("seed {} left the solution set", seed));
    seen.insert(a);
  }
  Require(seen.size() == 3, fmt::format("only {} solutions drawn", seen.size()));

  crv::RandomProblem both = crv::FrameProblem();
  both.SetActive(std::vector<std::string>{"common", "unicast", "multicast"});
  bool unsat = false;
  try {
    crv::Solve(both, 1);
  } catch (const Error& e) {
    unsat = e.code() == ErrorCode::kUnsatisfiable;
  }
  Require(unsat, "unicast with multicast was not reported UNSAT");

  Rng rng(4004);
  int unsat_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    crv::RandomProblem p = testing::RandomProblemInstance(rng);
    bool satisfiable = !crv::EnumerateSolutions(p).empty();
    Require(satisfiable == !testing::BruteForceSolutions(p).empty(),
            fmt::format("instance {}: enumerate disagrees with brute force", trial));
    try {
      crv::Assignment a = crv::Solve(p, rng.Next());
      Require(satisfiable, fmt::format("instance {}: solved an UNSAT problem", trial));
      Require(testing::CheckDirectly(p, a),
              fmt::format("instance {}: assignment breaks a constraint", trial));
    } catch (const Error& e) {
      Require(e.code() == ErrorCode::kUnsatisfiable && !satisfiable,
              fmt::format("instance {}: {}", trial, e.what()));
      ++unsat_count;
    }
  }
  return fmt::format("{} of 200 random instances UNSAT", unsat_count);
}

// 5. randc windows.
std::string Randc() {
  for (crv::Value size : {2, 3, 8}) {
    crv::RandomProblem p;
    p.Randc("c", crv::Interval(0, size - 1));
    crv::RandomObject obj(p, 500 + static_cast<std::uint64_t>(size));
    std::vector<crv::Value> draws;
    for (int i = 0; i < 10000; ++i) draws.push_back(obj.Randomize().at("c"));
    for (std::size_t w = 0; w + size <= draws.size(); w += size) {
      std::vector<crv::Value> window(draws.begin() + static_cast<long>(w),
                                     draws.begin() + static_cast<long>(w + size));
      std::sort(window.begin(), window.end());
      Require(window == crv::Interval(0, size - 1),
              fmt::format("size {} window at {} repeats a value", size, w));
    }
  }
  return "";
}

// 6. AXI4 master/slave.
std::string Axi4() {
  sim::Simulator sim(axi4::BusCircuit());
  axi4::MemorySlave slave(sim, {}, 1024, {3, 11});
  axi4::FunctionalMaster master(sim);
  axi4::HandshakeChecker checker(sim);
  axi4::ChannelTracer tracer(sim);
  master.Reset();
  std::vector<std::uint64_t> beats(16, 0x7FFFFFFF);
  axi4::TrxId w = master.CreateWriteTrx(0, beats, 15, 2);
  Require(master.Await(w).resp == axi4::Resp::kOkay, "write response");
  const axi4::Transaction& r = master.Await(master.CreateReadTrx(0, 15, 2));
  Require(r.resp == axi4::Resp::kOkay, "read response");
  Require(r.data == beats, "read data differs from the written beats");
  std::vector<std::uint64_t> w_fires, b_fires;
  for (const axi4::ChannelEvent& e : tracer.events()) {
    if (!e.valid || !e.ready) continue;
    if (e.channel == "w") w_fires.push_back(e.cycle);
    if (e.channel == "b") b_fires.push_back(e.cycle);
  }
  Require(w_fires.size() == 16 && b_fires.size() == 1, "handshake counts");
  Require(b_fires[0] > w_fires[15], "B before the final W handshake");
  Require(checker.violations().empty(), "16-beat run: " + fmt::format(
      "{}", checker.violations().empty() ? "" : checker.violations()[0]));

  std::uint64_t cycles = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    testing::Axi4RunResult run = testing::RunRandomTransactions(seed, 100, 5);
    Require(run.memory == run.oracle,
            fmt::format("seed {}: memory differs from the byte-lane oracle", seed));
    Require(run.read_mismatches == 0, fmt::format("seed {}: read data", seed));
    Require(run.bad_responses == 0, fmt::format("seed {}: responses", seed));
    Require(run.violations.empty(),
            fmt::format("seed {}: {}", seed,
                        run.violations.empty() ? "" : run.violations[0]));
    cycles += run.cycles;
  }
  return fmt::format("{} cycles over 300 random transactions", cycles);
}

// 7. Per-operation timing in lock step with the reference queue.
std::string HeapTiming() {
  struct Config {
    unsigned k;
    std::size_t size;
  };
  std::map<heapq::OpPath, std::uint64_t> counts;
  for (Config c : {Config{2, 33}, Config{4, 33}, Config{8, 65}}) {
    heapq::HeapQueue dut(c.k, c.size);
    heapq::GoldenQueue golden(c.k, c.size);
    Rng rng(7000 + c.k);
    bool draining = false;
    for (int i = 0; i < 10000; ++i) {
      std::string where = fmt::format("k={} size={} op {}", c.k, c.size, i);
      heapq::OpResult res;
      std::optional<heapq::QueueError> want;
      // Bias towards inserts on a small queue so every fill level is visited.
      // Occasional drains empty the queue so head insertions recur.
      draining = dut.size() > 0 && (draining || rng.Chance(1, 100));
      bool insert = !draining &&
                    rng.Below(c.size) >= dut.size() / 2 + rng.Below(c.size / 2);
      std::uint64_t ref = rng.Below(2 * c.size);
      if (insert) {
        heapq::Element e{rng.Below(4), rng.Below(256), ref};
        res = dut.Insert(e);
        want = golden.Insert(e);
      } else {
        // Aim at the head or tail often enough to exercise those paths.
        std::vector<heapq::Element> nodes = dut.Nodes();
        if (draining) {
          ref = nodes[rng.Below(nodes.size())].ref;
        } else if (!nodes.empty() && rng.Chance(1, 4)) {
          ref = rng.Chance(1, 2) ? nodes.front().ref : nodes.back().ref;
        }
        res = dut.Remove(ref);
        want = golden.Remove(ref);
      }
      Require(res.error == want, where + ": error code differs");
      Require(dut.size() == golden.size(), where + ": size differs");
      std::optional<heapq::Element> h = dut.Head(), g = golden.Head();
      Require(h.has_value() == g.has_value() &&
                  (!h || (h->cyclic == g->cyclic && h->normal == g->normal)),
              where + ": head differs");
      if (!res.ok()) continue;
      ++counts[res.path];
      std::uint64_t n = insert ? dut.size() : res.size_before;
      switch (res.path) {
        case heapq::OpPath::kHeadInsertion:
          Require(res.cycles == 2, where + fmt::format(": head insert {}", res.cycles));
          break;
        case heapq::OpPath::kTailRemoval:
          Require(res.cycles == 3, where + fmt::format(": tail removal {}", res.cycles));
          break;
        default: {
          heapq::CycleBounds b = heapq::Bounds(res.path, n, c.k, res.search_cycles);
          Require(res.cycles >= b.min && res.cycles <= b.max,
                  where + fmt::format(": {} took {} outside [{}, {}]",
                                      heapq::OpPathName(res.path), res.cycles,
                                      b.min, b.max));
        }
      }
      if (res.path == heapq::OpPath::kNormalRemoval) {
        Require(res.search_cycles >= 1 &&
                    res.search_cycles <= heapq::SearchTime(res.size_before, c.k),
                where + ": search time");
      }
    }
    heapq::Statistics stats = heapq::RunRandomTest(
        {.k = c.k, .capacity = c.size, .ops = 10000, .seed = 1});
    Require(stats.bound_violations == 0,
            fmt::format("k={} size={}: {} bound violations in the random run",
                        c.k, c.size, stats.bound_violations));
  }
  for (heapq::OpPath p :
       {heapq::OpPath::kHeadInsertion, heapq::OpPath::kNormalInsertion,
        heapq::OpPath::kHeadRemoval, heapq::OpPath::kTailRemoval,
        heapq::OpPath::kNormalRemoval}) {
    Require(counts[p] > 0, fmt::format("path {} never taken", heapq::OpPathName(p)));
  }
  return fmt::format("head ins {}, head rem {}, tail rem {}, normal rem {}",
                     counts[heapq::OpPath::kHeadInsertion],
                     counts[heapq::OpPath::kHeadRemoval],
                     counts[heapq::OpPath::kTailRemoval],
                     counts[heapq::OpPath::kNormalRemoval]);
}

// 8. Average cycles at k=4, size 33. Only the table bounds are hard.
std::string HeapAverages(std::string& json) {
  constexpr unsigned kK = 4;
  constexpr std::size_t kSize = 33;
  heapq::Statistics stats =
      heapq::RunRandomTest({.k = kK, .capacity = kSize, .ops = 10000, .seed = 1});
  json = stats.Json().dump();
  unsigned d = heapq::Depth(kSize, kK);
  double insert_worst = 5.0 + 3.0 * d;
  double remove_worst = 13.0 + 3.0 * d + heapq::SearchTime(kSize, kK);
  Require(stats.avg_insert_cycles >= 2 && stats.avg_insert_cycles <= insert_worst,
          fmt::format("insert average {:.3f} outside [2, {}]",
                      stats.avg_insert_cycles, insert_worst));
  Require(stats.avg_remove_cycles >= 3 && stats.avg_remove_cycles <= remove_worst,
          fmt::format("remove average {:.3f} outside [3, {}]",
                      stats.avg_remove_cycles, remove_worst));
  double di = stats.avg_insert_cycles / 7.96 - 1;
  double dr = stats.avg_remove_cycles / 12.29 - 1;
  bool soft = std::abs(di) <= 0.35 && std::abs(dr) <= 0.35;
  return fmt::format("insert {:.2f} ({:+.1f}%), remove {:.2f} ({:+.1f}%), soft {}",
                     stats.avg_insert_cycles, 100 * di, stats.avg_remove_cycles,
                     100 * dr, soft ? "within 35%" : "OUTSIDE 35%");
}

// 9. Instrumentation leaves circuit outputs unchanged.
std::string Preservation() {
  Rng rng(9090);
  int muxes = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ir::Circuit c = testing::RandomCircuit(rng, 5, 8);
    bcov::Instrumented inst = bcov::Instrument(c);
    muxes += static_cast<int>(inst.validators.size() / 2);
    sim::Simulator original(c);
    sim::Simulator instrumented(inst.circuit);
    bool clocked = !c.top().registers.empty();
    for (int vec = 0; vec < 1000; ++vec) {
      for (const std::string& in : original.Inputs()) {
        std::uint64_t v = rng.Below(testing::Mask(original.Width(in)) + 1);
        original.Poke(in, v);
        instrumented.Poke(in, v);
      }
      for (const std::string& out : original.Outputs()) {
        Require(original.Peek(out) == instrumented.Peek(out),
                fmt::format("circuit {} vector {}: {} differs", trial, vec, out));
      }
      if (clocked) {
        original.Step();
        instrumented.Step();
      }
    }
  }
  return fmt::format("{} muxes instrumented", muxes);
}

}  // namespace
}  // namespace hwv::acceptance

int main() {
  using namespace hwv::acceptance;
  std::string stats_json;
  std::vector<Check> checks = {
      {1, "branch coverage report", 1, BranchCoverage},
      {2, "functional coverage recount", 5, FunctionalCoverage},
      {3, "delayed coverage oracle", 10, DelayedCoverage},
      {4, "constraint solver", 30, ConstraintSolver},
      {5, "randc permutation windows", 5, Randc},
      {6, "axi4 master and slave", 30, Axi4},
      {7, "heap queue timing", 60, HeapTiming},
      {8, "heap queue averages", 60, [&] { return HeapAverages(stats_json); }},
      {9, "instrumentation preserves outputs", 30, Preservation},
  };
  int failures = 0;
  for (const Check& check : checks) {
    auto start = std::chrono::steady_clock::now();
    std::string note, error;
    try {
      note = check.body();
    } catch (const Failure& f) {
      error = f.what;
    } catch (const std::exception& e) {
      error = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    if (error.empty() && seconds > check.limit_seconds) {
      error = fmt::format("over the {} s limit", check.limit_seconds);
    }
    bool pass = error.empty();
    failures += !pass;
    std::string detail = pass ? note : error;
    std::cout << fmt::format("criterion {}: {} ({:.2f} s) {}{}{}\n", check.id,
                             pass ? "PASS" : "FAIL", seconds, check.name,
                             detail.empty() ? "" : ": ", detail);
  }
  if (!stats_json.empty()) std::cout << "heapq statistics: " << stats_json << "\n";
  std::cout << fmt::format("{} of {} criteria passed\n",
                           checks.size() - failures, checks.size());
  return failures == 0 ? 0 : 1;
}
