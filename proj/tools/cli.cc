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

#include "cli.h"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

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

namespace hwv::cli {
namespace {

struct Options {
  std::string input;
  std::string suite;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> format;
  std::string out;
  unsigned k = 4;
  std::size_t size = 33;
  std::optional<std::uint64_t> ops;

  bool json(bool default_json = false) const {
    return format ? *format == "json" : default_json;
  }
};

// A finished command: report text and exit code.
struct Outcome {
  int code = kExitPass;
  std::string report;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", path));
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

nlohmann::json ReadJson(const std::string& path) {
  try {
    return nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(fmt::format("{}: {}", path, e.what()));
  }
}

int Pass(bool ok) { return ok ? kExitPass : kExitFailure; }

// ---------------------------------------------------------------------------
// Suites

Outcome BranchCovDemo(const Options& opts) {
  bcov::Instrumented inst =
      bcov::Instrument(ir::ParseCircuit(demos::kTest1Circuit));
  sim::Simulator sim(inst.circuit);
  bcov::CoverageDb db(inst.validators);
  db.Attach(sim);
  sim.Poke("io_a", 1);
  sim.Poke("io_b_0", 2);
  sim.Poke("io_b_1", 1);
  bool ok = sim.Expect("out", 2).pass;
  bcov::BranchCoverageReport report = bcov::Report(db, inst.circuit);
  return {Pass(ok), opts.json() ? report.Json().dump(2) + "\n" : report.Text()};
}

Outcome FuncCovDemo(const Options& opts) {
  sim::Simulator sim(ir::ParseCircuit(demos::kAccuCircuit));
  fcov::CoverageReporter coverage(sim);
  coverage.Register(demos::AccuPlan());
  Rng rng(opts.seed);
  std::uint64_t acc = 0;
  bool ok = true;
  for (std::uint64_t i = 0; i < opts.ops.value_or(100); ++i) {
    std::uint64_t in = rng.Below(4);
    std::uint64_t test = rng.Below(16);
    sim.Poke("in", in);
    sim.Poke("test_in", test);
    sim.Step();
    acc = (acc + in) & 0xff;
    ok = sim.Expect("accu", acc).pass && ok;
    ok = sim.Expect("test", test).pass && ok;
    coverage.Sample(sim);
  }
  fcov::FunctionalReport report = coverage.GetReport();
  return {Pass(ok), opts.json() ? report.Json().dump(2) + "\n" : report.Text()};
}

std::string AssignmentText(const crv::Assignment& a) {
  std::string text;
  for (const auto& [name, value] : a) {
    text += fmt::format("{}{}={}", text.empty() ? "" : " ", name, value);
  }
  return text;
}

Outcome CrvDemo(const Options& opts) {
  crv::RandomObject frame(crv::FrameProblem(), opts.seed);
  nlohmann::json json = nlohmann::json::object();
  std::string text;
  bool ok = true;
  for (const char* mode : {"unicast", "multicast"}) {
    frame.SetActive(std::vector<std::string>{"common", mode});
    json[mode] = nlohmann::json::array();
    for (std::uint64_t i = 0; i < opts.ops.value_or(10); ++i) {
      crv::Assignment a = frame.Randomize();
      ok = frame.problem().Satisfies(a) && ok;
      json[mode].push_back(crv::AssignmentToJson(a));
      text += fmt::format("{}: {}\n", mode, AssignmentText(a));
    }
  }
  // With every block active the frame constraints contradict each other.
  crv::RandomProblem all = crv::FrameProblem();
  try {
    crv::Solve(all, opts.seed);
    ok = false;
    text += "all blocks: unexpectedly satisfiable\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnsatisfiable) throw;
    std::vector<std::string> conflict = crv::MinimalConflict(all);
    json["conflict"] = conflict;
    text += fmt::format("all blocks: UNSAT, conflicting blocks: [{}]\n",
                        fmt::join(conflict, ", "));
  }
  return {Pass(ok), opts.json() ? json.dump(2) + "\n" : text};
}

Outcome Axi4Demo(const Options& opts) {
  sim::Simulator sim(axi4::BusCircuit());
  axi4::MemorySlave slave(sim, {}, 1024, {0, opts.seed});
  axi4::FunctionalMaster master(sim);
  axi4::HandshakeChecker checker(sim);
  axi4::ChannelTracer tracer(sim);
  master.Reset();

  std::vector<std::uint64_t> beats(16, 0x7FFFFFFF);
  const axi4::Transaction write =
      master.Await(master.CreateWriteTrx(0, beats, 15, 2));
  const axi4::Transaction read = master.Await(master.CreateReadTrx(0, 15, 2));

  std::vector<std::uint64_t> w_fires, b_fires;
  for (const axi4::ChannelEvent& e : tracer.events()) {
    if (!(e.valid && e.ready)) continue;
    if (e.channel == "w") w_fires.push_back(e.cycle);
    if (e.channel == "b") b_fires.push_back(e.cycle);
  }
  bool b_after_w = w_fires.size() == 16 && b_fires.size() == 1 &&
                   b_fires[0] > w_fires[15];
  bool ok = write.resp == axi4::Resp::kOkay && read.resp == axi4::Resp::kOkay &&
            read.data == beats && checker.violations().empty() && b_after_w;

  auto describe = [](const axi4::Transaction& t) {
    return nlohmann::json{{"id", t.id},
                          {"addr", t.addr},
                          {"len", t.len},
                          {"size", t.size},
                          {"resp", std::string(axi4::RespName(t.resp))}};
  };
  if (opts.json()) {
    nlohmann::json j;
    j["write"] = describe(write);
    j["read"] = describe(read);
    j["read"]["data"] = read.data;
    j["violations"] = checker.violations();
    j["b_after_last_w"] = b_after_w;
    j["cycles"] = sim.cycle();
    return {Pass(ok), j.dump(2) + "\n"};
  }
  std::string text = fmt::format(
      "write {}: addr={:#x} len={} size={} resp={}\n", write.id, write.addr,
      write.len, write.size, axi4::RespName(write.resp));
  text += fmt::format("read {}: addr={:#x} len={} size={} resp={}\n", read.id,
                      read.addr, read.len, read.size,
                      axi4::RespName(read.resp));
  std::vector<std::string> words;
  for (std::uint64_t v : read.data) words.push_back(fmt::format("{:#x}", v));
  text += fmt::format("read data: {}\n", fmt::join(words, " "));
  text += fmt::format("B after last W: {}\n", b_after_w ? "yes" : "no");
  text += fmt::format("handshake violations: {}\n", checker.violations().size());
  for (const std::string& v : checker.violations()) text += "  " + v + "\n";
  text += fmt::format("cycles: {}\n", sim.cycle());
  return {Pass(ok), text};
}

std::string StatisticsText(const heapq::Statistics& s) {
  std::string text = fmt::format("k={} size={} ops={}\n", s.k, s.size, s.ops);
  text += fmt::format("avg insert cycles: {:.2f} ({} inserts)\n",
                      s.avg_insert_cycles, s.inserts);
  text += fmt::format("avg remove cycles: {:.2f} ({} removes)\n",
                      s.avg_remove_cycles, s.removes);
  text += fmt::format("valid fraction: {:.3f}\n", s.valid_fraction);
  text += fmt::format("cycle bound violations: {}\n", s.bound_violations);
  return text + s.coverage.Text();
}

Outcome QueueOutcome(const Options& opts, const heapq::Statistics& s) {
  std::string report = opts.json(/*default_json=*/true)
                           ? s.Json().dump(2) + "\n"
                           : StatisticsText(s);
  return {Pass(s.bound_violations == 0), report};
}

void CheckQueueOptions(const Options& opts) {
  if (opts.k < 2 || (opts.k & (opts.k - 1)) != 0) {
    throw UsageError(fmt::format("--k must be a power of two >= 2, got {}", opts.k));
  }
  if (opts.size == 0) throw UsageError("--size must be at least 1");
}

Outcome HeapqSuite(const Options& opts) {
  CheckQueueOptions(opts);
  heapq::RunConfig config;
  config.k = opts.k;
  config.capacity = opts.size;
  config.ops = opts.ops.value_or(10000);
  config.seed = opts.seed;
  if (config.ops == 0) throw UsageError("--ops must be at least 1");
  return QueueOutcome(opts, heapq::RunRandomTest(config));
}

// ---------------------------------------------------------------------------
// Commands

Outcome Instrument(const Options& opts) {
  ir::Circuit circuit = ir::ParseCircuit(ReadFile(opts.input));
  return {kExitPass, ir::SerializeCircuit(bcov::Instrument(circuit).circuit)};
}

Outcome RunSuite(const Options& opts) {
  if (opts.suite == "branchcov-demo") return BranchCovDemo(opts);
  if (opts.suite == "funccov-demo") return FuncCovDemo(opts);
  if (opts.suite == "crv-demo") return CrvDemo(opts);
  if (opts.suite == "axi4-demo") return Axi4Demo(opts);
  return HeapqSuite(opts);
}

Outcome Solve(const Options& opts) {
  crv::RandomProblem problem;
  try {
    problem = crv::ProblemFromJson(ReadJson(opts.input));
  } catch (const Error& e) {
    throw UsageError(fmt::format("{}: {}", opts.input, e.what()));
  }
  crv::RandomObject object(std::move(problem), opts.seed);
  nlohmann::json all = nlohmann::json::array();
  std::string text;
  for (std::uint64_t i = 0; i < opts.ops.value_or(1); ++i) {
    crv::Assignment a = object.Randomize();
    all.push_back(crv::AssignmentToJson(a));
    text += AssignmentText(a) + "\n";
  }
  return {kExitPass, opts.json() ? all.dump(2) + "\n" : text};
}

Outcome Trace(const Options& opts) {
  sim::Simulator sim(ir::ParseCircuit(ReadFile(opts.input)));
  sim.EnableTrace();
  Rng rng(opts.seed);
  for (std::uint64_t i = 0; i < opts.ops.value_or(10); ++i) {
    for (const std::string& input : sim.Inputs()) {
      unsigned width = sim.Width(input);
      sim.Poke(input, width >= 64 ? rng.Next() : rng.Below(1ULL << width));
    }
    sim.Step();
  }
  std::ostringstream csv;
  sim.WriteTraceCsv(csv);
  return {kExitPass, csv.str()};
}

Outcome ReplayOps(const Options& opts) {
  CheckQueueOptions(opts);
  std::vector<heapq::Op> ops;
  try {
    ops = heapq::OpsFromJson(ReadJson(opts.input));
  } catch (const Error& e) {
    throw UsageError(fmt::format("{}: {}", opts.input, e.what()));
  }
  return QueueOutcome(opts, heapq::Replay(opts.k, opts.size, ops));
}

int Finish(const Options& opts, const Outcome& outcome, std::ostream& out,
           std::ostream& err) {
  if (opts.out.empty()) {
    out << outcome.report;
    return outcome.code;
  }
  std::ofstream file(opts.out, std::ios::binary);
  file << outcome.report;
  if (!file) {
    err << fmt::format("error: cannot write '{}'\n", opts.out);
    return kExitUsage;
  }
  return outcome.code;
}

}  // namespace

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Hardware verification toolkit", "hwv"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_option("--format", opts.format, "report format")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--out", opts.out, "write the report to this file");
  };
  auto add_queue = [&](CLI::App* cmd) {
    cmd->add_option("--k", opts.k, "children per heap node");
    cmd->add_option("--size", opts.size, "queue capacity including the head");
  };

  CLI::App* instrument =
      app.add_subcommand("instrument", "add branch coverage outputs to a .mir file");
  instrument->add_option("input", opts.input, "input .mir file")->required();
  instrument->add_option("output", opts.out, "output .mir file (default stdout)");

  CLI::App* run = app.add_subcommand("run", "run a bundled suite");
  run->add_option("suite", opts.suite, "suite name")
      ->required()
      ->check(CLI::IsMember({"branchcov-demo", "funccov-demo", "crv-demo",
                             "axi4-demo", "heapq"}));
  add_common(run);
  add_queue(run);
  run->add_option("--ops", opts.ops, "operations, samples or draws");

  CLI::App* solve = app.add_subcommand("solve", "randomize a JSON constraint problem");
  solve->add_option("problem", opts.input, "problem .json file")->required();
  add_common(solve);
  solve->add_option("--ops", opts.ops, "number of draws");

  CLI::App* trace = app.add_subcommand("trace", "simulate a .mir file with random inputs");
  trace->add_option("input", opts.input, "input .mir file")->required();
  add_common(trace);
  trace->add_option("--ops", opts.ops, "clock cycles");

  CLI::App* replay =
      app.add_subcommand("replay", "replay a heap queue operation list");
  replay->add_option("ops", opts.input, "operation list .json file")->required();
  add_common(replay);
  add_queue(replay);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    Outcome outcome;
    if (instrument->parsed()) {
      outcome = Instrument(opts);
    } else if (run->parsed()) {
      outcome = RunSuite(opts);
    } else if (solve->parsed()) {
      outcome = Solve(opts);
    } else if (trace->parsed()) {
      outcome = Trace(opts);
    } else {
      outcome = ReplayOps(opts);
    }
    return Finish(opts, outcome, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const heapq::DivergenceError& e) {
    err << "error: " << e.what() << "\n"
        << "counterexample: " << heapq::OpsToJson(e.ops()).dump() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace hwv::cli
