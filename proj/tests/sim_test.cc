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

#include "hwv/sim.h"

#include <sstream>
#include <stdexcept>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "hwv/error.h"
#include "test_circuits.h"

namespace hwv::sim {
namespace {

using ::testing::ElementsAre;

Simulator Load(const char* text) { return Simulator(ir::ParseCircuit(text)); }

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kSyntax;
}

TEST(SimulatorTest, MuxSelectsBranch) {
  Simulator sim = Load(hwv::testing::kTest1);
  sim.Poke("io_a", 1);
  sim.Poke("io_b_0", 2);
  sim.Poke("io_b_1", 3);
  EXPECT_EQ(sim.Peek("out"), 2u);
  sim.Poke("io_a", 0);
  EXPECT_EQ(sim.Peek("out"), 3u);
}

TEST(SimulatorTest, DirectionAndRangeErrors) {
  Simulator sim = Load(hwv::testing::kTest1);
  EXPECT_EQ(CodeOf([&] { sim.Poke("out", 1); }), ErrorCode::kWrongDirection);
  EXPECT_EQ(CodeOf([&] { sim.Peek("clock"); }), ErrorCode::kWrongDirection);
  EXPECT_EQ(CodeOf([&] { sim.Expect("io_a", 1); }), ErrorCode::kWrongDirection);
  EXPECT_EQ(CodeOf([&] { sim.Peek("nope"); }), ErrorCode::kUnknownSignal);
  EXPECT_EQ(CodeOf([&] { sim.Poke("io_b_0", 4); }), ErrorCode::kOutOfRange);
}

TEST(SimulatorTest, InvalidCircuitRejected) {
  ir::Circuit c;
  c.name = "Bad";
  EXPECT_THROW(Simulator{c}, Error);
}

TEST(SimulatorTest, ToggleRegister) {
  Simulator sim = Load(hwv::testing::kToggle);
  EXPECT_EQ(sim.Peek("q"), 0u);
  sim.Step(1);
  EXPECT_EQ(sim.Peek("q"), 1u);
  EXPECT_EQ(sim.cycle(), 1u);
  sim.Step(2);
  EXPECT_EQ(sim.Peek("q"), 1u);
  EXPECT_EQ(sim.Peek("r"), 1u);
  EXPECT_EQ(sim.Sampled("q"), 0u);
}

TEST(SimulatorTest, StepWithoutRegisters) {
  Simulator sim = Load(hwv::testing::kTest1);
  sim.Poke("io_b_1", 1);
  sim.Step(5);
  EXPECT_EQ(sim.cycle(), 5u);
  EXPECT_EQ(sim.Peek("out"), 1u);
}

TEST(SimulatorTest, ExpectRecordsAndSamples) {
  Simulator sim = Load(hwv::testing::kTest1);
  int samples = 0;
  sim.AddSampler([&](const Simulator& s) {
    ++samples;
    EXPECT_EQ(s.Peek("out"), 0u);
  });
  ExpectResult ok = sim.Expect("out", 0);
  EXPECT_TRUE(ok.pass);
  ExpectResult bad = sim.Expect("out", 3);
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.expected, 3u);
  EXPECT_EQ(bad.actual, 0u);
  EXPECT_EQ(bad.port, "out");
  EXPECT_EQ(samples, 2);
  EXPECT_EQ(sim.expect_count(), 2u);
}

TEST(SimulatorTest, SettleIsIdempotent) {
  hwv::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    Simulator sim(hwv::testing::RandomCircuit(rng));
    for (const std::string& in : sim.Inputs()) {
      sim.Poke(in, rng.Below(hwv::testing::Mask(sim.Width(in)) + 1));
    }
    std::vector<std::uint64_t> before;
    for (const std::string& out : sim.Outputs()) before.push_back(sim.Peek(out));
    sim.Settle();
    sim.Settle();
    std::vector<std::uint64_t> after;
    for (const std::string& out : sim.Outputs()) after.push_back(sim.Peek(out));
    EXPECT_EQ(before, after);
  }
}

TEST(ProcessTest, PokeAfterThreeEdgesVisibleAtCycleThree) {
  ir::Circuit c = ir::ParseCircuit(hwv::testing::kTest1);
  Simulator sim(c);
  sim.Fork([&]() -> Process {
    co_await sim.Clock(3);
    sim.Poke("io_b_1", 2);
  });
  sim.Step(2);
  EXPECT_EQ(sim.Peek("out"), 0u);
  sim.Step(1);
  EXPECT_EQ(sim.cycle(), 3u);
  EXPECT_EQ(sim.Peek("out"), 2u);
}

TEST(ProcessTest, ResumeInForkOrder) {
  Simulator sim = Load(hwv::testing::kTest1);
  std::vector<std::string> log;
  auto a = sim.Fork([&]() -> Process {
    for (int i = 0; i < 3; ++i) {
      co_await sim.Clock();
      log.push_back("A" + std::to_string(sim.cycle()));
    }
  });
  auto b = sim.Fork([&]() -> Process {
    for (int i = 0; i < 3; ++i) {
      co_await sim.Clock();
      log.push_back("B" + std::to_string(sim.cycle()));
    }
  });
  sim.Join(a);
  sim.Join(b);
  EXPECT_THAT(log, ElementsAre("A1", "B1", "A2", "B2", "A3", "B3"));
  EXPECT_EQ(sim.Status(a), ProcessStatus::kFinished);
}

TEST(ProcessTest, ForkRunsImmediately) {
  Simulator sim = Load(hwv::testing::kTest1);
  auto id = sim.Fork([&]() -> Process {
    sim.Poke("io_b_1", 1);
    co_return;
  });
  EXPECT_EQ(sim.Status(id), ProcessStatus::kFinished);
  EXPECT_EQ(sim.Peek("out"), 1u);
  sim.Join(id);
  EXPECT_EQ(sim.cycle(), 0u);
}

TEST(ProcessTest, JoinErrors) {
  Simulator sim = Load(hwv::testing::kTest1);
  EXPECT_EQ(CodeOf([&] { sim.Join(42); }), ErrorCode::kInvalidArgument);
  auto id = sim.Fork([&]() -> Process {
    for (;;) co_await sim.Clock();
  });
  EXPECT_EQ(CodeOf([&] { sim.Join(id, 10); }), ErrorCode::kTimeout);
  EXPECT_EQ(sim.Status(id), ProcessStatus::kWaitingForClock);
}

TEST(ProcessTest, ExceptionPropagates) {
  Simulator sim = Load(hwv::testing::kTest1);
  auto id = sim.Fork([&]() -> Process {
    co_await sim.Clock(2);
    throw std::runtime_error("boom");
  });
  sim.Step(1);
  EXPECT_THROW(sim.Step(1), std::runtime_error);
  EXPECT_EQ(sim.Status(id), ProcessStatus::kFinished);
  // The simulator stays usable.
  sim.Step(1);
  EXPECT_EQ(sim.cycle(), 3u);
}

TEST(ProcessTest, StepInsideProcessRejected) {
  Simulator sim = Load(hwv::testing::kTest1);
  sim.Fork([&]() -> Process {
    co_await sim.Clock();
    sim.Step(1);
  });
  EXPECT_EQ(CodeOf([&] { sim.Step(1); }), ErrorCode::kInvalidArgument);
}

TEST(ProcessTest, NestedForkStartsOnNextEdge) {
  Simulator sim = Load(hwv::testing::kTest1);
  std::vector<std::uint64_t> seen;
  sim.Fork([&]() -> Process {
    co_await sim.Clock();
    sim.Fork([&]() -> Process {
      seen.push_back(sim.cycle());
      co_await sim.Clock();
      seen.push_back(sim.cycle());
    });
  });
  sim.Step(3);
  EXPECT_THAT(seen, ElementsAre(1u, 2u));
}

TEST(TraceTest, DeterministicAndCsv) {
  auto run = [] {
    Simulator sim = Load(hwv::testing::kToggle);
    sim.EnableTrace();
    sim.Step(3);
    sim.RecordTraceSnapshot();
    return sim.trace();
  };
  auto first = run();
  EXPECT_EQ(first, run());
  ASSERT_FALSE(first.empty());
  EXPECT_EQ(first.front().cycle, 0u);

  Simulator sim = Load(hwv::testing::kToggle);
  sim.EnableTrace();
  sim.Step(1);
  std::ostringstream csv;
  sim.WriteTraceCsv(csv);
  EXPECT_EQ(csv.str(), "cycle,signal,value\n0,q,0\n0,r,0\n");
}

// Lockstep co-simulation against the recursive reference interpreter.
TEST(CoSimTest, RandomCircuitsMatchReference) {
  hwv::Rng rng(31337);
  for (int i = 0; i < 200; ++i) {
    ir::Circuit c = hwv::testing::RandomCircuit(rng);
    Simulator sim(c);
    hwv::testing::ReferenceModel ref(c);
    bool has_clock = !c.top().registers.empty();
    for (int cycle = 0; cycle < 40; ++cycle) {
      for (const std::string& in : sim.Inputs()) {
        std::uint64_t v = rng.Below(hwv::testing::Mask(sim.Width(in)) + 1);
        sim.Poke(in, v);
        ref.Set(in, v);
      }
      for (const std::string& out : sim.Outputs()) {
        ASSERT_EQ(sim.Peek(out), ref.Get(out))
            << out << " at cycle " << cycle << "\n"
            << ir::SerializeCircuit(c);
      }
      for (const ir::Wire& w : c.top().wires) {
        ASSERT_EQ(sim.Peek(w.name), ref.Get(w.name));
      }
      if (has_clock) {
        sim.Step(1);
        ref.Clock();
      }
    }
  }
}

}  // namespace
}  // namespace hwv::sim
