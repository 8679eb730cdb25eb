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

#include "hwv/crv.h"

#include <algorithm>
#include <set>

#include "crv_oracle.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "hwv/error.h"

namespace hwv::crv {
namespace {

using ::testing::ElementsAre;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kSyntax;
}

RandomProblem Unicast() {
  RandomProblem p = FrameProblem();
  p.SetActive(std::vector<std::string>{"common", "unicast"});
  return p;
}

TEST(FrameTest, UnicastHasThreeSolutions) {
  std::vector<Assignment> all = EnumerateSolutions(Unicast());
  ASSERT_EQ(all.size(), 3u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].at("pType"), 11);
    EXPECT_EQ(all[i].at("len"), static_cast<Value>(i));
    EXPECT_EQ(all[i].at("payload"), static_cast<Value>(i));
    EXPECT_EQ(all[i].count("noRepeat"), 0u);
  }
  // Independent check with the brute-force oracle.
  EXPECT_EQ(hwv::testing::BruteForceSolutions(Unicast()), all);
}

TEST(FrameTest, SolveStaysInSolutionSetAndReachesAll) {
  RandomProblem p = Unicast();
  std::vector<Assignment> all = EnumerateSolutions(p);
  std::set<Value> lens;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Assignment a = Solve(p, seed);
    EXPECT_NE(std::find(all.begin(), all.end(), a), all.end());
    lens.insert(a.at("len"));
  }
  EXPECT_EQ(lens.size(), 3u);
}

TEST(FrameTest, ConflictingBlocksAreUnsat) {
  RandomProblem p = FrameProblem();
  try {
    Solve(p, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfiable);
    EXPECT_THAT(e.what(), ::testing::HasSubstr("[unicast, multicast]"));
  }
  EXPECT_THAT(MinimalConflict(p), ElementsAre("unicast", "multicast"));
  EXPECT_TRUE(EnumerateSolutions(p).empty());
}

TEST(FrameTest, NoActiveBlocks) {
  RandomProblem p = FrameProblem();
  p.SetActive(std::vector<std::string>{});
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    Assignment a = Solve(p, rng);
    EXPECT_TRUE(p.Satisfies(a));
    EXPECT_LE(a.at("len"), 10);
    EXPECT_LE(a.at("payload"), 7);
  }
  EXPECT_EQ(EnumerateSolutions(p).size(), 3u * 11 * 8);
}

TEST(ProblemTest, Validation) {
  RandomProblem p;
  p.Rand("x", {1, 2});
  EXPECT_EQ(CodeOf([&] { p.Rand("x", {1}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { p.Rand("y", {}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { p.Rand("z", {3, 3}); }), ErrorCode::kInvalidArgument);
  p.Randc("c", {0, 1});
  EXPECT_EQ(CodeOf([&] {
              p.AddBlock({"b", {Unary("c", [](Value) { return true; })}});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] {
              p.AddBlock({"b", {Unary("nope", [](Value) { return true; })}});
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { p.SetActive(std::vector<std::string>{"ghost"}); }),
            ErrorCode::kInvalidArgument);
}

TEST(EnumerateTest, SmallCasesAndGuard) {
  RandomProblem p;
  p.Rand("v", {4, 7});
  EXPECT_EQ(EnumerateSolutions(p).size(), 2u);
  EXPECT_EQ(EnumerateSolutions(p, 1).size(), 1u);

  RandomProblem big;
  for (int i = 0; i < 8; ++i) big.Rand("v" + std::to_string(i), Interval(0, 9));
  EXPECT_EQ(CodeOf([&] { EnumerateSolutions(big); }),
            ErrorCode::kInvalidArgument);
}

TEST(PropagateTest, Examples) {
  RandomProblem p;
  p.Rand("x", Interval(0, 3)).Rand("y", Interval(0, 3));
  p.AddBlock({"lt", {Binary("x", "y", std::less<>())}});
  Propagation r = PropagateArcConsistency(p, InitialDomains(p));
  EXPECT_FALSE(r.wiped_out);
  EXPECT_THAT(r.domains[0], ElementsAre(0, 1, 2));
  EXPECT_THAT(r.domains[1], ElementsAre(1, 2, 3));

  r = PropagateArcConsistency(p, {{3}, Interval(0, 3)});
  EXPECT_TRUE(r.wiped_out);

  RandomProblem eq;
  eq.Rand("x", {1}).Rand("y", Interval(0, 3));
  eq.AddBlock({"eq", {Binary("x", "y", std::equal_to<>())}});
  r = PropagateArcConsistency(eq, InitialDomains(eq));
  EXPECT_THAT(r.domains[1], ElementsAre(1));
}

TEST(PropagateTest, MatchesNaiveFixpoint) {
  Rng rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    RandomProblem p = hwv::testing::RandomProblemInstance(rng);
    Propagation r = PropagateArcConsistency(p, InitialDomains(p));
    hwv::testing::NaiveFixpoint oracle = hwv::testing::NaiveArcConsistency(p);
    EXPECT_EQ(r.wiped_out, oracle.wiped_out);
    if (!r.wiped_out) EXPECT_EQ(r.domains, oracle.domains);
  }
}

TEST(SolveTest, CompleteAndSoundOnRandomInstances) {
  Rng rng(555);
  int unsat = 0;
  for (int trial = 0; trial < 300; ++trial) {
    RandomProblem p = hwv::testing::RandomProblemInstance(rng);
    bool has_solution = !hwv::testing::BruteForceSolutions(p).empty();
    EXPECT_EQ(has_solution, !EnumerateSolutions(p).empty());
    try {
      Assignment a = Solve(p, rng.Next());
      EXPECT_TRUE(has_solution);
      EXPECT_TRUE(hwv::testing::CheckDirectly(p, a));
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kUnsatisfiable);
      EXPECT_FALSE(has_solution);
      ++unsat;
      // The reported conflict is itself unsatisfiable.
      RandomProblem core = p;
      core.SetActive(MinimalConflict(p));
      EXPECT_TRUE(hwv::testing::BruteForceSolutions(core).empty());
    }
  }
  EXPECT_GT(unsat, 10);
}

TEST(SolveTest, SeededDeterminism) {
  RandomProblem p = FrameProblem();
  p.SetActive(std::vector<std::string>{"common"});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(Solve(p, seed), Solve(p, seed));
  }
  RandomObject a(p, 5), b(p, 5);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.Randomize(), b.Randomize());
}

TEST(RandcTest, PermutationWindows) {
  for (Value size : {2, 3, 8}) {
    RandomProblem p;
    p.Randc("c", Interval(0, size - 1));
    p.Rand("r", Interval(0, 3));
    RandomObject obj(p, static_cast<std::uint64_t>(size));
    std::vector<Value> draws;
    for (int i = 0; i < 600; ++i) draws.push_back(obj.Randomize().at("c"));
    for (std::size_t w = 0; w + size <= draws.size(); w += size) {
      std::vector<Value> window(draws.begin() + static_cast<long>(w),
                                draws.begin() + static_cast<long>(w + size));
      std::sort(window.begin(), window.end());
      EXPECT_EQ(window, Interval(0, size - 1));
    }
  }
}

TEST(RandcTest, FrameNoRepeat) {
  RandomObject frame(FrameProblem(), 77);
  frame.SetActive(std::vector<std::string>{"common", "multicast"});
  for (int i = 0; i < 10; ++i) {
    Assignment first = frame.Randomize();
    Assignment second = frame.Randomize();
    EXPECT_NE(first.at("noRepeat"), second.at("noRepeat"));
    EXPECT_EQ(first.at("pType"), 0);
    EXPECT_GE(first.at("len"), 3);
    EXPECT_LE(first.at("len"), 4);
  }
}

TEST(JsonTest, FrameFromJson) {
  nlohmann::json j = nlohmann::json::parse(R"({
    "variables": [
      {"name": "pType", "kind": "rand", "domain": [0, 1, 11]},
      {"name": "len", "domain": {"lo": 0, "hi": 10}},
      {"name": "noRepeat", "kind": "randc", "domain": [0, 1]},
      {"name": "payload", "domain": {"lo": 0, "hi": 7}}
    ],
    "blocks": [
      {"name": "common", "constraints": [
        {"type": "binary", "vars": ["len", "payload"], "op": "=="}]},
      {"name": "unicast", "constraints": [
        {"type": "unary", "vars": ["len"], "op": "<=", "rhs": 2},
        {"vars": ["pType"], "op": "==", "rhs": 11}]}
    ],
    "active": ["common", "unicast"]
  })");
  RandomProblem p = ProblemFromJson(j);
  EXPECT_EQ(EnumerateSolutions(p), EnumerateSolutions(Unicast()));
  EXPECT_EQ(AssignmentToJson({{"len", 2}}), nlohmann::json({{"len", 2}}));

  EXPECT_EQ(CodeOf([] { ProblemFromJson(nlohmann::json::object()); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] {
              ProblemFromJson(nlohmann::json::parse(
                  R"({"variables":[{"name":"x","domain":[1]}],
                      "blocks":[{"name":"b","constraints":[
                        {"vars":["x"],"op":"~","rhs":1}]}]})"));
            }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace hwv::crv
