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

// Constrained random stimulus: finite-domain problems with unary and binary
// predicate constraints grouped into named blocks, solved by backtracking
// search with arc consistency.
//
//   crv::RandomProblem frame;
//   frame.Rand("len", crv::Interval(0, 10));
//   frame.Rand("payload", crv::Interval(0, 7));
//   frame.AddBlock({"common", {crv::Binary("len", "payload", std::equal_to<>())}});
//   crv::Assignment a = crv::Solve(frame, seed);

#ifndef HWV_CRV_H_
#define HWV_CRV_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hwv/random.h"

namespace hwv::crv {

using Value = std::int64_t;
using Domain = std::vector<Value>;

Domain Interval(Value lo, Value hi);

enum class VarKind { kRand, kRandc };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kRand;
  Domain domain;
};

struct UnaryConstraint {
  std::string var;
  std::function<bool(Value)> predicate;
  std::string text;  // for diagnostics only
};

struct BinaryConstraint {
  std::string a;
  std::string b;
  std::function<bool(Value, Value)> predicate;
  std::string text;
};

using Constraint = std::variant<UnaryConstraint, BinaryConstraint>;

Constraint Unary(std::string var, std::function<bool(Value)> predicate,
                 std::string text = "");
Constraint Binary(std::string a, std::string b,
                  std::function<bool(Value, Value)> predicate,
                  std::string text = "");

struct ConstraintBlock {
  std::string name;
  std::vector<Constraint> constraints;
};

using Assignment = std::map<std::string, Value, std::less<>>;

class RandomProblem {
 public:
  // Throws Error(kInvalidArgument) on duplicate names, empty domains or
  // duplicate domain values.
  RandomProblem& Rand(std::string name, Domain domain);
  RandomProblem& Randc(std::string name, Domain domain);
  // Constraints must reference existing rand-kind variables.
  RandomProblem& AddBlock(ConstraintBlock block);
  // Empty optional means every block is active.
  void SetActive(std::optional<std::vector<std::string>> active);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<ConstraintBlock>& blocks() const { return blocks_; }
  std::vector<std::string> ActiveBlocks() const;
  std::optional<std::size_t> VariableIndex(std::string_view name) const;

  // True when `assignment` gives every rand variable a domain value and
  // satisfies every active constraint.
  bool Satisfies(const Assignment& assignment) const;

 private:
  RandomProblem& Add(std::string name, VarKind kind, Domain domain);

  std::vector<Variable> variables_;
  std::vector<ConstraintBlock> blocks_;
  std::optional<std::vector<std::string>> active_;
};

// Current domains, indexed like RandomProblem::variables().
using Domains = std::vector<Domain>;

struct Propagation {
  Domains domains;
  bool wiped_out = false;
};

// Node consistency for unary constraints followed by AC-3 over the binary
// constraints of the active blocks. Returns the largest arc-consistent
// sub-domains; randc variables are left untouched.
Propagation PropagateArcConsistency(const RandomProblem& problem,
                                    Domains domains);
Domains InitialDomains(const RandomProblem& problem);

// One satisfying assignment of the rand variables. Deterministic for a given
// seed. Throws Error(kUnsatisfiable) naming a minimal set of conflicting
// active blocks.
Assignment Solve(const RandomProblem& problem, std::uint64_t seed);
Assignment Solve(const RandomProblem& problem, Rng& rng);

// Deletion-minimal subset of the active blocks that is unsatisfiable on its
// own, or empty when the problem is satisfiable (or only the domains clash).
std::vector<std::string> MinimalConflict(const RandomProblem& problem);

inline constexpr std::uint64_t kEnumerationGuard = 10'000'000;

// Every solution over the rand variables, in declaration order with each
// domain in its listed order, truncated at `limit`. Throws
// Error(kInvalidArgument) when the search space exceeds kEnumerationGuard.
std::vector<Assignment> EnumerateSolutions(
    const RandomProblem& problem,
    std::size_t limit = std::numeric_limits<std::size_t>::max());

// A problem plus the cyclic state of its randc variables.
class RandomObject {
 public:
  explicit RandomObject(RandomProblem problem, std::uint64_t seed = kDefaultSeed);

  // rand variables come from Solve(); each randc variable yields the next
  // value of its current random permutation, reshuffled when exhausted.
  Assignment Randomize();

  void SetActive(std::optional<std::vector<std::string>> active) {
    problem_.SetActive(std::move(active));
  }
  const RandomProblem& problem() const { return problem_; }

 private:
  struct CyclicState {
    std::size_t variable;
    Domain permutation;
    std::size_t cursor;
  };

  RandomProblem problem_;
  Rng rng_;
  std::vector<CyclicState> cyclic_;
};

// {"variables": [{"name", "kind": "rand"|"randc", "domain": [..] or
//   {"lo", "hi"}}],
//  "blocks": [{"name", "constraints": [{"type": "unary"|"binary",
//   "vars": [..], "op": "==", "rhs": <int>}]}],
//  "active": [..]}
// Unary constraints compare vars[0] to the integer rhs; binary ones compare
// vars[0] to vars[1]. Throws Error(kInvalidArgument) on malformed input.
RandomProblem ProblemFromJson(const nlohmann::json& json);
nlohmann::json AssignmentToJson(const Assignment& assignment);

// The packet frame example: pType in {0, 1, 11}, len in 0..10, payload in
// 0..7, randc noRepeat in {0, 1}; blocks common, unicast and multicast.
RandomProblem FrameProblem();

}  // namespace hwv::crv

#endif  // HWV_CRV_H_
