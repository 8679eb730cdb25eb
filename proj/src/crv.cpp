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
#include <deque>
#include <set>
#include <utility>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hwv/error.h"

namespace hwv::crv {
namespace {

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

// A binary constraint seen from one side: revising `from` against `to`.
struct Arc {
  std::size_t from;
  std::size_t to;
  const BinaryConstraint* constraint;
  bool swapped;  // constraint is (to, from)

  bool Holds(Value x, Value y) const {
    return swapped ? constraint->predicate(y, x) : constraint->predicate(x, y);
  }
};

// Active constraints resolved to variable indices.
struct Compiled {
  std::vector<std::vector<std::function<bool(Value)>>> unary;
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> arcs_into;  // arcs whose `to` is i
  std::vector<bool> is_rand;
};

std::size_t RequireRand(const RandomProblem& problem, const std::string& var,
                        const std::string& block) {
  std::optional<std::size_t> index = problem.VariableIndex(var);
  if (!index) {
    Invalid(fmt::format("block '{}' references unknown variable '{}'", block,
                        var));
  }
  if (problem.variables()[*index].kind != VarKind::kRand) {
    Invalid(fmt::format("block '{}' constrains randc variable '{}'", block,
                        var));
  }
  return *index;
}

Compiled Compile(const RandomProblem& problem) {
  const std::size_t n = problem.variables().size();
  Compiled c;
  c.unary.resize(n);
  c.arcs_into.resize(n);
  for (const Variable& v : problem.variables()) {
    c.is_rand.push_back(v.kind == VarKind::kRand);
  }
  std::vector<std::string> active = problem.ActiveBlocks();
  for (const ConstraintBlock& block : problem.blocks()) {
    if (std::find(active.begin(), active.end(), block.name) == active.end()) {
      continue;
    }
    for (const Constraint& constraint : block.constraints) {
      if (const auto* u = std::get_if<UnaryConstraint>(&constraint)) {
        c.unary[RequireRand(problem, u->var, block.name)].push_back(
            u->predicate);
        continue;
      }
      const auto& b = std::get<BinaryConstraint>(constraint);
      std::size_t i = RequireRand(problem, b.a, block.name);
      std::size_t j = RequireRand(problem, b.b, block.name);
      if (i == j) {
        c.unary[i].push_back([&b](Value v) { return b.predicate(v, v); });
        continue;
      }
      c.arcs.push_back({i, j, &b, false});
      c.arcs.push_back({j, i, &b, true});
    }
  }
  for (std::size_t k = 0; k < c.arcs.size(); ++k) {
    c.arcs_into[c.arcs[k].to].push_back(k);
  }
  return c;
}

bool NodeConsistency(const Compiled& c, Domains& domains) {
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (c.unary[i].empty()) continue;
    std::erase_if(domains[i], [&](Value v) {
      return !std::all_of(c.unary[i].begin(), c.unary[i].end(),
                          [v](const auto& pred) { return pred(v); });
    });
    if (domains[i].empty()) return false;
  }
  return true;
}

// Removes values of arc.from without support in arc.to.
bool Revise(const Arc& arc, Domains& domains) {
  const Domain& other = domains[arc.to];
  std::size_t before = domains[arc.from].size();
  std::erase_if(domains[arc.from], [&](Value x) {
    return std::none_of(other.begin(), other.end(),
                        [&](Value y) { return arc.Holds(x, y); });
  });
  return domains[arc.from].size() != before;
}

bool Ac3(const Compiled& c, Domains& domains, std::deque<std::size_t> queue) {
  std::vector<bool> queued(c.arcs.size(), false);
  for (std::size_t k : queue) queued[k] = true;
  while (!queue.empty()) {
    std::size_t k = queue.front();
    queue.pop_front();
    queued[k] = false;
    const Arc& arc = c.arcs[k];
    if (!Revise(arc, domains)) continue;
    if (domains[arc.from].empty()) return false;
    for (std::size_t into : c.arcs_into[arc.from]) {
      // Only the reverse of this very constraint is known to be unaffected;
      // other constraints between the same pair still need a revise.
      bool reverse = c.arcs[into].constraint == arc.constraint;
      if (!reverse && !queued[into]) {
        queued[into] = true;
        queue.push_back(into);
      }
    }
  }
  return true;
}

std::deque<std::size_t> AllArcs(const Compiled& c) {
  std::deque<std::size_t> all;
  for (std::size_t k = 0; k < c.arcs.size(); ++k) all.push_back(k);
  return all;
}

// Backtracking with minimum-remaining-values ordering, maintaining arc
// consistency after each assignment. `rng` shuffles value order; null keeps
// domain order.
bool Search(const Compiled& c, Domains& domains, std::vector<bool>& assigned,
            Rng* rng) {
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (!c.is_rand[i] || assigned[i]) continue;
    if (!pick || domains[i].size() < domains[*pick].size()) pick = i;
  }
  if (!pick) return true;
  const std::size_t var = *pick;
  Domain values = domains[var];
  if (rng != nullptr) rng->Shuffle(values);
  assigned[var] = true;
  for (Value v : values) {
    Domains next = domains;
    next[var] = {v};
    std::deque<std::size_t> queue(c.arcs_into[var].begin(),
                                  c.arcs_into[var].end());
    if (Ac3(c, next, std::move(queue)) && Search(c, next, assigned, rng)) {
      domains = std::move(next);
      return true;
    }
  }
  assigned[var] = false;
  return false;
}

std::optional<Assignment> TrySolve(const RandomProblem& problem, Rng* rng) {
  Compiled c = Compile(problem);
  Domains domains = InitialDomains(problem);
  if (!NodeConsistency(c, domains) || !Ac3(c, domains, AllArcs(c))) {
    return std::nullopt;
  }
  std::vector<bool> assigned(domains.size(), false);
  if (!Search(c, domains, assigned, rng)) return std::nullopt;
  Assignment result;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (c.is_rand[i]) result[problem.variables()[i].name] = domains[i].front();
  }
  return result;
}

}  // namespace

Domain Interval(Value lo, Value hi) {
  Domain d;
  for (Value v = lo; v <= hi; ++v) d.push_back(v);
  return d;
}

Constraint Unary(std::string var, std::function<bool(Value)> predicate,
                 std::string text) {
  return UnaryConstraint{std::move(var), std::move(predicate), std::move(text)};
}

Constraint Binary(std::string a, std::string b,
                  std::function<bool(Value, Value)> predicate,
                  std::string text) {
  return BinaryConstraint{std::move(a), std::move(b), std::move(predicate),
                          std::move(text)};
}

RandomProblem& RandomProblem::Rand(std::string name, Domain domain) {
  return Add(std::move(name), VarKind::kRand, std::move(domain));
}

RandomProblem& RandomProblem::Randc(std::string name, Domain domain) {
  return Add(std::move(name), VarKind::kRandc, std::move(domain));
}

RandomProblem& RandomProblem::Add(std::string name, VarKind kind,
                                  Domain domain) {
  if (VariableIndex(name)) Invalid(fmt::format("duplicate variable '{}'", name));
  if (domain.empty()) Invalid(fmt::format("variable '{}' has an empty domain", name));
  std::set<Value> seen(domain.begin(), domain.end());
  if (seen.size() != domain.size()) {
    Invalid(fmt::format("variable '{}' lists a domain value twice", name));
  }
  variables_.push_back({std::move(name), kind, std::move(domain)});
  return *this;
}

RandomProblem& RandomProblem::AddBlock(ConstraintBlock block) {
  for (const ConstraintBlock& b : blocks_) {
    if (b.name == block.name) {
      Invalid(fmt::format("duplicate constraint block '{}'", block.name));
    }
  }
  for (const Constraint& constraint : block.constraints) {
    if (const auto* u = std::get_if<UnaryConstraint>(&constraint)) {
      RequireRand(*this, u->var, block.name);
      if (!u->predicate) Invalid("constraint without predicate");
    } else {
      const auto& b = std::get<BinaryConstraint>(constraint);
      RequireRand(*this, b.a, block.name);
      RequireRand(*this, b.b, block.name);
      if (!b.predicate) Invalid("constraint without predicate");
    }
  }
  blocks_.push_back(std::move(block));
  return *this;
}

void RandomProblem::SetActive(std::optional<std::vector<std::string>> active) {
  if (active) {
    for (const std::string& name : *active) {
      bool found = std::any_of(blocks_.begin(), blocks_.end(),
                               [&](const auto& b) { return b.name == name; });
      if (!found) Invalid(fmt::format("unknown constraint block '{}'", name));
    }
  }
  active_ = std::move(active);
}

std::vector<std::string> RandomProblem::ActiveBlocks() const {
  if (active_) return *active_;
  std::vector<std::string> names;
  for (const ConstraintBlock& b : blocks_) names.push_back(b.name);
  return names;
}

std::optional<std::size_t> RandomProblem::VariableIndex(
    std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

bool RandomProblem::Satisfies(const Assignment& assignment) const {
  std::vector<Value> values(variables_.size(), 0);
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].kind != VarKind::kRand) continue;
    auto it = assignment.find(variables_[i].name);
    if (it == assignment.end()) return false;
    const Domain& d = variables_[i].domain;
    if (std::find(d.begin(), d.end(), it->second) == d.end()) return false;
    values[i] = it->second;
  }
  std::vector<std::string> active = ActiveBlocks();
  for (const ConstraintBlock& block : blocks_) {
    if (std::find(active.begin(), active.end(), block.name) == active.end()) {
      continue;
    }
    for (const Constraint& constraint : block.constraints) {
      if (const auto* u = std::get_if<UnaryConstraint>(&constraint)) {
        if (!u->predicate(values[*VariableIndex(u->var)])) return false;
      } else {
        const auto& b = std::get<BinaryConstraint>(constraint);
        if (!b.predicate(values[*VariableIndex(b.a)],
                         values[*VariableIndex(b.b)])) {
          return false;
        }
      }
    }
  }
  return true;
}

Domains InitialDomains(const RandomProblem& problem) {
  Domains domains;
  for (const Variable& v : problem.variables()) domains.push_back(v.domain);
  return domains;
}

Propagation PropagateArcConsistency(const RandomProblem& problem,
                                    Domains domains) {
  if (domains.size() != problem.variables().size()) {
    Invalid("domain count does not match the variable count");
  }
  Compiled c = Compile(problem);
  Propagation result;
  result.wiped_out = !NodeConsistency(c, domains) || !Ac3(c, domains, AllArcs(c));
  result.domains = std::move(domains);
  return result;
}

std::vector<std::string> MinimalConflict(const RandomProblem& problem) {
  if (TrySolve(problem, nullptr)) return {};
  std::vector<std::string> conflict = problem.ActiveBlocks();
  RandomProblem probe = problem;
  for (std::size_t i = conflict.size(); i-- > 0;) {
    std::vector<std::string> without = conflict;
    without.erase(without.begin() + static_cast<long>(i));
    probe.SetActive(without);
    if (!TrySolve(probe, nullptr)) conflict = std::move(without);
  }
  return conflict;
}

Assignment Solve(const RandomProblem& problem, std::uint64_t seed) {
  Rng rng(seed);
  return Solve(problem, rng);
}

Assignment Solve(const RandomProblem& problem, Rng& rng) {
  if (std::optional<Assignment> result = TrySolve(problem, &rng)) {
    return *std::move(result);
  }
  throw Error(ErrorCode::kUnsatisfiable,
              fmt::format("constraints are unsatisfiable; conflicting blocks: "
                          "[{}]",
                          fmt::join(MinimalConflict(problem), ", ")));
}

std::vector<Assignment> EnumerateSolutions(const RandomProblem& problem,
                                           std::size_t limit) {
  std::vector<std::size_t> rand_vars;
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < problem.variables().size(); ++i) {
    const Variable& v = problem.variables()[i];
    if (v.kind != VarKind::kRand) continue;
    rand_vars.push_back(i);
    space *= v.domain.size();
    if (space > kEnumerationGuard) {
      Invalid(fmt::format("search space exceeds {} assignments",
                          kEnumerationGuard));
    }
  }
  std::vector<Assignment> solutions;
  std::vector<std::size_t> digit(rand_vars.size(), 0);
  Assignment candidate;
  while (solutions.size() < limit) {
    for (std::size_t k = 0; k < rand_vars.size(); ++k) {
      const Variable& v = problem.variables()[rand_vars[k]];
      candidate[v.name] = v.domain[digit[k]];
    }
    if (problem.Satisfies(candidate)) solutions.push_back(candidate);
    // The last variable varies fastest.
    std::size_t k = rand_vars.size();
    while (k > 0) {
      --k;
      if (++digit[k] < problem.variables()[rand_vars[k]].domain.size()) break;
      digit[k] = 0;
      if (k == 0) return solutions;
    }
    if (rand_vars.empty()) break;
  }
  return solutions;
}

RandomObject::RandomObject(RandomProblem problem, std::uint64_t seed)
    : problem_(std::move(problem)), rng_(seed) {
  for (std::size_t i = 0; i < problem_.variables().size(); ++i) {
    const Variable& v = problem_.variables()[i];
    if (v.kind == VarKind::kRandc) {
      cyclic_.push_back({i, v.domain, v.domain.size()});
    }
  }
}

Assignment RandomObject::Randomize() {
  Assignment result = Solve(problem_, rng_);
  for (CyclicState& state : cyclic_) {
    if (state.cursor == state.permutation.size()) {
      state.permutation = problem_.variables()[state.variable].domain;
      rng_.Shuffle(state.permutation);
      state.cursor = 0;
    }
    result[problem_.variables()[state.variable].name] =
        state.permutation[state.cursor++];
  }
  return result;
}

namespace {

std::function<bool(Value, Value)> Comparison(const std::string& op) {
  if (op == "==") return std::equal_to<>();
  if (op == "!=") return std::not_equal_to<>();
  if (op == "<") return std::less<>();
  if (op == "<=") return std::less_equal<>();
  if (op == ">") return std::greater<>();
  if (op == ">=") return std::greater_equal<>();
  Invalid(fmt::format("unsupported operator '{}'", op));
}

Domain DomainFromJson(const nlohmann::json& json, const std::string& var) {
  if (json.is_array()) return json.get<Domain>();
  if (json.is_object() && json.contains("lo") && json.contains("hi")) {
    return Interval(json.at("lo").get<Value>(), json.at("hi").get<Value>());
  }
  Invalid(fmt::format("variable '{}' needs a domain list or {{lo, hi}}", var));
}

}  // namespace

RandomProblem ProblemFromJson(const nlohmann::json& json) {
  try {
    RandomProblem problem;
    for (const nlohmann::json& v : json.at("variables")) {
      std::string name = v.at("name").get<std::string>();
      std::string kind = v.value("kind", std::string("rand"));
      Domain domain = DomainFromJson(v.at("domain"), name);
      if (kind == "rand") {
        problem.Rand(name, std::move(domain));
      } else if (kind == "randc") {
        problem.Randc(name, std::move(domain));
      } else {
        Invalid(fmt::format("variable '{}' has unknown kind '{}'", name, kind));
      }
    }
    for (const nlohmann::json& b : json.value("blocks", nlohmann::json::array())) {
      ConstraintBlock block{b.at("name").get<std::string>(), {}};
      for (const nlohmann::json& c : b.at("constraints")) {
        auto vars = c.at("vars").get<std::vector<std::string>>();
        std::string op = c.at("op").get<std::string>();
        auto compare = Comparison(op);
        std::string type =
            c.value("type", std::string(vars.size() == 1 ? "unary" : "binary"));
        if (type == "unary" && vars.size() == 1) {
          Value rhs = c.at("rhs").get<Value>();
          block.constraints.push_back(Unary(
              vars[0], [compare, rhs](Value x) { return compare(x, rhs); },
              fmt::format("{} {} {}", vars[0], op, rhs)));
        } else if (type == "binary" && vars.size() == 2) {
          block.constraints.push_back(Binary(
              vars[0], vars[1], compare,
              fmt::format("{} {} {}", vars[0], op, vars[1])));
        } else {
          Invalid(fmt::format("constraint in block '{}' must be unary with one "
                              "variable or binary with two",
                              block.name));
        }
      }
      problem.AddBlock(std::move(block));
    }
    if (json.contains("active")) {
      problem.SetActive(json.at("active").get<std::vector<std::string>>());
    }
    return problem;
  } catch (const nlohmann::json::exception& e) {
    Invalid(fmt::format("malformed problem: {}", e.what()));
  }
}

nlohmann::json AssignmentToJson(const Assignment& assignment) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : assignment) out[name] = value;
  return out;
}

RandomProblem FrameProblem() {
  constexpr Value kUnicast = 11;
  constexpr Value kMulticast = 0;
  constexpr Value kBroadcast = 1;
  RandomProblem p;
  p.Rand("pType", {kMulticast, kBroadcast, kUnicast});
  p.Rand("len", Interval(0, 10));
  p.Randc("noRepeat", Interval(0, 1));
  p.Rand("payload", Interval(0, 7));
  p.AddBlock({"common",
              {Binary("len", "payload", std::equal_to<>(), "len == payload")}});
  p.AddBlock({"unicast",
              {Unary("len", [](Value len) { return len <= 2; }, "len <= 2"),
               Unary("pType", [](Value t) { return t == kUnicast; },
                     "pType == UNICAST")}});
  p.AddBlock({"multicast",
              {Unary("len", [](Value len) { return len >= 3; }, "len >= 3"),
               Unary("len", [](Value len) { return len <= 4; }, "len <= 4"),
               Unary("pType", [](Value t) { return t == kMulticast; },
                     "pType == MULTICAST")}});
  return p;
}

}  // namespace hwv::crv
