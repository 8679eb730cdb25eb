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

#include "hwv/branch_cov.h"

#include <map>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include <fmt/format.h>

#include "hwv/error.h"

namespace hwv::bcov {
namespace {

// Pre-order walk: a mux is numbered before the muxes inside its operands.
void CollectMuxConditions(const ir::Expr& expr,
                          std::vector<ir::ExprRef>& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, ir::MuxExpr>) {
          out.push_back(node.cond);
          CollectMuxConditions(*node.cond, out);
          CollectMuxConditions(*node.on_true, out);
          CollectMuxConditions(*node.on_false, out);
        } else if constexpr (std::is_same_v<T, ir::UnaryExpr>) {
          CollectMuxConditions(*node.operand, out);
        } else if constexpr (std::is_same_v<T, ir::BinaryExpr>) {
          CollectMuxConditions(*node.lhs, out);
          CollectMuxConditions(*node.rhs, out);
        }
      },
      expr.node);
}

bool HasPrefix(std::string_view name) {
  return name.substr(0, std::string_view(kValidatorPrefix).size()) ==
         kValidatorPrefix;
}

}  // namespace

Instrumented Instrument(const ir::Circuit& circuit) {
  std::vector<ir::Diagnostic> diagnostics = ir::Validate(circuit);
  if (!diagnostics.empty()) {
    throw Error(ErrorCode::kValidation,
                fmt::format("cannot instrument '{}': {}: {}", circuit.name,
                            diagnostics.front().rule,
                            diagnostics.front().message));
  }
  const ir::ModuleDef& module = circuit.top();
  auto reject = [&](const std::string& name) {
    if (HasPrefix(name)) {
      throw Error(ErrorCode::kValidation,
                  fmt::format("signal '{}' clashes with the coverage "
                              "validator namespace",
                              name));
    }
  };
  for (const ir::Port& p : module.ports) reject(p.name);
  for (const ir::Wire& w : module.wires) reject(w.name);
  for (const ir::Register& r : module.registers) reject(r.name);

  Instrumented result;
  std::vector<ir::Port> validator_ports;
  std::vector<ir::Assignment> validator_assigns;
  for (std::size_t a = 0; a < module.assignments.size(); ++a) {
    std::vector<ir::ExprRef> conditions;
    CollectMuxConditions(*module.assignments[a].expr, conditions);
    for (const ir::ExprRef& cond : conditions) {
      std::size_t mux = result.validators.size() / 2;
      for (Path path : {Path::kThen, Path::kElse}) {
        Validator v;
        v.port = fmt::format("{}{}", kValidatorPrefix, result.validators.size());
        v.mux = mux;
        v.assignment = a;
        v.path = path;
        v.guard = path == Path::kThen ? cond : ir::Not(cond);
        validator_ports.push_back(
            {v.port, ir::Direction::kOutput, ir::PortKind::kData, 1});
        validator_assigns.push_back({v.port, v.guard});
        result.validators.push_back(std::move(v));
      }
    }
  }

  result.circuit = circuit;
  if (result.validators.empty()) return result;
  ir::ModuleDef& out = result.circuit.top();
  // Validators go right before the first user output and their assignments
  // lead the body.
  auto first_output = out.ports.begin();
  while (first_output != out.ports.end() &&
         first_output->direction != ir::Direction::kOutput) {
    ++first_output;
  }
  out.ports.insert(first_output, validator_ports.begin(),
                   validator_ports.end());
  out.assignments.insert(out.assignments.begin(), validator_assigns.begin(),
                         validator_assigns.end());
  return result;
}

CoverageDb::CoverageDb(ValidatorMap validators)
    : validators_(std::move(validators)), hits_(validators_.size(), 0) {}

void CoverageDb::Attach(sim::Simulator& sim) {
  for (const Validator& v : validators_) {
    if (!sim.HasSignal(v.port) ||
        sim.Kind(v.port) != ir::SignalKind::kOutput) {
      throw Error(ErrorCode::kUnknownSignal,
                  fmt::format("simulator has no validator output '{}'",
                              v.port));
    }
  }
  sim.AddSampler([this](const sim::Simulator& s) { Sample(s); });
}

void CoverageDb::Sample(const sim::Simulator& sim) {
  ++samples_;
  for (std::size_t i = 0; i < validators_.size(); ++i) {
    if (sim.Peek(validators_[i].port) != 0) ++hits_[i];
  }
}

void CoverageDb::Reset() {
  hits_.assign(validators_.size(), 0);
  samples_ = 0;
}

std::vector<std::size_t> CoverageDb::CoveredIndices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < hits_.size(); ++i) {
    if (hits_[i] > 0) out.push_back(i);
  }
  return out;
}

std::string FormatPercentage(double percentage) {
  return fmt::format("{:.1f}", percentage);
}

std::string BranchCoverageReport::Text() const {
  std::string out = fmt::format("COVERAGE: {}\nCOVERAGE REPORT:\n\n",
                                FormatPercentage(percentage));
  for (const ReportLine& line : lines) {
    out += line.marker;
    out += ' ';
    out += line.text;
    out += '\n';
  }
  return out;
}

nlohmann::json BranchCoverageReport::Json() const {
  nlohmann::json lines_json = nlohmann::json::array();
  for (const ReportLine& line : lines) {
    lines_json.push_back({{"marker", std::string(1, line.marker)},
                          {"text", line.text}});
  }
  return {{"percentage", percentage},
          {"validators", validator_count},
          {"covered", covered},
          {"lines", lines_json}};
}

BranchCoverageReport Report(const CoverageDb& db,
                            const ir::Circuit& instrumented) {
  BranchCoverageReport report;
  report.covered = db.CoveredIndices();
  report.validator_count = db.validators().size();
  if (report.validator_count > 0) {
    report.percentage = 100.0 * static_cast<double>(report.covered.size()) /
                        static_cast<double>(report.validator_count);
  }
  std::map<std::string, bool, std::less<>> validator_hit;
  for (std::size_t i = 0; i < db.validators().size(); ++i) {
    validator_hit[db.validators()[i].port] = db.Covered(i);
  }
  // Only assignment lines can be unexecuted; the body indent is four spaces.
  for (const std::string& line : ir::SerializeLines(instrumented)) {
    char marker = '+';
    if (line.size() > 4 && line.compare(0, 4, "    ") == 0) {
      std::string_view rest(line);
      rest.remove_prefix(4);
      std::size_t arrow = rest.find(" <= ");
      if (arrow != std::string_view::npos) {
        auto it = validator_hit.find(rest.substr(0, arrow));
        if (it != validator_hit.end() && !it->second) marker = '-';
      }
    }
    report.lines.push_back({marker, line});
  }
  return report;
}

}  // namespace hwv::bcov
