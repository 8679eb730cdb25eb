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

#include "hwv/ir.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <utility>

#include <fmt/format.h>

namespace hwv::ir {
namespace {

constexpr std::array<std::string_view, 6> kKeywords = {
    "circuit", "module", "input", "output", "wire", "reg"};

bool IsIdentifier(std::string_view name) {
  if (name.empty()) return false;
  auto head = static_cast<unsigned char>(name.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_' || c == '$')) return false;
  }
  return std::find(kKeywords.begin(), kKeywords.end(), name) == kKeywords.end();
}

bool FitsWidth(std::uint64_t value, unsigned width) {
  return width >= 64 || value < (std::uint64_t{1} << width);
}

bool SameExpr(const ExprRef& a, const ExprRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

void WriteExpr(const Expr& expr, std::string& out) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, RefExpr>) {
          out += node.name;
        } else if constexpr (std::is_same_v<T, LiteralExpr>) {
          out += fmt::format("UInt<{}>({})", node.width, node.value);
        } else if constexpr (std::is_same_v<T, MuxExpr>) {
          out += "mux(";
          WriteExpr(*node.cond, out);
          out += ", ";
          WriteExpr(*node.on_true, out);
          out += ", ";
          WriteExpr(*node.on_false, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          out += OpName(node.op);
          out += "(";
          WriteExpr(*node.operand, out);
          out += ")";
        } else {
          out += OpName(node.op);
          out += "(";
          WriteExpr(*node.lhs, out);
          out += ", ";
          WriteExpr(*node.rhs, out);
          out += ")";
        }
      },
      expr.node);
}

template <typename Fn>
void VisitPreOrder(const Expr& expr, Fn&& fn) {
  fn(expr);
  if (const auto* mux = std::get_if<MuxExpr>(&expr.node)) {
    VisitPreOrder(*mux->cond, fn);
    VisitPreOrder(*mux->on_true, fn);
    VisitPreOrder(*mux->on_false, fn);
  } else if (const auto* un = std::get_if<UnaryExpr>(&expr.node)) {
    VisitPreOrder(*un->operand, fn);
  } else if (const auto* bin = std::get_if<BinaryExpr>(&expr.node)) {
    VisitPreOrder(*bin->lhs, fn);
    VisitPreOrder(*bin->rhs, fn);
  }
}

using SignalTable = std::map<std::string, SignalInfo, std::less<>>;

// Walks an expression, reporting every rule violation, and returns its width
// when it could be determined.
class ExprChecker {
 public:
  ExprChecker(const SignalTable& signals, std::string location, int line,
              std::vector<Diagnostic>& out)
      : signals_(signals),
        location_(std::move(location)),
        line_(line),
        out_(out) {}

  std::optional<unsigned> Check(const Expr& expr) {
    return std::visit([&](const auto& node) { return CheckNode(node); },
                      expr.node);
  }

 private:
  void Report(std::string rule, std::string message) {
    out_.push_back(
        Diagnostic{std::move(rule), location_, std::move(message), line_});
  }

  std::optional<unsigned> CheckNode(const RefExpr& ref) {
    auto it = signals_.find(ref.name);
    if (it == signals_.end()) {
      Report("unknown-identifier",
             fmt::format("'{}' is not a declared port, wire or register",
                         ref.name));
      return std::nullopt;
    }
    if (it->second.kind == SignalKind::kClock) {
      Report("clock-in-expression",
             fmt::format("clock '{}' cannot be used as data", ref.name));
      return std::nullopt;
    }
    return it->second.width;
  }

  std::optional<unsigned> CheckNode(const LiteralExpr& lit) {
    if (lit.width == 0 || lit.width > kMaxWidth) {
      Report("invalid-width",
             fmt::format("literal width {} outside [1, {}]", lit.width,
                         kMaxWidth));
      return std::nullopt;
    }
    if (!FitsWidth(lit.value, lit.width)) {
      Report("literal-range", fmt::format("value {} does not fit in UInt<{}>",
                                          lit.value, lit.width));
    }
    return lit.width;
  }

  std::optional<unsigned> CheckNode(const MuxExpr& mux) {
    auto cond = Check(*mux.cond);
    auto on_true = Check(*mux.on_true);
    auto on_false = Check(*mux.on_false);
    if (cond && *cond != 1) {
      Report("width",
             fmt::format("mux condition must be UInt<1>, got UInt<{}>", *cond));
    }
    if (!on_true || !on_false) return std::nullopt;
    return std::max(*on_true, *on_false);
  }

  std::optional<unsigned> CheckNode(const UnaryExpr& un) {
    return Check(*un.operand);
  }

  std::optional<unsigned> CheckNode(const BinaryExpr& bin) {
    auto lhs = Check(*bin.lhs);
    auto rhs = Check(*bin.rhs);
    if (!lhs || !rhs) return std::nullopt;
    if (IsComparison(bin.op)) return 1u;
    return std::max(*lhs, *rhs);
  }

  const SignalTable& signals_;
  std::string location_;
  int line_;
  std::vector<Diagnostic>& out_;
};

void ValidateModule(const ModuleDef& module, std::vector<Diagnostic>& out) {
  SignalTable signals;
  int clock_count = 0;
  int first_clock_line = 0;

  auto declare = [&](const std::string& name, SignalInfo info, int line,
                     std::string_view what) {
    std::string location = fmt::format("{} '{}'", what, name);
    if (!IsIdentifier(name)) {
      out.push_back({"invalid-identifier", location,
                     fmt::format("'{}' is not a valid identifier", name),
                     line});
    }
    if (info.kind != SignalKind::kClock &&
        (info.width == 0 || info.width > kMaxWidth)) {
      out.push_back({"invalid-width", location,
                     fmt::format("width {} outside [1, {}]", info.width,
                                 kMaxWidth),
                     line});
    }
    if (!signals.emplace(name, info).second) {
      out.push_back({"duplicate-declaration", location,
                     fmt::format("'{}' is declared more than once", name),
                     line});
    }
  };

  for (const Port& port : module.ports) {
    if (port.kind == PortKind::kClock) {
      if (port.direction != Direction::kInput) {
        out.push_back({"clock-direction", fmt::format("port '{}'", port.name),
                       "clock ports must be inputs", port.line});
      }
      if (++clock_count == 1) first_clock_line = port.line;
      declare(port.name, {SignalKind::kClock, 1}, port.line, "port");
    } else {
      declare(port.name,
              {port.direction == Direction::kInput ? SignalKind::kInput
                                                   : SignalKind::kOutput,
               port.width},
              port.line, "port");
    }
  }
  if (clock_count > 1) {
    out.push_back({"clock-count", fmt::format("module '{}'", module.name),
                   fmt::format("{} clock ports declared, at most one allowed",
                               clock_count),
                   first_clock_line});
  }
  for (const Wire& wire : module.wires) {
    declare(wire.name, {SignalKind::kWire, wire.width}, wire.line, "wire");
  }
  for (const Register& reg : module.registers) {
    declare(reg.name, {SignalKind::kRegister, reg.width}, reg.line,
            "register");
    std::string location = fmt::format("register '{}'", reg.name);
    if (clock_count == 0) {
      out.push_back({"missing-clock", location,
                     "registers require a clock port", reg.line});
    }
    if (reg.reset.width == 0 || reg.reset.width > kMaxWidth ||
        !FitsWidth(reg.reset.value, reg.reset.width)) {
      out.push_back({"literal-range", location,
                     "reset literal does not fit its declared width",
                     reg.line});
    } else if (reg.reset.width > reg.width) {
      out.push_back({"width", location,
                     fmt::format("reset UInt<{}> wider than register UInt<{}>",
                                 reg.reset.width, reg.width),
                     reg.line});
    }
  }

  std::set<std::string, std::less<>> assigned;
  for (const Assignment& assign : module.assignments) {
    std::string location = fmt::format("assignment to '{}'", assign.target);
    auto it = signals.find(assign.target);
    std::optional<unsigned> target_width;
    if (it == signals.end()) {
      out.push_back(
          {"unknown-identifier", location,
           fmt::format("'{}' is not a declared output, wire or register",
                       assign.target),
           assign.line});
    } else if (it->second.kind == SignalKind::kInput ||
               it->second.kind == SignalKind::kClock) {
      out.push_back({"assign-to-input", location,
                     fmt::format("'{}' is an input and cannot be driven",
                                 assign.target),
                     assign.line});
    } else {
      target_width = it->second.width;
      if (!assigned.insert(assign.target).second) {
        out.push_back({"duplicate-assignment", location,
                       fmt::format("'{}' is driven more than once",
                                   assign.target),
                       assign.line});
      }
    }
    if (!assign.expr) {
      out.push_back({"missing-expression", location, "connection has no value",
                     assign.line});
      continue;
    }
    auto width = ExprChecker(signals, location, assign.line, out)
                     .Check(*assign.expr);
    if (width && target_width && *width > *target_width) {
      out.push_back({"width", location,
                     fmt::format("UInt<{}> value connected to UInt<{}> target",
                                 *width, *target_width),
                     assign.line});
    }
  }

  auto require_driver = [&](const std::string& name, int line,
                            std::string_view what) {
    if (!assigned.contains(name)) {
      out.push_back({"missing-assignment",
                     fmt::format("{} '{}'", what, name),
                     fmt::format("'{}' has no driver", name), line});
    }
  };
  for (const Port& port : module.ports) {
    if (port.direction == Direction::kOutput && port.kind == PortKind::kData) {
      require_driver(port.name, port.line, "port");
    }
  }
  for (const Wire& wire : module.wires) {
    require_driver(wire.name, wire.line, "wire");
  }
  for (const Register& reg : module.registers) {
    require_driver(reg.name, reg.line, "register");
  }

  if (!CombinationalOrder(module)) {
    out.push_back({"combinational-cycle",
                   fmt::format("module '{}'", module.name),
                   "combinational connections form a cycle", 0});
  }
}

}  // namespace

std::string_view OpName(UnaryOp op) {
  switch (op) {
    case UnaryOp::kNot:
      return "not";
  }
  return "?";
}

std::string_view OpName(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAnd: return "and";
    case BinaryOp::kOr: return "or";
    case BinaryOp::kXor: return "xor";
    case BinaryOp::kAdd: return "add";
    case BinaryOp::kSub: return "sub";
    case BinaryOp::kEq: return "eq";
    case BinaryOp::kNeq: return "neq";
    case BinaryOp::kLt: return "lt";
    case BinaryOp::kGt: return "gt";
    case BinaryOp::kLeq: return "leq";
    case BinaryOp::kGeq: return "geq";
  }
  return "?";
}

bool IsComparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::kEq:
    case BinaryOp::kNeq:
    case BinaryOp::kLt:
    case BinaryOp::kGt:
    case BinaryOp::kLeq:
    case BinaryOp::kGeq:
      return true;
    default:
      return false;
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, RefExpr>) {
          return lhs.name == rhs.name;
        } else if constexpr (std::is_same_v<T, LiteralExpr>) {
          return lhs.value == rhs.value && lhs.width == rhs.width;
        } else if constexpr (std::is_same_v<T, MuxExpr>) {
          return SameExpr(lhs.cond, rhs.cond) &&
                 SameExpr(lhs.on_true, rhs.on_true) &&
                 SameExpr(lhs.on_false, rhs.on_false);
        } else if constexpr (std::is_same_v<T, UnaryExpr>) {
          return lhs.op == rhs.op && SameExpr(lhs.operand, rhs.operand);
        } else {
          return lhs.op == rhs.op && SameExpr(lhs.lhs, rhs.lhs) &&
                 SameExpr(lhs.rhs, rhs.rhs);
        }
      },
      a.node);
}

bool operator==(const Port& a, const Port& b) {
  return a.name == b.name && a.direction == b.direction && a.kind == b.kind &&
         (a.kind == PortKind::kClock || a.width == b.width);
}

bool operator==(const Wire& a, const Wire& b) {
  return a.name == b.name && a.width == b.width;
}

bool operator==(const Register& a, const Register& b) {
  return a.name == b.name && a.width == b.width &&
         a.reset.value == b.reset.value && a.reset.width == b.reset.width;
}

bool operator==(const Assignment& a, const Assignment& b) {
  return a.target == b.target && SameExpr(a.expr, b.expr);
}

ExprRef Ref(std::string name) {
  return std::make_shared<const Expr>(Expr{RefExpr{std::move(name)}});
}

ExprRef Literal(std::uint64_t value, unsigned width) {
  return std::make_shared<const Expr>(Expr{LiteralExpr{value, width}});
}

ExprRef Mux(ExprRef cond, ExprRef on_true, ExprRef on_false) {
  return std::make_shared<const Expr>(
      Expr{MuxExpr{std::move(cond), std::move(on_true), std::move(on_false)}});
}

ExprRef Not(ExprRef operand) {
  return std::make_shared<const Expr>(
      Expr{UnaryExpr{UnaryOp::kNot, std::move(operand)}});
}

ExprRef Binary(BinaryOp op, ExprRef lhs, ExprRef rhs) {
  return std::make_shared<const Expr>(
      Expr{BinaryExpr{op, std::move(lhs), std::move(rhs)}});
}

std::string ToString(const Expr& expr) {
  std::string out;
  WriteExpr(expr, out);
  return out;
}

std::vector<std::string> CollectRefs(const Expr& expr) {
  std::vector<std::string> refs;
  VisitPreOrder(expr, [&](const Expr& e) {
    if (const auto* ref = std::get_if<RefExpr>(&e.node)) {
      refs.push_back(ref->name);
    }
  });
  return refs;
}

std::size_t CountMuxes(const Expr& expr) {
  std::size_t count = 0;
  VisitPreOrder(expr, [&](const Expr& e) {
    count += std::holds_alternative<MuxExpr>(e.node) ? 1 : 0;
  });
  return count;
}

std::map<std::string, SignalInfo, std::less<>> BuildSignalTable(
    const ModuleDef& module) {
  SignalTable table;
  for (const Port& port : module.ports) {
    SignalKind kind = port.kind == PortKind::kClock ? SignalKind::kClock
                      : port.direction == Direction::kInput
                          ? SignalKind::kInput
                          : SignalKind::kOutput;
    table.emplace(port.name,
                  SignalInfo{kind, kind == SignalKind::kClock ? 1 : port.width});
  }
  for (const Wire& wire : module.wires) {
    table.emplace(wire.name, SignalInfo{SignalKind::kWire, wire.width});
  }
  for (const Register& reg : module.registers) {
    table.emplace(reg.name, SignalInfo{SignalKind::kRegister, reg.width});
  }
  return table;
}

std::optional<unsigned> InferWidth(const Expr& expr,
                                   const SignalTable& signals) {
  std::vector<Diagnostic> ignored;
  return ExprChecker(signals, "", 0, ignored).Check(expr);
}

std::optional<std::vector<std::size_t>> CombinationalOrder(
    const ModuleDef& module) {
  SignalTable signals = BuildSignalTable(module);
  // Combinational targets and the assignment driving each (first wins).
  std::map<std::string, std::size_t, std::less<>> driver;
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < module.assignments.size(); ++i) {
    const Assignment& assign = module.assignments[i];
    auto it = signals.find(assign.target);
    if (it == signals.end()) continue;
    if (it->second.kind != SignalKind::kOutput &&
        it->second.kind != SignalKind::kWire) {
      continue;
    }
    if (driver.emplace(assign.target, i).second) nodes.push_back(i);
  }

  // Kahn's algorithm; ties broken by assignment order for determinism.
  std::map<std::size_t, std::vector<std::size_t>> readers;
  std::map<std::size_t, std::size_t> indegree;
  for (std::size_t node : nodes) {
    indegree[node] = 0;
  }
  for (std::size_t node : nodes) {
    const ExprRef& expr = module.assignments[node].expr;
    if (!expr) continue;
    std::set<std::size_t> deps;
    for (const std::string& name : CollectRefs(*expr)) {
      auto it = driver.find(name);
      if (it != driver.end()) deps.insert(it->second);
    }
    for (std::size_t dep : deps) {
      readers[dep].push_back(node);
      ++indegree[node];
    }
  }
  std::set<std::size_t> ready;
  for (const auto& [node, degree] : indegree) {
    if (degree == 0) ready.insert(node);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t node = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(node);
    for (std::size_t reader : readers[node]) {
      if (--indegree[reader] == 0) ready.insert(reader);
    }
  }
  if (order.size() != nodes.size()) return std::nullopt;
  return order;
}

std::vector<Diagnostic> Validate(const Circuit& circuit) {
  std::vector<Diagnostic> out;
  if (!IsIdentifier(circuit.name)) {
    out.push_back({"invalid-identifier",
                   fmt::format("circuit '{}'", circuit.name),
                   "circuit name is not a valid identifier", 0});
  }
  if (circuit.modules.size() != 1) {
    out.push_back({"module-count", fmt::format("circuit '{}'", circuit.name),
                   fmt::format("expected exactly one module, found {}",
                               circuit.modules.size()),
                   0});
  }
  for (const ModuleDef& module : circuit.modules) {
    if (!IsIdentifier(module.name)) {
      out.push_back({"invalid-identifier",
                     fmt::format("module '{}'", module.name),
                     "module name is not a valid identifier", 0});
    }
    ValidateModule(module, out);
  }
  return out;
}

ParseError::ParseError(ErrorCode code, int line, int column,
                       const std::string& message)
    : Error(code, fmt::format("{}:{}: {}", line, column, message)),
      line_(line),
      column_(column) {}

std::vector<std::string> SerializeLines(const Circuit& circuit) {
  std::vector<std::string> lines;
  lines.push_back(fmt::format("circuit {} :", circuit.name));
  for (const ModuleDef& module : circuit.modules) {
    lines.push_back(fmt::format("  module {} :", module.name));
    for (const Port& port : module.ports) {
      std::string type = port.kind == PortKind::kClock
                             ? std::string("Clock")
                             : fmt::format("UInt<{}>", port.width);
      lines.push_back(fmt::format(
          "    {} {} : {}",
          port.direction == Direction::kInput ? "input" : "output", port.name,
          type));
    }
    for (const Wire& wire : module.wires) {
      lines.push_back(
          fmt::format("    wire {} : UInt<{}>", wire.name, wire.width));
    }
    for (const Register& reg : module.registers) {
      lines.push_back(fmt::format("    reg {} : UInt<{}>, reset UInt<{}>({})",
                                  reg.name, reg.width, reg.reset.width,
                                  reg.reset.value));
    }
    if (!module.assignments.empty()) {
      lines.emplace_back("  ");
      for (const Assignment& assign : module.assignments) {
        lines.push_back(fmt::format("    {} <= {}", assign.target,
                                    assign.expr ? ToString(*assign.expr) : ""));
      }
    }
  }
  return lines;
}

std::string SerializeCircuit(const Circuit& circuit) {
  std::string text;
  for (const std::string& line : SerializeLines(circuit)) {
    text += line;
    text += '\n';
  }
  return text;
}

}  // namespace hwv::ir
