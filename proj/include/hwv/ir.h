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

// Miniature RTL intermediate representation.
//
// A circuit holds exactly one module. A module declares ports, wires and
// registers, followed by an ordered list of connections `target <= expr`.
// Values are unsigned and at most 64 bits wide. The textual form (`.mir`) is
// indentation based:
//
//   circuit Test_1 :
//     module Test_1 :
//       input io_a : UInt<1>
//       input clock : Clock
//       output out : UInt<2>
//       reg r : UInt<2>, reset UInt<2>(0)
//
//       out <= mux(io_a, r, UInt<2>(1))

#ifndef HWV_IR_H_
#define HWV_IR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hwv/error.h"

namespace hwv::ir {

inline constexpr unsigned kMaxWidth = 64;

enum class UnaryOp { kNot };

enum class BinaryOp {
  kAnd,
  kOr,
  kXor,
  kAdd,
  kSub,
  kEq,
  kNeq,
  kLt,
  kGt,
  kLeq,
  kGeq,
};

std::string_view OpName(UnaryOp op);
std::string_view OpName(BinaryOp op);
bool IsComparison(BinaryOp op);

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

struct RefExpr {
  std::string name;
};

struct LiteralExpr {
  std::uint64_t value = 0;
  unsigned width = 1;
};

struct MuxExpr {
  ExprRef cond;
  ExprRef on_true;
  ExprRef on_false;
};

struct UnaryExpr {
  UnaryOp op = UnaryOp::kNot;
  ExprRef operand;
};

struct BinaryExpr {
  BinaryOp op = BinaryOp::kAnd;
  ExprRef lhs;
  ExprRef rhs;
};

struct Expr {
  std::variant<RefExpr, LiteralExpr, MuxExpr, UnaryExpr, BinaryExpr> node;
};

// Structural (deep) equality.
bool operator==(const Expr& a, const Expr& b);

ExprRef Ref(std::string name);
ExprRef Literal(std::uint64_t value, unsigned width);
ExprRef Mux(ExprRef cond, ExprRef on_true, ExprRef on_false);
ExprRef Not(ExprRef operand);
ExprRef Binary(BinaryOp op, ExprRef lhs, ExprRef rhs);

// Canonical text of an expression, e.g. `mux(io_a, io_b_0, io_b_1)`.
std::string ToString(const Expr& expr);

// Names referenced by `expr`, in pre-order, duplicates kept.
std::vector<std::string> CollectRefs(const Expr& expr);

std::size_t CountMuxes(const Expr& expr);

enum class Direction { kInput, kOutput };
enum class PortKind { kData, kClock };

// `line` fields record the 1-based source line when the object came from the
// parser (0 otherwise). They take no part in equality.
struct Port {
  std::string name;
  Direction direction = Direction::kInput;
  PortKind kind = PortKind::kData;
  unsigned width = 1;
  int line = 0;
};

struct Wire {
  std::string name;
  unsigned width = 1;
  int line = 0;
};

struct Register {
  std::string name;
  unsigned width = 1;
  LiteralExpr reset;
  int line = 0;
};

struct Assignment {
  std::string target;
  ExprRef expr;
  int line = 0;
};

bool operator==(const Port& a, const Port& b);
bool operator==(const Wire& a, const Wire& b);
bool operator==(const Register& a, const Register& b);
bool operator==(const Assignment& a, const Assignment& b);

struct ModuleDef {
  std::string name;
  std::vector<Port> ports;
  std::vector<Wire> wires;
  std::vector<Register> registers;
  std::vector<Assignment> assignments;

  bool operator==(const ModuleDef&) const = default;
};

struct Circuit {
  std::string name;
  std::vector<ModuleDef> modules;

  // The single module of a v1 circuit. Requires `modules` to be non-empty.
  const ModuleDef& top() const { return modules.front(); }
  ModuleDef& top() { return modules.front(); }

  bool operator==(const Circuit&) const = default;
};

enum class SignalKind { kInput, kOutput, kClock, kWire, kRegister };

struct SignalInfo {
  SignalKind kind;
  unsigned width;
};

// Name -> declaration summary. Later duplicates are ignored; Validate reports
// them.
std::map<std::string, SignalInfo, std::less<>> BuildSignalTable(
    const ModuleDef& module);

struct Diagnostic {
  std::string rule;      // e.g. "width", "combinational-cycle"
  std::string location;  // human readable, e.g. "assignment to 'out'"
  std::string message;
  int line = 0;

  bool operator==(const Diagnostic&) const = default;
};

// Empty iff the circuit satisfies every structural, naming, width and
// acyclicity rule. Deterministic.
std::vector<Diagnostic> Validate(const Circuit& circuit);

// Result width of `expr` given declared signal widths. Unknown names and
// clock references yield std::nullopt.
std::optional<unsigned> InferWidth(
    const Expr& expr,
    const std::map<std::string, SignalInfo, std::less<>>& signals);

// Indices into `module.assignments` of the combinational connections (wires
// and outputs) in an order where every connection comes after the
// connections it reads. std::nullopt when a combinational cycle exists.
std::optional<std::vector<std::size_t>> CombinationalOrder(
    const ModuleDef& module);

class ParseError : public Error {
 public:
  ParseError(ErrorCode code, int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Parses `.mir` text. Syntax problems raise ParseError with code kSyntax; a
// circuit that parses but fails Validate raises ParseError with code
// kValidation located at the first diagnostic's line.
Circuit ParseCircuit(std::string_view text);

// Canonical text, one entry per line, no trailing newlines.
std::vector<std::string> SerializeLines(const Circuit& circuit);
std::string SerializeCircuit(const Circuit& circuit);

}  // namespace hwv::ir

#endif  // HWV_IR_H_
