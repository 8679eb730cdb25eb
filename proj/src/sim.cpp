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

#include <ostream>

#include <fmt/format.h>

namespace hwv::sim {
namespace {

std::uint64_t MaskFor(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

}  // namespace

// Flattened expression node. Operands always refer to earlier nodes of the
// same assignment, so a linear pass evaluates the whole expression.
struct Simulator::Node {
  enum class Op { kRef, kConst, kMux, kNot, kBinary };
  Op op;
  ir::BinaryOp binary = ir::BinaryOp::kAnd;
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
  std::uint64_t value = 0;  // constant, or slot index for kRef
  std::uint64_t mask = 0;   // result mask
};

struct Simulator::ProcessSlot {
  std::function<Process()> body;
  Process process;
  ProcessStatus status = ProcessStatus::kRunnable;
};

Simulator::Simulator(ir::Circuit circuit) : circuit_(std::move(circuit)) {
  std::vector<ir::Diagnostic> diagnostics = ir::Validate(circuit_);
  if (!diagnostics.empty()) {
    const ir::Diagnostic& d = diagnostics.front();
    throw Error(ErrorCode::kValidation,
                fmt::format("cannot load circuit '{}': {}: {}: {}",
                            circuit_.name, d.rule, d.location, d.message));
  }
  const ir::ModuleDef& module = circuit_.top();
  auto add_slot = [&](const std::string& name, ir::SignalKind kind,
                      unsigned width) {
    index_.emplace(name, slots_.size());
    slots_.push_back(Slot{name, kind, width, MaskFor(width)});
  };
  for (const ir::Port& port : module.ports) {
    if (port.kind == ir::PortKind::kClock) {
      add_slot(port.name, ir::SignalKind::kClock, 1);
    } else {
      add_slot(port.name,
               port.direction == ir::Direction::kInput
                   ? ir::SignalKind::kInput
                   : ir::SignalKind::kOutput,
               port.width);
    }
  }
  for (const ir::Wire& wire : module.wires) {
    add_slot(wire.name, ir::SignalKind::kWire, wire.width);
  }
  for (const ir::Register& reg : module.registers) {
    add_slot(reg.name, ir::SignalKind::kRegister, reg.width);
  }
  values_.assign(slots_.size(), 0);
  for (const ir::Register& reg : module.registers) {
    values_[Lookup(reg.name)] = reg.reset.value;
  }

  auto compile = [&](const ir::Assignment& assign) {
    Compiled compiled;
    compiled.target = Lookup(assign.target);
    compiled.begin = nodes_.size();
    CompileExpr(*assign.expr);
    compiled.end = nodes_.size();
    return compiled;
  };
  // Validate guarantees an order exists.
  std::vector<std::size_t> order = *ir::CombinationalOrder(module);
  for (std::size_t i : order) {
    comb_.push_back(compile(module.assignments[i]));
  }
  for (const ir::Assignment& assign : module.assignments) {
    if (slots_[Lookup(assign.target)].kind == ir::SignalKind::kRegister) {
      registers_.push_back(compile(assign));
    }
  }
  scratch_.assign(nodes_.size(), 0);
  Settle();
  sampled_ = values_;
}

Simulator::~Simulator() = default;

std::size_t Simulator::CompileExpr(const ir::Expr& expr) {
  Node node{};
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ir::RefExpr>) {
          std::size_t slot = Lookup(e.name);
          node.op = Node::Op::kRef;
          node.value = slot;
          node.mask = slots_[slot].mask;
        } else if constexpr (std::is_same_v<T, ir::LiteralExpr>) {
          node.op = Node::Op::kConst;
          node.value = e.value;
          node.mask = MaskFor(e.width);
        } else if constexpr (std::is_same_v<T, ir::MuxExpr>) {
          node.op = Node::Op::kMux;
          node.a = CompileExpr(*e.cond);
          node.b = CompileExpr(*e.on_true);
          node.c = CompileExpr(*e.on_false);
          node.mask = nodes_[node.b].mask | nodes_[node.c].mask;
        } else if constexpr (std::is_same_v<T, ir::UnaryExpr>) {
          node.op = Node::Op::kNot;
          node.a = CompileExpr(*e.operand);
          node.mask = nodes_[node.a].mask;
        } else {
          node.op = Node::Op::kBinary;
          node.binary = e.op;
          node.a = CompileExpr(*e.lhs);
          node.b = CompileExpr(*e.rhs);
          node.mask = ir::IsComparison(e.op)
                          ? 1
                          : nodes_[node.a].mask | nodes_[node.b].mask;
        }
      },
      expr.node);
  nodes_.push_back(node);
  return nodes_.size() - 1;
}

std::uint64_t Simulator::Evaluate(const Compiled& assign) {
  for (std::size_t i = assign.begin; i < assign.end; ++i) {
    const Node& n = nodes_[i];
    std::uint64_t result = 0;
    switch (n.op) {
      case Node::Op::kRef:
        result = values_[n.value];
        break;
      case Node::Op::kConst:
        result = n.value;
        break;
      case Node::Op::kMux:
        result = scratch_[n.a] ? scratch_[n.b] : scratch_[n.c];
        break;
      case Node::Op::kNot:
        result = ~scratch_[n.a];
        break;
      case Node::Op::kBinary: {
        std::uint64_t a = scratch_[n.a];
        std::uint64_t b = scratch_[n.b];
        switch (n.binary) {
          case ir::BinaryOp::kAnd: result = a & b; break;
          case ir::BinaryOp::kOr: result = a | b; break;
          case ir::BinaryOp::kXor: result = a ^ b; break;
          case ir::BinaryOp::kAdd: result = a + b; break;
          case ir::BinaryOp::kSub: result = a - b; break;
          case ir::BinaryOp::kEq: result = a == b; break;
          case ir::BinaryOp::kNeq: result = a != b; break;
          case ir::BinaryOp::kLt: result = a < b; break;
          case ir::BinaryOp::kGt: result = a > b; break;
          case ir::BinaryOp::kLeq: result = a <= b; break;
          case ir::BinaryOp::kGeq: result = a >= b; break;
        }
        break;
      }
    }
    scratch_[i] = result & n.mask;
  }
  return scratch_[assign.end - 1] & slots_[assign.target].mask;
}

std::size_t Simulator::Lookup(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownSignal,
                fmt::format("unknown signal '{}' in circuit '{}'", name,
                            circuit_.name));
  }
  return it->second;
}

void Simulator::Settle() {
  for (const Compiled& assign : comb_) {
    values_[assign.target] = Evaluate(assign);
  }
}

void Simulator::Poke(std::string_view port, std::uint64_t value) {
  std::size_t slot = Lookup(port);
  const Slot& s = slots_[slot];
  if (s.kind != ir::SignalKind::kInput) {
    throw Error(ErrorCode::kWrongDirection,
                fmt::format("cannot poke '{}': not a data input", port));
  }
  if ((value & ~s.mask) != 0) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("value {} does not fit '{}' (UInt<{}>)", value,
                            port, s.width));
  }
  values_[slot] = value;
  Settle();
}

std::uint64_t Simulator::Peek(std::string_view signal) const {
  std::size_t slot = Lookup(signal);
  if (slots_[slot].kind == ir::SignalKind::kClock) {
    throw Error(ErrorCode::kWrongDirection,
                fmt::format("cannot peek clock '{}'", signal));
  }
  return values_[slot];
}

std::uint64_t Simulator::Sampled(std::string_view signal) const {
  std::size_t slot = Lookup(signal);
  if (slots_[slot].kind == ir::SignalKind::kClock) {
    throw Error(ErrorCode::kWrongDirection,
                fmt::format("cannot sample clock '{}'", signal));
  }
  return sampled_[slot];
}

ExpectResult Simulator::Expect(std::string_view port, std::uint64_t value) {
  std::size_t slot = Lookup(port);
  if (slots_[slot].kind != ir::SignalKind::kOutput) {
    throw Error(ErrorCode::kWrongDirection,
                fmt::format("cannot expect on '{}': not an output", port));
  }
  ExpectResult result{std::string(port), value, values_[slot], cycle_,
                      values_[slot] == value};
  ++expect_count_;
  for (const Sampler& sampler : samplers_) sampler(*this);
  return result;
}

void Simulator::Edge() {
  for (const EdgeMonitor& monitor : monitors_) monitor(*this);
  if (tracing_) RecordChanges(cycle_);
  sampled_ = values_;
  std::vector<std::uint64_t> next;
  next.reserve(registers_.size());
  for (const Compiled& reg : registers_) next.push_back(Evaluate(reg));
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    values_[registers_[i].target] = next[i];
  }
  ++cycle_;
  Settle();
}

void Simulator::Step(std::uint64_t cycles) {
  if (in_scheduler_) {
    throw Error(ErrorCode::kInvalidArgument,
                "Step cannot be called from inside a process");
  }
  for (std::uint64_t n = 0; n < cycles; ++n) {
    Edge();
    in_scheduler_ = true;
    struct Guard {
      bool& flag;
      ~Guard() { flag = false; }
    } guard{in_scheduler_};
    // Processes forked during this round already ran; skip them.
    std::size_t count = processes_.size();
    for (std::size_t i = 0; i < count; ++i) {
      ProcessSlot& slot = *processes_[i];
      if (slot.status != ProcessStatus::kWaitingForClock) continue;
      auto& promise = slot.process.handle().promise();
      if (--promise.edges_to_wait == 0) Resume(slot);
    }
  }
}

void Simulator::Resume(ProcessSlot& slot) {
  slot.status = ProcessStatus::kRunnable;
  auto handle = slot.process.handle();
  handle.resume();
  if (std::exception_ptr error = handle.promise().error) {
    slot.status = ProcessStatus::kFinished;
    slot.process.Reset();
    std::rethrow_exception(error);
  }
  if (handle.done()) {
    slot.status = ProcessStatus::kFinished;
    slot.process.Reset();
    slot.body = nullptr;
  } else {
    slot.status = ProcessStatus::kWaitingForClock;
  }
}

ProcessId Simulator::Fork(std::function<Process()> body) {
  auto slot = std::make_unique<ProcessSlot>();
  slot->body = std::move(body);
  slot->process = slot->body();
  ProcessSlot& ref = *slot;
  processes_.push_back(std::move(slot));
  ProcessId id = processes_.size() - 1;
  Resume(ref);
  return id;
}

void Simulator::Join(ProcessId id, std::uint64_t max_cycles) {
  if (id >= processes_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown process id {}", id));
  }
  std::uint64_t waited = 0;
  while (processes_[id]->status != ProcessStatus::kFinished) {
    if (waited++ >= max_cycles) {
      throw Error(ErrorCode::kTimeout,
                  fmt::format("process {} did not finish within {} cycles", id,
                              max_cycles));
    }
    Step(1);
  }
}

ProcessStatus Simulator::Status(ProcessId id) const {
  if (id >= processes_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("unknown process id {}", id));
  }
  return processes_[id]->status;
}

void Simulator::AddSampler(Sampler sampler) {
  samplers_.push_back(std::move(sampler));
}

void Simulator::AddEdgeMonitor(EdgeMonitor monitor) {
  monitors_.push_back(std::move(monitor));
}

bool Simulator::HasSignal(std::string_view name) const {
  return index_.find(name) != index_.end();
}

unsigned Simulator::Width(std::string_view name) const {
  return slots_[Lookup(name)].width;
}

ir::SignalKind Simulator::Kind(std::string_view name) const {
  return slots_[Lookup(name)].kind;
}

std::vector<std::string> Simulator::Inputs() const {
  std::vector<std::string> names;
  for (const Slot& s : slots_) {
    if (s.kind == ir::SignalKind::kInput) names.push_back(s.name);
  }
  return names;
}

std::vector<std::string> Simulator::Outputs() const {
  std::vector<std::string> names;
  for (const Slot& s : slots_) {
    if (s.kind == ir::SignalKind::kOutput) names.push_back(s.name);
  }
  return names;
}

void Simulator::EnableTrace() {
  if (tracing_) return;
  tracing_ = true;
  last_traced_.clear();
}

void Simulator::RecordTraceSnapshot() {
  if (tracing_) RecordChanges(cycle_);
}

void Simulator::RecordChanges(std::uint64_t cycle) {
  bool first = last_traced_.empty();
  if (first) last_traced_.assign(slots_.size(), 0);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].kind == ir::SignalKind::kClock) continue;
    if (first || values_[i] != last_traced_[i]) {
      trace_.push_back({cycle, slots_[i].name, values_[i]});
      last_traced_[i] = values_[i];
    }
  }
}

void Simulator::WriteTraceCsv(std::ostream& out) const {
  out << "cycle,signal,value\n";
  for (const TraceEntry& e : trace_) {
    out << e.cycle << ',' << e.signal << ',' << e.value << '\n';
  }
}

}  // namespace hwv::sim
