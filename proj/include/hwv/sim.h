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

// Cycle-accurate two-phase simulator for hwv::ir circuits.
//
// A Simulator owns one circuit instance. Test code drives it with the four
// primitive actions Poke, Peek, Step and Expect. Testbench behaviour that
// spans several cycles can be written as cooperative processes:
//
//   sim.Fork([&]() -> sim::Process {
//     sim.Poke("valid", 1);
//     do {
//       co_await sim.Clock();
//     } while (!(sim.Sampled("valid") && sim.Sampled("ready")));
//     sim.Poke("valid", 0);
//   });
//
// Scheduling is deterministic. A forked process runs immediately until its
// first `co_await`. On every clock edge the simulator latches registers,
// advances the cycle counter, settles combinational logic and then resumes
// each waiting process once, in fork order.

#ifndef HWV_SIM_H_
#define HWV_SIM_H_

#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hwv/ir.h"

namespace hwv::sim {

class Process {
 public:
  struct promise_type {
    std::uint64_t edges_to_wait = 0;
    std::exception_ptr error;

    Process get_return_object() {
      return Process(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() noexcept {}
    void unhandled_exception() noexcept { error = std::current_exception(); }
  };

  Process() = default;
  Process(Process&& other) noexcept
      : handle_(std::exchange(other.handle_, nullptr)) {}
  Process& operator=(Process&& other) noexcept {
    if (this != &other) {
      Reset();
      handle_ = std::exchange(other.handle_, nullptr);
    }
    return *this;
  }
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;
  ~Process() { Reset(); }

  std::coroutine_handle<promise_type> handle() const { return handle_; }
  void Reset() {
    if (handle_) handle_.destroy();
    handle_ = nullptr;
  }

 private:
  explicit Process(std::coroutine_handle<promise_type> handle)
      : handle_(handle) {}

  std::coroutine_handle<promise_type> handle_;
};

// Awaitable returned by Simulator::Clock; suspends for `count` clock edges.
struct ClockEdges {
  std::uint64_t count = 1;

  bool await_ready() const noexcept { return count == 0; }
  void await_suspend(
      std::coroutine_handle<Process::promise_type> handle) const noexcept {
    handle.promise().edges_to_wait = count;
  }
  void await_resume() const noexcept {}
};

using ProcessId = std::size_t;

enum class ProcessStatus { kRunnable, kWaitingForClock, kFinished };

struct ExpectResult {
  std::string port;
  std::uint64_t expected = 0;
  std::uint64_t actual = 0;
  std::uint64_t cycle = 0;
  bool pass = false;
};

// One row of the value trace: `signal` held `value` during `cycle`.
struct TraceEntry {
  std::uint64_t cycle;
  std::string signal;
  std::uint64_t value;

  bool operator==(const TraceEntry&) const = default;
};

class Simulator {
 public:
  // Invoked on every Expect, after the comparison, pass or fail.
  using Sampler = std::function<void(const Simulator&)>;
  // Invoked at every clock edge with the settled pre-edge state.
  using EdgeMonitor = std::function<void(const Simulator&)>;

  // Loads `circuit`: registers take their reset values, inputs are zero and
  // combinational logic is settled. Throws Error(kValidation) when the
  // circuit does not validate.
  explicit Simulator(ir::Circuit circuit);
  ~Simulator();

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void Poke(std::string_view port, std::uint64_t value);
  std::uint64_t Peek(std::string_view signal) const;
  // Value `signal` had at the most recent clock edge (the load state before
  // the first edge).
  std::uint64_t Sampled(std::string_view signal) const;
  void Step(std::uint64_t cycles = 1);
  ExpectResult Expect(std::string_view port, std::uint64_t value);

  ProcessId Fork(std::function<Process()> body);
  // Steps the clock until process `id` finishes. Throws Error(kTimeout)
  // after `max_cycles` cycles.
  void Join(ProcessId id, std::uint64_t max_cycles = 1'000'000);
  ProcessStatus Status(ProcessId id) const;
  ClockEdges Clock(std::uint64_t edges = 1) const { return {edges}; }

  void AddSampler(Sampler sampler);
  void AddEdgeMonitor(EdgeMonitor monitor);
  std::size_t expect_count() const { return expect_count_; }

  // Re-evaluates every combinational connection. Idempotent.
  void Settle();

  std::uint64_t cycle() const { return cycle_; }
  const ir::Circuit& circuit() const { return circuit_; }
  bool HasSignal(std::string_view name) const;
  unsigned Width(std::string_view name) const;
  ir::SignalKind Kind(std::string_view name) const;
  std::vector<std::string> Inputs() const;   // data inputs, declaration order
  std::vector<std::string> Outputs() const;  // declaration order

  // Trace recording. Rows are emitted for signals whose value at a clock
  // edge differs from the previously recorded value.
  void EnableTrace();
  void RecordTraceSnapshot();
  const std::vector<TraceEntry>& trace() const { return trace_; }
  void WriteTraceCsv(std::ostream& out) const;

 private:
  struct Slot {
    std::string name;
    ir::SignalKind kind;
    unsigned width;
    std::uint64_t mask;
  };
  struct Node;
  struct Compiled {
    std::size_t target;
    std::size_t begin;  // node range [begin, end); result is node end-1
    std::size_t end;
  };
  struct ProcessSlot;

  std::size_t Lookup(std::string_view name) const;
  std::size_t CompileExpr(const ir::Expr& expr);
  std::uint64_t Evaluate(const Compiled& assign);
  void Edge();
  void Resume(ProcessSlot& slot);
  void RecordChanges(std::uint64_t cycle);

  ir::Circuit circuit_;
  std::vector<Slot> slots_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<Node> nodes_;
  std::vector<std::uint64_t> scratch_;
  std::vector<Compiled> comb_;       // topological order
  std::vector<Compiled> registers_;  // next-value logic
  std::vector<std::uint64_t> values_;
  std::vector<std::uint64_t> sampled_;
  std::uint64_t cycle_ = 0;

  std::vector<Sampler> samplers_;
  std::vector<EdgeMonitor> monitors_;
  std::size_t expect_count_ = 0;

  std::vector<std::unique_ptr<ProcessSlot>> processes_;
  bool in_scheduler_ = false;

  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
  std::vector<std::uint64_t> last_traced_;
};

}  // namespace hwv::sim

#endif  // HWV_SIM_H_
