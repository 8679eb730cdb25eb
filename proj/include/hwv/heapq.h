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

// Cycle-level model of a k-ary heap priority queue in hardware.
//
// Node 0 (the head) lives in a register. Nodes 1.. live in a memory whose
// row r holds the k children of node r, so one read fetches a whole sibling
// block. A queue-control FSM dispatches commands and a heapifier FSM walks
// the tree up or down; both advance one state per Tick(). Insert() and
// Remove() run a command to completion and report the cycles it took.
//
// GoldenQueue is the operation-level reference and RunRandomTest() drives
// both in lock step.

#ifndef HWV_HEAPQ_H_
#define HWV_HEAPQ_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hwv/error.h"
#include "hwv/func_cov.h"

namespace hwv::heapq {

struct Element {
  std::uint64_t cyclic = 0;
  std::uint64_t normal = 0;
  std::uint64_t ref = 0;

  bool operator==(const Element&) const = default;
};

// Ordering key: (cyclic, normal), lexicographic. refId takes no part.
inline bool KeyLess(const Element& a, const Element& b) {
  return a.cyclic != b.cyclic ? a.cyclic < b.cyclic : a.normal < b.normal;
}

enum class QueueError { kFull, kEmpty, kNotFound, kDuplicate };
std::string_view QueueErrorName(QueueError error);

enum class OpKind { kInsert, kRemove };

// Which queue-control path served an operation.
enum class OpPath {
  kHeadInsertion,
  kNormalInsertion,
  kHeadRemoval,
  kTailRemoval,
  kNormalRemoval,
  kRejected,
};
std::string_view OpPathName(OpPath path);

struct OpResult {
  OpKind kind = OpKind::kInsert;
  OpPath path = OpPath::kRejected;
  std::optional<QueueError> error;
  std::uint64_t cycles = 0;
  std::uint64_t search_cycles = 0;  // rows scanned by the reference search
  std::uint64_t swaps = 0;
  std::size_t size_before = 0;
  std::optional<Element> head;  // after the operation

  bool ok() const { return !error.has_value(); }
};

// Integer tree depth of the deepest node of an n-element heap, root at
// depth 0: the smallest d with (k^(d+1) - 1) / (k - 1) >= n. Zero for n <= 1.
unsigned Depth(std::uint64_t n, unsigned k);

// Worst-case rows scanned when searching the memory part of an n-element
// queue: ceil((n - 1) / k).
std::uint64_t SearchTime(std::uint64_t n, unsigned k);

// Inclusive cycle bounds of a successful operation. `n` is the element count
// after an insertion and before a removal; `search` is the measured search
// time of a normal removal.
struct CycleBounds {
  std::uint64_t min;
  std::uint64_t max;
};
CycleBounds Bounds(OpPath path, std::uint64_t n, unsigned k,
                   std::uint64_t search = 0);

enum class HeapifyDirection { kUp, kDown };

struct HeapifyResult {
  std::uint64_t swaps = 0;
  std::uint64_t cycles = 0;
};

class HeapQueue {
 public:
  // `k` must be a power of two >= 2; `capacity` >= 1 counts the head.
  // Throws Error(kInvalidArgument) otherwise.
  HeapQueue(unsigned k, std::size_t capacity);

  OpResult Insert(const Element& element);
  OpResult Remove(std::uint64_t ref);

  std::optional<Element> Head() const;
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }
  unsigned k() const { return k_; }
  std::uint64_t cycle() const { return cycle_; }

  // Elements in node order (index 0 is the head).
  std::vector<Element> Nodes() const;
  // True when every parent's key is <= each of its children's keys.
  bool HeapOrdered() const;

  // Test hooks: replace the contents without ordering them, and run the
  // heapifier alone from `node`.
  void LoadNodes(const std::vector<Element>& nodes);
  HeapifyResult Heapify(std::size_t node, HeapifyDirection direction);

 private:
  enum class State {
    kIdle,
    kHeadInsert,
    kInsertWrite,
    kTailClear,
    kHeadFetchTail,
    kHeadMoveTail,
    kSearchInit,
    kSearch,
    kSearchDone,
    kRemoveFetchTail,
    kRemoveWriteTarget,
    kRemoveClearTail,
    kHeapInit,
    kHeapFetchSelf,
    kHeapFetchParent,
    kHeapWriteChildUp,
    kHeapWriteParentUp,
    kHeapSwapRootUp,
    kHeapFetchChildren,
    kHeapSwapRootDown,
    kHeapWriteParentDown,
    kHeapWriteChildDown,
    kHeapDone,
    kReport,
  };
  enum class Mode { kUp, kDown, kEither };

  struct Command {
    OpKind kind;
    Element element;
  };

  void Tick();
  OpResult Run(Command command);
  void Dispatch();
  State StartHeapify(std::size_t node, Mode mode);

  const Element& Get(std::size_t node) const;
  void Set(std::size_t node, const Element& element);
  void Clear(std::size_t node);
  std::size_t Parent(std::size_t node) const { return (node - 1) / k_; }
  std::size_t FirstChild(std::size_t node) const { return node * k_ + 1; }
  bool HasChildren(std::size_t node) const {
    return FirstChild(node) < count_;
  }

  unsigned k_;
  std::size_t capacity_;
  std::uint64_t cycle_ = 0;

  // Storage.
  std::optional<Element> root_;
  std::vector<std::vector<std::optional<Element>>> rows_;
  std::size_t count_ = 0;
  // refId -> presence, consulted by the dispatcher.
  std::unordered_set<std::uint64_t> refs_;

  // Control and datapath registers.
  State state_ = State::kIdle;
  std::optional<Command> command_;
  OpResult result_;
  bool busy_ = false;
  Mode mode_ = Mode::kUp;
  bool moved_up_ = false;
  bool standalone_ = false;
  std::size_t node_ = 0;
  std::size_t child_ = 0;
  Element self_;
  Element other_;
  Element tail_;
  std::size_t search_row_ = 0;
  std::optional<std::size_t> found_;
};

// Operation-level reference: a plain array k-ary heap plus a refId index.
class GoldenQueue {
 public:
  GoldenQueue(unsigned k, std::size_t capacity);

  std::optional<QueueError> Insert(const Element& element);
  std::optional<QueueError> Remove(std::uint64_t ref);
  std::optional<Element> Head() const;
  std::size_t size() const { return heap_.size(); }
  const std::vector<Element>& heap() const { return heap_; }

 private:
  void SiftUp(std::size_t i);
  void SiftDown(std::size_t i);
  void Swap(std::size_t i, std::size_t j);

  unsigned k_;
  std::size_t capacity_;
  std::vector<Element> heap_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

struct Op {
  OpKind kind = OpKind::kInsert;
  Element element;  // for removals only `ref` is used

  bool operator==(const Op&) const = default;
};

// [{"op":"insert","cyclic":..,"normal":..,"ref":..}, {"op":"remove","ref":..}]
nlohmann::json OpsToJson(const std::vector<Op>& ops);
std::vector<Op> OpsFromJson(const nlohmann::json& json);

struct RunConfig {
  unsigned k = 4;
  std::size_t capacity = 33;
  std::uint64_t ops = 1000;
  std::uint64_t seed = 1;
  // Operation fields are drawn from these ranges; removals name a refId from
  // [0, ref_pool), so some of them miss.
  std::uint64_t cyclic_values = 4;
  std::uint64_t normal_values = 256;
  std::uint64_t ref_pool = 0;  // 0 picks 2 * capacity
};

struct Statistics {
  unsigned k = 0;
  std::size_t size = 0;
  std::uint64_t ops = 0;
  double avg_insert_cycles = 0;
  double avg_remove_cycles = 0;
  double valid_fraction = 0;
  std::uint64_t inserts = 0;  // successful
  std::uint64_t removes = 0;  // successful
  std::uint64_t bound_violations = 0;
  fcov::FunctionalReport coverage;

  // {k, size, ops, avg_insert_cycles, avg_remove_cycles, valid_fraction}
  nlohmann::json Json() const;
};

// Thrown by the lock-step runner; carries the operations up to and including
// the first divergence.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::vector<Op> ops)
      : Error(ErrorCode::kMismatch, message), ops_(std::move(ops)) {}
  const std::vector<Op>& ops() const { return ops_; }

 private:
  std::vector<Op> ops_;
};

// Draws `ops` operations with the constraint solver, runs the model and
// the reference side by side, checks heads, error codes, heap order and
// cycle bounds after every operation and samples a coverage plan over
// operation kind, fill level and head hits.
Statistics RunRandomTest(const RunConfig& config);
// Same checks on a fixed operation list.
Statistics Replay(unsigned k, std::size_t capacity, const std::vector<Op>& ops);

}  // namespace hwv::heapq

#endif  // HWV_HEAPQ_H_
