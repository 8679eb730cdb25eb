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

#include "hwv/heapq.h"

#include <algorithm>

#include <fmt/format.h>

#include "hwv/crv.h"

namespace hwv::heapq {

std::string_view QueueErrorName(QueueError error) {
  switch (error) {
    case QueueError::kFull: return "full";
    case QueueError::kEmpty: return "empty";
    case QueueError::kNotFound: return "notFound";
    case QueueError::kDuplicate: return "duplicate";
  }
  return "?";
}

std::string_view OpPathName(OpPath path) {
  switch (path) {
    case OpPath::kHeadInsertion: return "head insertion";
    case OpPath::kNormalInsertion: return "normal insertion";
    case OpPath::kHeadRemoval: return "head removal";
    case OpPath::kTailRemoval: return "tail removal";
    case OpPath::kNormalRemoval: return "normal removal";
    case OpPath::kRejected: return "rejected";
  }
  return "?";
}

unsigned Depth(std::uint64_t n, unsigned k) {
  unsigned d = 0;
  std::uint64_t level = 1;
  std::uint64_t total = 1;
  while (total < n) {
    level *= k;
    total += level;
    ++d;
  }
  return d;
}

std::uint64_t SearchTime(std::uint64_t n, unsigned k) {
  return n <= 1 ? 0 : (n - 1 + k - 1) / k;
}

CycleBounds Bounds(OpPath path, std::uint64_t n, unsigned k,
                   std::uint64_t search) {
  const std::uint64_t d = Depth(n, k);
  switch (path) {
    case OpPath::kHeadInsertion: return {2, 2};
    case OpPath::kNormalInsertion: return {7, 5 + 3 * d};
    case OpPath::kHeadRemoval: return {8, 6 + 3 * d};
    case OpPath::kTailRemoval: return {3, 3};
    case OpPath::kNormalRemoval: return {12 + search, 13 + 3 * d + search};
    case OpPath::kRejected: return {2, 4 + SearchTime(n, k)};
  }
  return {0, 0};
}

// ---------------------------------------------------------------------------
// HeapQueue

HeapQueue::HeapQueue(unsigned k, std::size_t capacity)
    : k_(k), capacity_(capacity) {
  if (k < 2 || (k & (k - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("k must be a power of two >= 2, got {}", k));
  }
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidArgument, "capacity must be at least 1");
  }
  rows_.assign((capacity - 1 + k - 1) / k,
               std::vector<std::optional<Element>>(k));
}

const Element& HeapQueue::Get(std::size_t node) const {
  if (node == 0) return *root_;
  return *rows_[(node - 1) / k_][(node - 1) % k_];
}

void HeapQueue::Set(std::size_t node, const Element& element) {
  if (node == 0) {
    root_ = element;
  } else {
    rows_[(node - 1) / k_][(node - 1) % k_] = element;
  }
}

void HeapQueue::Clear(std::size_t node) {
  if (node == 0) {
    root_.reset();
  } else {
    rows_[(node - 1) / k_][(node - 1) % k_].reset();
  }
}

std::optional<Element> HeapQueue::Head() const { return root_; }

std::vector<Element> HeapQueue::Nodes() const {
  std::vector<Element> out;
  for (std::size_t i = 0; i < count_; ++i) out.push_back(Get(i));
  return out;
}

bool HeapQueue::HeapOrdered() const {
  for (std::size_t i = 1; i < count_; ++i) {
    if (KeyLess(Get(i), Get(Parent(i)))) return false;
  }
  return true;
}

void HeapQueue::LoadNodes(const std::vector<Element>& nodes) {
  if (nodes.size() > capacity_) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} nodes exceed capacity {}", nodes.size(),
                            capacity_));
  }
  root_.reset();
  for (auto& row : rows_) std::fill(row.begin(), row.end(), std::nullopt);
  refs_.clear();
  count_ = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    Set(i, nodes[i]);
    refs_.insert(nodes[i].ref);
  }
}

HeapifyResult HeapQueue::Heapify(std::size_t node, HeapifyDirection direction) {
  if (node >= count_) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("node {} is not occupied", node));
  }
  result_ = OpResult{};
  standalone_ = true;
  busy_ = true;
  state_ = StartHeapify(
      node, direction == HeapifyDirection::kUp ? Mode::kUp : Mode::kDown);
  while (busy_) Tick();
  standalone_ = false;
  return {result_.swaps, result_.cycles};
}

OpResult HeapQueue::Insert(const Element& element) {
  return Run({OpKind::kInsert, element});
}

OpResult HeapQueue::Remove(std::uint64_t ref) {
  Element key;
  key.ref = ref;
  return Run({OpKind::kRemove, key});
}

OpResult HeapQueue::Run(Command command) {
  command_ = command;
  result_ = OpResult{};
  result_.kind = command.kind;
  result_.size_before = count_;
  busy_ = true;
  state_ = State::kIdle;
  while (busy_) Tick();
  command_.reset();
  return result_;
}

HeapQueue::State HeapQueue::StartHeapify(std::size_t node, Mode mode) {
  node_ = node;
  mode_ = mode;
  moved_up_ = false;
  return State::kHeapInit;
}

void HeapQueue::Dispatch() {
  const Command& cmd = *command_;
  auto reject = [&](QueueError error) {
    result_.error = error;
    state_ = State::kReport;
  };
  if (cmd.kind == OpKind::kInsert) {
    if (refs_.count(cmd.element.ref) != 0) return reject(QueueError::kDuplicate);
    if (count_ == capacity_) return reject(QueueError::kFull);
    if (count_ == 0) {
      result_.path = OpPath::kHeadInsertion;
      state_ = State::kHeadInsert;
    } else {
      result_.path = OpPath::kNormalInsertion;
      state_ = State::kInsertWrite;
    }
    return;
  }
  if (count_ == 0) return reject(QueueError::kEmpty);
  // The head register and the last occupied slot are compared in parallel
  // with the command; everything else needs the memory search.
  if (Get(count_ - 1).ref == cmd.element.ref) {
    result_.path = OpPath::kTailRemoval;
    state_ = State::kTailClear;
  } else if (root_->ref == cmd.element.ref) {
    result_.path = OpPath::kHeadRemoval;
    state_ = State::kHeadFetchTail;
  } else {
    state_ = State::kSearchInit;
  }
}

void HeapQueue::Tick() {
  ++cycle_;
  ++result_.cycles;
  switch (state_) {
    case State::kIdle:
      Dispatch();
      break;

    case State::kHeadInsert:
      root_ = command_->element;
      count_ = 1;
      refs_.insert(command_->element.ref);
      result_.head = root_;
      busy_ = false;
      break;

    case State::kInsertWrite:
      Set(count_, command_->element);
      ++count_;
      refs_.insert(command_->element.ref);
      state_ = StartHeapify(count_ - 1, Mode::kUp);
      break;

    case State::kTailClear:
      Clear(count_ - 1);
      --count_;
      refs_.erase(command_->element.ref);
      state_ = State::kReport;
      break;

    case State::kHeadFetchTail:
      tail_ = Get(count_ - 1);
      state_ = State::kHeadMoveTail;
      break;

    case State::kHeadMoveTail:
      root_ = tail_;
      Clear(count_ - 1);
      --count_;
      refs_.erase(command_->element.ref);
      state_ = StartHeapify(0, Mode::kDown);
      break;

    case State::kSearchInit:
      search_row_ = 0;
      found_.reset();
      state_ = SearchTime(count_, k_) == 0 ? State::kSearchDone : State::kSearch;
      break;

    case State::kSearch: {
      // One row read; its k refIds are compared in parallel.
      ++result_.search_cycles;
      for (std::size_t j = 0; j < k_; ++j) {
        std::size_t node = search_row_ * k_ + j + 1;
        if (node < count_ && Get(node).ref == command_->element.ref) {
          found_ = node;
        }
      }
      if (found_ || search_row_ + 1 >= SearchTime(count_, k_)) {
        state_ = State::kSearchDone;
      } else {
        ++search_row_;
      }
      break;
    }

    case State::kSearchDone:
      if (found_) {
        result_.path = OpPath::kNormalRemoval;
        state_ = State::kRemoveFetchTail;
      } else {
        result_.error = QueueError::kNotFound;
        state_ = State::kReport;
      }
      break;

    case State::kRemoveFetchTail:
      tail_ = Get(count_ - 1);
      state_ = State::kRemoveWriteTarget;
      break;

    case State::kRemoveWriteTarget:
      Set(*found_, tail_);
      state_ = State::kRemoveClearTail;
      break;

    case State::kRemoveClearTail:
      Clear(count_ - 1);
      --count_;
      refs_.erase(command_->element.ref);
      state_ = StartHeapify(*found_, Mode::kEither);
      break;

    case State::kHeapInit:
      state_ = State::kHeapFetchSelf;
      break;

    case State::kHeapFetchSelf:
      self_ = Get(node_);
      if (mode_ == Mode::kDown) {
        state_ = State::kHeapFetchChildren;
      } else {
        state_ = node_ == 0 ? State::kHeapDone : State::kHeapFetchParent;
      }
      break;

    case State::kHeapFetchParent:
      other_ = Get(Parent(node_));
      if (KeyLess(self_, other_)) {
        state_ = Parent(node_) == 0 ? State::kHeapSwapRootUp
                                    : State::kHeapWriteChildUp;
      } else if (mode_ == Mode::kEither && !moved_up_) {
        state_ = State::kHeapFetchChildren;
      } else {
        state_ = State::kHeapDone;
      }
      break;

    case State::kHeapWriteChildUp:
      Set(node_, other_);
      state_ = State::kHeapWriteParentUp;
      break;

    case State::kHeapWriteParentUp:
      node_ = Parent(node_);
      Set(node_, self_);
      moved_up_ = true;
      ++result_.swaps;
      state_ = State::kHeapFetchParent;
      break;

    case State::kHeapSwapRootUp:
      // The head is a register, so both halves of the swap land together.
      Set(node_, other_);
      root_ = self_;
      node_ = 0;
      ++result_.swaps;
      state_ = State::kHeapDone;
      break;

    case State::kHeapFetchChildren: {
      std::optional<std::size_t> best;
      for (std::size_t c = FirstChild(node_);
           c < FirstChild(node_) + k_ && c < count_; ++c) {
        if (!best || KeyLess(Get(c), Get(*best))) best = c;
      }
      if (best && KeyLess(Get(*best), self_)) {
        child_ = *best;
        other_ = Get(*best);
        state_ = node_ == 0 ? State::kHeapSwapRootDown
                            : State::kHeapWriteParentDown;
      } else {
        state_ = State::kHeapDone;
      }
      break;
    }

    case State::kHeapSwapRootDown:
      root_ = other_;
      Set(child_, self_);
      node_ = child_;
      ++result_.swaps;
      state_ = HasChildren(node_) ? State::kHeapFetchChildren : State::kHeapDone;
      break;

    case State::kHeapWriteParentDown:
      Set(node_, other_);
      state_ = State::kHeapWriteChildDown;
      break;

    case State::kHeapWriteChildDown:
      Set(child_, self_);
      node_ = child_;
      ++result_.swaps;
      state_ = HasChildren(node_) ? State::kHeapFetchChildren : State::kHeapDone;
      break;

    case State::kHeapDone:
      if (standalone_) {
        busy_ = false;
        state_ = State::kIdle;
      } else {
        state_ = State::kReport;
      }
      break;

    case State::kReport:
      result_.head = root_;
      busy_ = false;
      state_ = State::kIdle;
      break;
  }
}

// ---------------------------------------------------------------------------
// GoldenQueue

GoldenQueue::GoldenQueue(unsigned k, std::size_t capacity)
    : k_(k), capacity_(capacity) {}

std::optional<QueueError> GoldenQueue::Insert(const Element& element) {
  if (index_.count(element.ref) != 0) return QueueError::kDuplicate;
  if (heap_.size() == capacity_) return QueueError::kFull;
  heap_.push_back(element);
  index_[element.ref] = heap_.size() - 1;
  SiftUp(heap_.size() - 1);
  return std::nullopt;
}

std::optional<QueueError> GoldenQueue::Remove(std::uint64_t ref) {
  if (heap_.empty()) return QueueError::kEmpty;
  auto it = index_.find(ref);
  if (it == index_.end()) return QueueError::kNotFound;
  std::size_t i = it->second;
  index_.erase(it);
  if (i + 1 == heap_.size()) {
    heap_.pop_back();
    return std::nullopt;
  }
  heap_[i] = heap_.back();
  heap_.pop_back();
  index_[heap_[i].ref] = i;
  SiftUp(i);
  SiftDown(i);
  return std::nullopt;
}

std::optional<Element> GoldenQueue::Head() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.front();
}

void GoldenQueue::Swap(std::size_t i, std::size_t j) {
  std::swap(heap_[i], heap_[j]);
  index_[heap_[i].ref] = i;
  index_[heap_[j].ref] = j;
}

void GoldenQueue::SiftUp(std::size_t i) {
  while (i > 0 && KeyLess(heap_[i], heap_[(i - 1) / k_])) {
    Swap(i, (i - 1) / k_);
    i = (i - 1) / k_;
  }
}

void GoldenQueue::SiftDown(std::size_t i) {
  for (;;) {
    std::size_t best = i;
    for (std::size_t c = i * k_ + 1; c <= i * k_ + k_ && c < heap_.size(); ++c) {
      if (KeyLess(heap_[c], heap_[best])) best = c;
    }
    if (best == i) return;
    Swap(i, best);
    i = best;
  }
}

// ---------------------------------------------------------------------------
// Operation lists

nlohmann::json OpsToJson(const std::vector<Op>& ops) {
  nlohmann::json out = nlohmann::json::array();
  for (const Op& op : ops) {
    if (op.kind == OpKind::kInsert) {
      out.push_back({{"op", "insert"},
                     {"cyclic", op.element.cyclic},
                     {"normal", op.element.normal},
                     {"ref", op.element.ref}});
    } else {
      out.push_back({{"op", "remove"}, {"ref", op.element.ref}});
    }
  }
  return out;
}

std::vector<Op> OpsFromJson(const nlohmann::json& json) {
  if (!json.is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "operation list must be an array");
  }
  std::vector<Op> ops;
  for (std::size_t i = 0; i < json.size(); ++i) {
    const nlohmann::json& j = json[i];
    auto field = [&](const char* name) -> std::uint64_t {
      if (!j.contains(name) || !j[name].is_number_unsigned()) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("operation {}: missing or negative '{}'", i,
                                name));
      }
      return j[name].get<std::uint64_t>();
    };
    if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("operation {}: expected an object with 'op'", i));
    }
    Op op;
    std::string kind = j["op"].get<std::string>();
    if (kind == "insert") {
      op.kind = OpKind::kInsert;
      op.element = {field("cyclic"), field("normal"), field("ref")};
    } else if (kind == "remove") {
      op.kind = OpKind::kRemove;
      op.element.ref = field("ref");
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("operation {}: unknown op '{}'", i, kind));
    }
    ops.push_back(op);
  }
  return ops;
}

nlohmann::json Statistics::Json() const {
  return {{"k", k},
          {"size", size},
          {"ops", ops},
          {"avg_insert_cycles", avg_insert_cycles},
          {"avg_remove_cycles", avg_remove_cycles},
          {"valid_fraction", valid_fraction}};
}

// ---------------------------------------------------------------------------
// Lock-step runner

namespace {

fcov::CoverGroup QueuePlan(std::size_t capacity) {
  using fcov::Range;
  std::vector<std::pair<std::string, Range>> fill = {{"empty", {0, 0}}};
  std::uint64_t half = capacity / 2;
  if (half >= 1) fill.push_back({"low", {1, half}});
  if (half + 1 <= capacity - 1) fill.push_back({"high", {half + 1, capacity - 1}});
  fill.push_back({"full", {capacity, capacity}});

  fcov::CoverGroup g;
  g.points.push_back({"op", "op", {{"insert", {0, 0}}, {"remove", {1, 1}}}});
  fcov::CoverPoint fill_point{"fill", "fill", {}};
  for (const auto& [name, range] : fill) fill_point.bins.push_back({name, range});
  g.points.push_back(fill_point);
  g.points.push_back(
      {"valid", "valid", {{"rejected", {0, 0}}, {"accepted", {1, 1}}}});
  g.points.push_back({"head_hit", "head_hit", {{"other", {0, 0}}, {"head", {1, 1}}}});

  fcov::Cross by_fill{"opByFill", "op", "fill", {}};
  for (const auto& [op, op_range] :
       std::vector<std::pair<std::string, Range>>{{"insert", {0, 0}},
                                                  {"remove", {1, 1}}}) {
    for (const auto& [name, range] : fill) {
      by_fill.bins.push_back({op + "_" + name, op_range, range});
    }
  }
  g.crosses.push_back(by_fill);
  g.crosses.push_back({"opByValid",
                       "op",
                       "valid",
                       {{"insertRejected", {0, 0}, {0, 0}},
                        {"insertAccepted", {0, 0}, {1, 1}},
                        {"removeRejected", {1, 1}, {0, 0}},
                        {"removeAccepted", {1, 1}, {1, 1}}}});
  g.crosses.push_back(
      {"removeByHead", "op", "head_hit", {{"removeHead", {1, 1}, {1, 1}}}});
  return g;
}

class LockStep {
 public:
  LockStep(unsigned k, std::size_t capacity)
      : dut_(k, capacity), golden_(k, capacity) {
    coverage_.Register(QueuePlan(capacity));
  }

  void Apply(const Op& op) {
    history_.push_back(op);
    const std::size_t before = dut_.size();
    const bool head_hit = op.kind == OpKind::kRemove && dut_.Head() &&
                          dut_.Head()->ref == op.element.ref;
    OpResult r;
    std::optional<QueueError> expected;
    if (op.kind == OpKind::kInsert) {
      r = dut_.Insert(op.element);
      expected = golden_.Insert(op.element);
    } else {
      r = dut_.Remove(op.element.ref);
      expected = golden_.Remove(op.element.ref);
    }
    auto fail = [&](const std::string& what) {
      throw DivergenceError(
          fmt::format("operation {}: {}", history_.size() - 1, what), history_);
    };
    if (r.error != expected) {
      fail(fmt::format("model reports {}, reference {}",
                       r.error ? QueueErrorName(*r.error) : "ok",
                       expected ? QueueErrorName(*expected) : "ok"));
    }
    if (dut_.size() != golden_.size()) {
      fail(fmt::format("size {} vs reference {}", dut_.size(), golden_.size()));
    }
    std::optional<Element> a = dut_.Head(), b = golden_.Head();
    if (a.has_value() != b.has_value() ||
        (a && (KeyLess(*a, *b) || KeyLess(*b, *a)))) {
      fail("head differs from the reference");
    }
    if (!dut_.HeapOrdered()) fail("heap order violated");

    std::uint64_t n = op.kind == OpKind::kInsert && r.ok() ? before + 1 : before;
    CycleBounds bounds = Bounds(r.path, n, dut_.k(), r.search_cycles);
    if (r.cycles < bounds.min || r.cycles > bounds.max) ++bound_violations_;
    if (r.path == OpPath::kNormalRemoval &&
        (r.search_cycles < 1 || r.search_cycles > SearchTime(before, dut_.k()))) {
      ++bound_violations_;
    }
    if (r.ok() && op.kind == OpKind::kInsert) {
      insert_cycles_ += r.cycles;
      ++inserts_;
    } else if (r.ok()) {
      remove_cycles_ += r.cycles;
      ++removes_;
    }
    coverage_.Sample(history_.size(),
                     {{"op", op.kind == OpKind::kInsert ? 0u : 1u},
                      {"fill", before},
                      {"valid", r.ok() ? 1u : 0u},
                      {"head_hit", head_hit ? 1u : 0u}});
  }

  Statistics Finish() const {
    Statistics s;
    s.k = dut_.k();
    s.size = dut_.capacity();
    s.ops = history_.size();
    s.inserts = inserts_;
    s.removes = removes_;
    s.avg_insert_cycles =
        inserts_ == 0 ? 0.0 : static_cast<double>(insert_cycles_) / inserts_;
    s.avg_remove_cycles =
        removes_ == 0 ? 0.0 : static_cast<double>(remove_cycles_) / removes_;
    s.valid_fraction =
        history_.empty()
            ? 0.0
            : static_cast<double>(inserts_ + removes_) / history_.size();
    s.bound_violations = bound_violations_;
    s.coverage = coverage_.GetReport();
    return s;
  }

 private:
  HeapQueue dut_;
  GoldenQueue golden_;
  fcov::CoverageReporter coverage_;
  std::vector<Op> history_;
  std::uint64_t insert_cycles_ = 0;
  std::uint64_t remove_cycles_ = 0;
  std::uint64_t inserts_ = 0;
  std::uint64_t removes_ = 0;
  std::uint64_t bound_violations_ = 0;
};

}  // namespace

Statistics RunRandomTest(const RunConfig& config) {
  if (config.ops == 0 || config.cyclic_values == 0 || config.normal_values == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "ops and value ranges must be positive");
  }
  const std::uint64_t pool =
      config.ref_pool == 0 ? 2 * config.capacity : config.ref_pool;
  crv::RandomProblem problem;
  problem.Rand("op", {0, 1})
      .Rand("cyclic", crv::Interval(0, static_cast<crv::Value>(config.cyclic_values) - 1))
      .Rand("normal", crv::Interval(0, static_cast<crv::Value>(config.normal_values) - 1))
      .Rand("ref", crv::Interval(0, static_cast<crv::Value>(pool) - 1));
  crv::RandomObject stimulus(std::move(problem), config.seed);

  LockStep run(config.k, config.capacity);
  for (std::uint64_t i = 0; i < config.ops; ++i) {
    crv::Assignment a = stimulus.Randomize();
    Op op;
    op.kind = a.at("op") == 0 ? OpKind::kInsert : OpKind::kRemove;
    op.element.ref = static_cast<std::uint64_t>(a.at("ref"));
    if (op.kind == OpKind::kInsert) {
      op.element.cyclic = static_cast<std::uint64_t>(a.at("cyclic"));
      op.element.normal = static_cast<std::uint64_t>(a.at("normal"));
    }
    run.Apply(op);
  }
  return run.Finish();
}

Statistics Replay(unsigned k, std::size_t capacity, const std::vector<Op>& ops) {
  LockStep run(k, capacity);
  for (const Op& op : ops) run.Apply(op);
  return run.Finish();
}

}  // namespace hwv::heapq
