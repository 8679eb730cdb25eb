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

// Functional coverage: cover points with value bins, same-cycle crosses and
// delayed crosses, sampled explicitly and reported per cover group.
//
//   fcov::CoverageReporter cr(sim);
//   cr.Register({.points = {{"accu", "accu", {{"lo10", {0, 10}}}}}});
//   ...
//   cr.Sample(sim);
//   std::cout << cr.PrintReport();

#ifndef HWV_FUNC_COV_H_
#define HWV_FUNC_COV_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hwv/sim.h"

namespace hwv::fcov {

// Inclusive on both ends.
struct Range {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool Contains(std::uint64_t v) const { return lo <= v && v <= hi; }
  bool operator==(const Range&) const = default;
};

struct Bin {
  std::string name;
  Range range;
};

struct CoverPoint {
  std::string port;
  std::string name;
  std::vector<Bin> bins;
};

struct CrossBin {
  std::string name;
  Range a;
  Range b;
};

struct Cross {
  std::string name;
  std::string point_a;
  std::string point_b;
  std::vector<CrossBin> bins;
};

enum class DelayKind { kExactly, kEventually, kAlways };

struct Delay {
  DelayKind kind = DelayKind::kExactly;
  std::uint64_t cycles = 1;

  static Delay Exactly(std::uint64_t n) { return {DelayKind::kExactly, n}; }
  static Delay Eventually(std::uint64_t n) { return {DelayKind::kEventually, n}; }
  static Delay Always(std::uint64_t n) { return {DelayKind::kAlways, n}; }
  std::string ToString() const;  // e.g. "Exactly(2)"
  bool operator==(const Delay&) const = default;
};

// Point A is sampled in range at cycle t and point B is checked in the
// cycles after t according to `delay`:
//   Exactly(n)    a sample exists at t+n and B is in range there
//   Eventually(n) some sample in [t+1, t+n] has B in range
//   Always(n)     every cycle t+1..t+n is sampled with B in range
// Every A occurrence opens its own window and scores at most one hit.
struct DelayedCross {
  std::string name;
  std::string point_a;
  std::string point_b;
  std::vector<CrossBin> bins;
  Delay delay;
};

struct CoverGroup {
  std::vector<CoverPoint> points;
  std::vector<Cross> crosses;
  std::vector<DelayedCross> delayed;
};

struct BinReport {
  std::string name;
  Range range;
  std::uint64_t hits = 0;
};

struct PointReport {
  std::string name;
  std::string port;
  std::vector<BinReport> bins;

  // Bins with at least one hit over all bins.
  double Fraction() const;
};

struct CrossBinReport {
  std::string name;
  Range a;
  Range b;
  std::uint64_t hits = 0;
};

struct CrossReport {
  std::string name;
  std::string point_a;
  std::string point_b;
  std::optional<Delay> delay;  // empty for same-cycle crosses
  std::vector<CrossBinReport> bins;

  double Fraction() const;
};

struct GroupReport {
  int id = 0;
  std::vector<PointReport> points;
  std::vector<CrossReport> crosses;  // plain crosses, then delayed ones
};

struct FunctionalReport {
  std::vector<GroupReport> groups;

  // Throw Error(kInvalidArgument) for unknown names.
  std::uint64_t BinNCases(std::string_view point, std::string_view bin) const;
  std::uint64_t CrossBinNCases(std::string_view cross,
                               std::string_view bin) const;
  double PointFraction(std::string_view point) const;

  std::string Text() const;
  nlohmann::json Json() const;
};

struct TraceSample {
  std::uint64_t cycle = 0;
  std::vector<std::uint64_t> values;  // indexed like CoverageReporter::points()
};

class CoverageReporter {
 public:
  // Accepts any port name.
  CoverageReporter() = default;
  // Rejects cover points on ports `sim` does not have.
  explicit CoverageReporter(const sim::Simulator& sim);

  // Returns the group id, starting at 1. Names of points and crosses must be
  // unique across all groups; crosses may only reference points of their own
  // group.
  int Register(CoverGroup group);

  // Peeks every registered port, stamped with sim.cycle().
  void Sample(const sim::Simulator& sim);
  // `port_values` must contain every registered port. Cycles must be
  // strictly increasing.
  void Sample(std::uint64_t cycle,
              const std::map<std::string, std::uint64_t, std::less<>>&
                  port_values);

  FunctionalReport GetReport() const;
  std::string PrintReport() const { return GetReport().Text(); }

  const std::vector<TraceSample>& trace() const { return trace_; }
  // All registered points, in registration order.
  const std::vector<CoverPoint>& points() const { return points_; }
  std::size_t PointIndex(std::string_view name) const;

 private:
  struct Window {
    std::uint64_t start;
    std::uint64_t next;  // Always: next cycle that must be sampled
  };
  struct DelayedState {
    DelayedCross spec;
    std::size_t a = 0;
    std::size_t b = 0;
    std::vector<std::uint64_t> hits;
    std::vector<std::vector<Window>> open;  // per bin
  };
  struct CrossState {
    Cross spec;
    std::size_t a = 0;
    std::size_t b = 0;
    std::vector<std::uint64_t> hits;
  };
  struct GroupState {
    int id;
    std::vector<std::size_t> points;
    std::vector<std::size_t> crosses;
    std::vector<std::size_t> delayed;
  };

  void Record(TraceSample sample);
  void Advance(DelayedState& state, const TraceSample& sample);

  std::optional<std::set<std::string, std::less<>>> known_ports_;
  std::set<std::string, std::less<>> names_;
  std::vector<GroupState> groups_;
  std::vector<CoverPoint> points_;
  std::vector<std::vector<std::uint64_t>> point_hits_;
  std::vector<CrossState> crosses_;
  std::vector<DelayedState> delayed_;
  std::vector<TraceSample> trace_;
};

}  // namespace hwv::fcov

#endif  // HWV_FUNC_COV_H_
