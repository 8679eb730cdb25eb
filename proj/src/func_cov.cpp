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

#include "hwv/func_cov.h"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "hwv/error.h"

namespace hwv::fcov {
namespace {

constexpr char kReportHeader[] = "============== COVERAGE REPORT ==============";
constexpr char kSeparator[] = "============================================";

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

void CheckRange(const Range& r, std::string_view owner, std::string_view bin) {
  if (r.lo > r.hi) {
    Invalid(fmt::format("bin '{}' of '{}' has an empty range {} to {}", bin,
                        owner, r.lo, r.hi));
  }
}

template <typename T>
double HitFraction(const std::vector<T>& bins) {
  if (bins.empty()) return 0.0;
  auto hit = std::count_if(bins.begin(), bins.end(),
                           [](const T& b) { return b.hits > 0; });
  return static_cast<double>(hit) / static_cast<double>(bins.size());
}

nlohmann::json RangeJson(const Range& r) { return {{"lo", r.lo}, {"hi", r.hi}}; }

std::string_view KindName(DelayKind kind) {
  switch (kind) {
    case DelayKind::kExactly: return "Exactly";
    case DelayKind::kEventually: return "Eventually";
    case DelayKind::kAlways: return "Always";
  }
  return "?";
}

}  // namespace

std::string Delay::ToString() const {
  return fmt::format("{}({})", KindName(kind), cycles);
}

double PointReport::Fraction() const { return HitFraction(bins); }
double CrossReport::Fraction() const { return HitFraction(bins); }

std::uint64_t FunctionalReport::BinNCases(std::string_view point,
                                          std::string_view bin) const {
  for (const GroupReport& g : groups) {
    for (const PointReport& p : g.points) {
      if (p.name != point) continue;
      for (const BinReport& b : p.bins) {
        if (b.name == bin) return b.hits;
      }
      Invalid(fmt::format("cover point '{}' has no bin '{}'", point, bin));
    }
  }
  Invalid(fmt::format("unknown cover point '{}'", point));
}

std::uint64_t FunctionalReport::CrossBinNCases(std::string_view cross,
                                               std::string_view bin) const {
  for (const GroupReport& g : groups) {
    for (const CrossReport& c : g.crosses) {
      if (c.name != cross) continue;
      for (const CrossBinReport& b : c.bins) {
        if (b.name == bin) return b.hits;
      }
      Invalid(fmt::format("cross '{}' has no bin '{}'", cross, bin));
    }
  }
  Invalid(fmt::format("unknown cross '{}'", cross));
}

double FunctionalReport::PointFraction(std::string_view point) const {
  for (const GroupReport& g : groups) {
    for (const PointReport& p : g.points) {
      if (p.name == point) return p.Fraction();
    }
  }
  Invalid(fmt::format("unknown cover point '{}'", point));
}

std::string FunctionalReport::Text() const {
  std::string out = kReportHeader;
  out += '\n';
  for (const GroupReport& g : groups) {
    out += fmt::format("================ GROUP ID: {} ================\n",
                       g.id);
    for (const PointReport& p : g.points) {
      out += fmt::format("COVER_POINT PORT NAME: {}\n", p.name);
      for (const BinReport& b : p.bins) {
        out += fmt::format("BIN {} COVERING Range {} to {} HAS {} HIT(S)\n",
                           b.name, b.range.lo, b.range.hi, b.hits);
      }
      out += kSeparator;
      out += '\n';
    }
    for (const CrossReport& c : g.crosses) {
      out += fmt::format("CROSS_POINT {} FOR POINTS {} AND {}", c.name,
                         c.point_a, c.point_b);
      if (c.delay) out += fmt::format(" WITH DELAY {}", c.delay->ToString());
      out += '\n';
      for (const CrossBinReport& b : c.bins) {
        out += fmt::format(
            "BIN {} COVERING Range {} to {} CROSS Range {} to {} HAS {} "
            "HIT(S)\n",
            b.name, b.a.lo, b.a.hi, b.b.lo, b.b.hi, b.hits);
      }
      out += kSeparator;
      out += '\n';
    }
  }
  return out;
}

nlohmann::json FunctionalReport::Json() const {
  nlohmann::json groups_json = nlohmann::json::array();
  for (const GroupReport& g : groups) {
    nlohmann::json points_json = nlohmann::json::array();
    for (const PointReport& p : g.points) {
      nlohmann::json bins = nlohmann::json::array();
      for (const BinReport& b : p.bins) {
        bins.push_back(
            {{"name", b.name}, {"range", RangeJson(b.range)}, {"hits", b.hits}});
      }
      points_json.push_back({{"name", p.name},
                             {"port", p.port},
                             {"fraction", p.Fraction()},
                             {"bins", bins}});
    }
    nlohmann::json crosses_json = nlohmann::json::array();
    for (const CrossReport& c : g.crosses) {
      nlohmann::json bins = nlohmann::json::array();
      for (const CrossBinReport& b : c.bins) {
        bins.push_back({{"name", b.name},
                        {"a", RangeJson(b.a)},
                        {"b", RangeJson(b.b)},
                        {"hits", b.hits}});
      }
      nlohmann::json cross = {{"name", c.name},
                              {"point_a", c.point_a},
                              {"point_b", c.point_b},
                              {"fraction", c.Fraction()},
                              {"bins", bins}};
      cross["delay"] = c.delay ? nlohmann::json(c.delay->ToString())
                               : nlohmann::json(nullptr);
      crosses_json.push_back(std::move(cross));
    }
    groups_json.push_back(
        {{"id", g.id}, {"points", points_json}, {"crosses", crosses_json}});
  }
  return {{"groups", groups_json}};
}

CoverageReporter::CoverageReporter(const sim::Simulator& sim) {
  known_ports_.emplace();
  for (const std::string& name : sim.Inputs()) known_ports_->insert(name);
  for (const std::string& name : sim.Outputs()) known_ports_->insert(name);
  for (const ir::Wire& w : sim.circuit().top().wires) known_ports_->insert(w.name);
  for (const ir::Register& r : sim.circuit().top().registers) {
    known_ports_->insert(r.name);
  }
}

std::size_t CoverageReporter::PointIndex(std::string_view name) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].name == name) return i;
  }
  Invalid(fmt::format("unknown cover point '{}'", name));
}

int CoverageReporter::Register(CoverGroup group) {
  if (group.points.empty() && group.crosses.empty() && group.delayed.empty()) {
    Invalid("cannot register an empty coverage plan");
  }
  // Validate everything before touching state so a failed call is a no-op.
  std::set<std::string, std::less<>> fresh;
  auto claim = [&](const std::string& name, std::string_view what) {
    if (name.empty()) Invalid(fmt::format("{} name must not be empty", what));
    if (names_.count(name) != 0 || !fresh.insert(name).second) {
      Invalid(fmt::format("duplicate {} name '{}'", what, name));
    }
  };
  std::map<std::string, std::size_t, std::less<>> local;
  for (const CoverPoint& p : group.points) {
    claim(p.name, "cover point");
    if (known_ports_ && known_ports_->count(p.port) == 0) {
      throw Error(ErrorCode::kUnknownSignal,
                  fmt::format("cover point '{}' samples unknown port '{}'",
                              p.name, p.port));
    }
    if (p.bins.empty()) {
      Invalid(fmt::format("cover point '{}' has no bins", p.name));
    }
    std::set<std::string, std::less<>> bin_names;
    for (const Bin& b : p.bins) {
      if (!bin_names.insert(b.name).second) {
        Invalid(fmt::format("duplicate bin '{}' in cover point '{}'", b.name,
                            p.name));
      }
      CheckRange(b.range, p.name, b.name);
    }
    local.emplace(p.name, points_.size() + local.size());
  }
  auto resolve = [&](const std::string& cross, const std::string& point) {
    auto it = local.find(point);
    if (it == local.end()) {
      Invalid(fmt::format("cross '{}' references unknown point '{}'", cross,
                          point));
    }
    return it->second;
  };
  auto check_bins = [&](const std::string& cross,
                        const std::vector<CrossBin>& bins) {
    if (bins.empty()) Invalid(fmt::format("cross '{}' has no bins", cross));
    std::set<std::string, std::less<>> bin_names;
    for (const CrossBin& b : bins) {
      if (!bin_names.insert(b.name).second) {
        Invalid(fmt::format("duplicate bin '{}' in cross '{}'", b.name, cross));
      }
      CheckRange(b.a, cross, b.name);
      CheckRange(b.b, cross, b.name);
    }
  };
  for (const Cross& c : group.crosses) {
    claim(c.name, "cross");
    resolve(c.name, c.point_a);
    resolve(c.name, c.point_b);
    check_bins(c.name, c.bins);
  }
  for (const DelayedCross& d : group.delayed) {
    claim(d.name, "cross");
    resolve(d.name, d.point_a);
    resolve(d.name, d.point_b);
    check_bins(d.name, d.bins);
    if (d.delay.cycles == 0) {
      Invalid(fmt::format("delayed cross '{}' needs a delay of at least one "
                          "cycle",
                          d.name));
    }
  }
  if (!trace_.empty() && !group.points.empty()) {
    Invalid("cover points cannot be added after sampling started");
  }

  GroupState state{static_cast<int>(groups_.size()) + 1, {}, {}, {}};
  for (CoverPoint& p : group.points) {
    state.points.push_back(points_.size());
    point_hits_.emplace_back(p.bins.size(), 0);
    points_.push_back(std::move(p));
  }
  for (Cross& c : group.crosses) {
    state.crosses.push_back(crosses_.size());
    CrossState cs;
    cs.a = resolve(c.name, c.point_a);
    cs.b = resolve(c.name, c.point_b);
    cs.hits.assign(c.bins.size(), 0);
    cs.spec = std::move(c);
    crosses_.push_back(std::move(cs));
  }
  for (DelayedCross& d : group.delayed) {
    state.delayed.push_back(delayed_.size());
    DelayedState ds;
    ds.a = resolve(d.name, d.point_a);
    ds.b = resolve(d.name, d.point_b);
    ds.hits.assign(d.bins.size(), 0);
    ds.open.resize(d.bins.size());
    ds.spec = std::move(d);
    delayed_.push_back(std::move(ds));
  }
  names_.merge(fresh);
  groups_.push_back(std::move(state));
  return groups_.back().id;
}

void CoverageReporter::Sample(const sim::Simulator& sim) {
  TraceSample sample{sim.cycle(), {}};
  sample.values.reserve(points_.size());
  for (const CoverPoint& p : points_) sample.values.push_back(sim.Peek(p.port));
  Record(std::move(sample));
}

void CoverageReporter::Sample(
    std::uint64_t cycle,
    const std::map<std::string, std::uint64_t, std::less<>>& port_values) {
  TraceSample sample{cycle, {}};
  sample.values.reserve(points_.size());
  for (const CoverPoint& p : points_) {
    auto it = port_values.find(p.port);
    if (it == port_values.end()) {
      throw Error(ErrorCode::kUnknownSignal,
                  fmt::format("sample has no value for port '{}'", p.port));
    }
    sample.values.push_back(it->second);
  }
  Record(std::move(sample));
}

void CoverageReporter::Record(TraceSample sample) {
  if (groups_.empty()) Invalid("sample() called before register()");
  if (!trace_.empty() && sample.cycle <= trace_.back().cycle) {
    Invalid(fmt::format("sample cycle {} is not after the previous sample at "
                        "cycle {}",
                        sample.cycle, trace_.back().cycle));
  }
  for (std::size_t p = 0; p < points_.size(); ++p) {
    const std::vector<Bin>& bins = points_[p].bins;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      if (bins[b].range.Contains(sample.values[p])) ++point_hits_[p][b];
    }
  }
  for (CrossState& c : crosses_) {
    for (std::size_t b = 0; b < c.spec.bins.size(); ++b) {
      const CrossBin& bin = c.spec.bins[b];
      if (bin.a.Contains(sample.values[c.a]) &&
          bin.b.Contains(sample.values[c.b])) {
        ++c.hits[b];
      }
    }
  }
  for (DelayedState& d : delayed_) Advance(d, sample);
  trace_.push_back(std::move(sample));
}

// Windows are closed as soon as their outcome is known; whatever is still
// open has not scored yet, which is also what a scan of the trace so far
// would conclude.
void CoverageReporter::Advance(DelayedState& d, const TraceSample& sample) {
  const std::uint64_t n = d.spec.delay.cycles;
  const std::uint64_t c = sample.cycle;
  for (std::size_t b = 0; b < d.spec.bins.size(); ++b) {
    const CrossBin& bin = d.spec.bins[b];
    const bool b_in = bin.b.Contains(sample.values[d.b]);
    std::vector<Window>& open = d.open[b];
    std::size_t keep = 0;
    for (Window& w : open) {
      bool closed = false;
      switch (d.spec.delay.kind) {
        case DelayKind::kExactly:
          if (c >= w.start + n) {
            if (c == w.start + n && b_in) ++d.hits[b];
            closed = true;
          }
          break;
        case DelayKind::kEventually:
          if (c > w.start + n) {
            closed = true;
          } else if (b_in) {
            ++d.hits[b];
            closed = true;
          }
          break;
        case DelayKind::kAlways:
          if (c != w.next || !b_in) {
            closed = true;
          } else if (++w.next > w.start + n) {
            ++d.hits[b];
            closed = true;
          }
          break;
      }
      if (!closed) open[keep++] = w;
    }
    open.resize(keep);
    if (bin.a.Contains(sample.values[d.a])) open.push_back({c, c + 1});
  }
}

FunctionalReport CoverageReporter::GetReport() const {
  FunctionalReport report;
  for (const GroupState& g : groups_) {
    GroupReport gr;
    gr.id = g.id;
    for (std::size_t p : g.points) {
      PointReport pr{points_[p].name, points_[p].port, {}};
      for (std::size_t b = 0; b < points_[p].bins.size(); ++b) {
        pr.bins.push_back({points_[p].bins[b].name, points_[p].bins[b].range,
                           point_hits_[p][b]});
      }
      gr.points.push_back(std::move(pr));
    }
    auto add_cross = [&](const std::string& name, const std::string& a,
                         const std::string& b, std::optional<Delay> delay,
                         const std::vector<CrossBin>& bins,
                         const std::vector<std::uint64_t>& hits) {
      CrossReport cr{name, a, b, delay, {}};
      for (std::size_t i = 0; i < bins.size(); ++i) {
        cr.bins.push_back({bins[i].name, bins[i].a, bins[i].b, hits[i]});
      }
      gr.crosses.push_back(std::move(cr));
    };
    for (std::size_t c : g.crosses) {
      const CrossState& cs = crosses_[c];
      add_cross(cs.spec.name, cs.spec.point_a, cs.spec.point_b, std::nullopt,
                cs.spec.bins, cs.hits);
    }
    for (std::size_t d : g.delayed) {
      const DelayedState& ds = delayed_[d];
      add_cross(ds.spec.name, ds.spec.point_a, ds.spec.point_b, ds.spec.delay,
                ds.spec.bins, ds.hits);
    }
    report.groups.push_back(std::move(gr));
  }
  return report;
}

}  // namespace hwv::fcov
