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

// Multiplexer path coverage.
//
// Instrument() adds one 1-bit "validator" output per mux path. Validator 2i
// is driven by the condition of mux i and validator 2i+1 by its negation, so
// after any settle exactly one validator of each pair is high. A CoverageDb
// attached to a simulator samples the validators on every Expect and the
// accumulated hits are rendered as an annotated listing:
//
//   COVERAGE: 50.0
//   COVERAGE REPORT:
//
//   + circuit Test_1 :
//   ...
//   -     io_cov_valid_1 <= not(io_a)

#ifndef HWV_BRANCH_COV_H_
#define HWV_BRANCH_COV_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwv/ir.h"
#include "hwv/sim.h"

namespace hwv::bcov {

inline constexpr char kValidatorPrefix[] = "io_cov_valid_";

enum class Path { kThen, kElse };

struct Validator {
  std::string port;
  std::size_t mux = 0;         // pre-order index over all assignments
  std::size_t assignment = 0;  // index of the mux's assignment in the input
  Path path = Path::kThen;
  ir::ExprRef guard;
};

using ValidatorMap = std::vector<Validator>;

struct Instrumented {
  ir::Circuit circuit;
  ValidatorMap validators;
};

// Throws Error(kValidation) if `circuit` is invalid or already declares a
// signal whose name starts with kValidatorPrefix.
Instrumented Instrument(const ir::Circuit& circuit);

// Hit accounting for one suite. Persists across tests until Reset().
class CoverageDb {
 public:
  explicit CoverageDb(ValidatorMap validators);

  // Installs Sample() as an expect-sampler. The simulator must not outlive
  // this database.
  void Attach(sim::Simulator& sim);
  void Sample(const sim::Simulator& sim);
  void Reset();

  const ValidatorMap& validators() const { return validators_; }
  const std::vector<std::uint64_t>& hits() const { return hits_; }
  std::uint64_t samples() const { return samples_; }
  bool Covered(std::size_t validator) const { return hits_.at(validator) > 0; }
  std::vector<std::size_t> CoveredIndices() const;

 private:
  ValidatorMap validators_;
  std::vector<std::uint64_t> hits_;
  std::uint64_t samples_ = 0;
};

struct ReportLine {
  char marker;  // '+' or '-'
  std::string text;
};

struct BranchCoverageReport {
  double percentage = 100.0;
  std::vector<std::size_t> covered;
  std::size_t validator_count = 0;
  std::vector<ReportLine> lines;

  std::string Text() const;
  nlohmann::json Json() const;
};

std::string FormatPercentage(double percentage);

BranchCoverageReport Report(const CoverageDb& db,
                            const ir::Circuit& instrumented);

}  // namespace hwv::bcov

#endif  // HWV_BRANCH_COV_H_
