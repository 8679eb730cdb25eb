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

// Small circuits and plans shared by the CLI demos and the tests.

#ifndef HWV_DEMOS_H_
#define HWV_DEMOS_H_

#include "hwv/func_cov.h"

namespace hwv::demos {

// One mux selecting between two 2-bit inputs.
inline constexpr char kTest1Circuit[] =
    "circuit Test_1 :\n"
    "  module Test_1 :\n"
    "    input io_a : UInt<1>\n"
    "    input io_b_0 : UInt<2>\n"
    "    input io_b_1 : UInt<2>\n"
    "    input clock : Clock\n"
    "    output out : UInt<2>\n"
    "  \n"
    "    out <= mux(io_a, io_b_0, io_b_1)\n";

// 8-bit accumulator with a pass-through `test` port.
inline constexpr char kAccuCircuit[] =
    "circuit Accu :\n"
    "  module Accu :\n"
    "    input clock : Clock\n"
    "    input in : UInt<8>\n"
    "    input test_in : UInt<8>\n"
    "    output accu : UInt<8>\n"
    "    output test : UInt<8>\n"
    "    reg acc : UInt<8>, reset UInt<8>(0)\n"
    "  \n"
    "    acc <= add(acc, in)\n"
    "    accu <= acc\n"
    "    test <= test_in\n";

inline fcov::CoverGroup AccuPlan() {
  fcov::CoverGroup group;
  group.points.push_back(
      {"accu", "accu", {{"lo10", {0, 10}}, {"First100", {0, 100}}}});
  group.points.push_back({"test", "test", {{"testLo10", {0, 10}}}});
  group.crosses.push_back({"accuAndTest", "accu", "test", {{"both1", {1, 1}, {1, 1}}}});
  return group;
}

}  // namespace hwv::demos

#endif  // HWV_DEMOS_H_
