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
#include <sstream>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_circuits.h"

namespace hwv::ir {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;

std::vector<std::string> Tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> Rules(const std::vector<Diagnostic>& diagnostics) {
  std::vector<std::string> rules;
  for (const Diagnostic& d : diagnostics) rules.push_back(d.rule);
  return rules;
}

std::size_t MuxCount(const Circuit& c) {
  std::size_t n = 0;
  for (const Assignment& a : c.top().assignments) n += CountMuxes(*a.expr);
  return n;
}

TEST(ParseTest, InstrumentedCircuitShape) {
  Circuit c = ParseCircuit(hwv::testing::kTest1Instrumented);
  EXPECT_EQ(c.name, "Test_1");
  ASSERT_EQ(c.modules.size(), 1u);
  const ModuleDef& m = c.top();
  int inputs = 0, outputs = 0, clocks = 0;
  for (const Port& p : m.ports) {
    if (p.kind == PortKind::kClock) {
      ++clocks;
    } else if (p.direction == Direction::kInput) {
      ++inputs;
    } else {
      ++outputs;
    }
  }
  EXPECT_EQ(inputs, 3);
  EXPECT_EQ(outputs, 3);
  EXPECT_EQ(clocks, 1);
  EXPECT_EQ(MuxCount(c), 1u);
}

TEST(ParseTest, PassThrough) {
  Circuit c = ParseCircuit(
      "circuit E :\n  module E :\n    input a : UInt<1>\n"
      "    output o : UInt<1>\n    o <= a");
  EXPECT_EQ(MuxCount(c), 0u);
  ASSERT_EQ(c.top().assignments.size(), 1u);
  EXPECT_EQ(ToString(*c.top().assignments[0].expr), "a");
}

TEST(ParseTest, CombinationalCycleRejected) {
  const char* text =
      "circuit C :\n  module C :\n    output o : UInt<1>\n"
      "    wire x : UInt<1>\n    wire y : UInt<1>\n"
      "    x <= y\n    y <= x\n    o <= x\n";
  try {
    ParseCircuit(text);
    FAIL() << "expected a cycle error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
    EXPECT_THAT(e.what(), ::testing::HasSubstr("combinational-cycle"));
  }
}

TEST(ParseTest, SyntaxErrorCarriesLineAndColumn) {
  const char* text =
      "circuit C :\n  module C :\n    input a : UInt<1>\n"
      "    output o : UInt<1>\n    o <= mux(a, a\n";
  try {
    ParseCircuit(text);
    FAIL() << "expected a syntax error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSyntax);
    EXPECT_EQ(e.line(), 5);
    EXPECT_EQ(e.column(), 18);
  }
}

TEST(ParseTest, BadIndentation) {
  try {
    ParseCircuit("circuit C :\n   module C :\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSyntax);
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ParseTest, SemanticErrors) {
  auto code_of = [](const char* text) {
    try {
      ParseCircuit(text);
    } catch (const ParseError& e) {
      return std::make_pair(e.code(), std::string(e.what()));
    }
    return std::make_pair(ErrorCode::kSyntax, std::string("no error"));
  };
  auto unknown = code_of(
      "circuit C :\n  module C :\n    output o : UInt<1>\n    o <= nope\n");
  EXPECT_EQ(unknown.first, ErrorCode::kValidation);
  EXPECT_THAT(unknown.second, ::testing::HasSubstr("unknown-identifier"));

  auto width = code_of(
      "circuit C :\n  module C :\n    input a : UInt<4>\n"
      "    output o : UInt<1>\n    o <= a\n");
  EXPECT_THAT(width.second, ::testing::HasSubstr("width"));

  auto dup = code_of(
      "circuit C :\n  module C :\n    input a : UInt<1>\n"
      "    output o : UInt<1>\n    o <= a\n    o <= a\n");
  EXPECT_THAT(dup.second, ::testing::HasSubstr("duplicate-assignment"));
}

TEST(ParseTest, CommentsAndLiterals) {
  Circuit c = ParseCircuit(
      "; leading comment\n"
      "circuit L :\n  module L :\n    input clock : Clock\n"
      "    input a : UInt<8>\n    output o : UInt<8>\n"
      "    reg r : UInt<8>, reset UInt<8>(200) ; trailing\n\n"
      "    r <= add(r, UInt<8>(1))\n    o <= xor(a, r)\n");
  EXPECT_EQ(c.top().registers[0].reset.value, 200u);
  EXPECT_EQ(ToString(*c.top().assignments[0].expr), "add(r, UInt<8>(1))");
}

TEST(SerializeTest, MatchesCanonicalTokens) {
  Circuit c = ParseCircuit(hwv::testing::kTest1Instrumented);
  std::string text = SerializeCircuit(c);
  EXPECT_EQ(Tokens(text), Tokens(hwv::testing::kTest1Instrumented));
  EXPECT_EQ(text, hwv::testing::kTest1Instrumented);
  EXPECT_THAT(SerializeLines(c),
              ::testing::Contains("    out <= mux(io_a, io_b_0, io_b_1)"));
}

TEST(SerializeTest, EmptyBodyIsHeaderOnly) {
  Circuit c;
  c.name = "Empty";
  c.modules.push_back(ModuleDef{"Empty", {}, {}, {}, {}});
  EXPECT_THAT(SerializeLines(c),
              ElementsAre("circuit Empty :", "  module Empty :"));
  EXPECT_EQ(ParseCircuit(SerializeCircuit(c)), c);
}

TEST(ValidateTest, ValidCircuitHasNoDiagnostics) {
  EXPECT_THAT(Validate(ParseCircuit(hwv::testing::kTest1)), IsEmpty());
}

TEST(ValidateTest, WideMuxCondition) {
  Circuit c = ParseCircuit(hwv::testing::kTest1);
  c.top().assignments[0].expr =
      Mux(Ref("io_b_0"), Ref("io_b_0"), Ref("io_b_1"));
  EXPECT_THAT(Rules(Validate(c)), ElementsAre("width"));
}

TEST(ValidateTest, RegisterWithoutClock) {
  Circuit c;
  c.name = "R";
  ModuleDef m{"R", {}, {}, {}, {}};
  m.ports.push_back({"o", Direction::kOutput, PortKind::kData, 1});
  m.registers.push_back({"r", 1, LiteralExpr{0, 1}});
  m.assignments.push_back({"r", Not(Ref("r"))});
  m.assignments.push_back({"o", Ref("r")});
  c.modules.push_back(m);
  EXPECT_THAT(Rules(Validate(c)), ElementsAre("missing-clock"));
}

TEST(ValidateTest, StructuralRules) {
  Circuit c;
  c.name = "S";
  ModuleDef m{"S", {}, {}, {}, {}};
  m.ports.push_back({"clk0", Direction::kInput, PortKind::kClock, 1});
  m.ports.push_back({"clk1", Direction::kInput, PortKind::kClock, 1});
  m.ports.push_back({"a", Direction::kInput, PortKind::kData, 1});
  m.ports.push_back({"o", Direction::kOutput, PortKind::kData, 1});
  m.ports.push_back({"p", Direction::kOutput, PortKind::kData, 1});
  m.assignments.push_back({"a", Ref("o")});
  m.assignments.push_back({"o", Ref("clk0")});
  c.modules.push_back(m);
  auto rules = Rules(Validate(c));
  EXPECT_THAT(rules, ::testing::Contains("clock-count"));
  EXPECT_THAT(rules, ::testing::Contains("assign-to-input"));
  EXPECT_THAT(rules, ::testing::Contains("clock-in-expression"));
  EXPECT_THAT(rules, ::testing::Contains("missing-assignment"));
}

TEST(ValidateTest, ModuleCount) {
  Circuit c;
  c.name = "None";
  EXPECT_THAT(Rules(Validate(c)), ElementsAre("module-count"));
}

TEST(ValidateTest, Deterministic) {
  hwv::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Circuit c = hwv::testing::RandomCircuit(rng);
    // Break it a little so there is something to report.
    c.top().assignments.push_back({"missing", Ref("ghost")});
    EXPECT_EQ(Validate(c), Validate(c));
  }
}

TEST(RoundTripTest, RandomCircuits) {
  hwv::Rng rng(2026);
  for (int i = 0; i < 300; ++i) {
    Circuit c = hwv::testing::RandomCircuit(rng);
    ASSERT_THAT(Validate(c), IsEmpty()) << SerializeCircuit(c);
    std::string text = SerializeCircuit(c);
    Circuit once = ParseCircuit(text);
    EXPECT_EQ(once, c);
    EXPECT_EQ(ParseCircuit(SerializeCircuit(once)), once);
    EXPECT_EQ(SerializeCircuit(once), text);
  }
}

// Acyclicity agrees with a transitive-closure oracle on random dependency
// graphs of up to 20 wires.
TEST(CycleTest, MatchesReachabilityOracle) {
  hwv::Rng rng(99);
  int cyclic_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    int n = 1 + static_cast<int>(rng.Below(20));
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    ModuleDef m{"G", {}, {}, {}, {}};
    m.ports.push_back({"i", Direction::kInput, PortKind::kData, 1});
    m.ports.push_back({"o", Direction::kOutput, PortKind::kData, 1});
    for (int w = 0; w < n; ++w) m.wires.push_back({"w" + std::to_string(w), 1});
    std::uint64_t density = 1 + rng.Below(4);
    for (int w = 0; w < n; ++w) {
      ExprRef expr = Ref("i");
      for (int src = 0; src < n; ++src) {
        if (rng.Below(2 * n) < density) {
          expr = Binary(BinaryOp::kOr, expr, Ref("w" + std::to_string(src)));
          reach[src][w] = true;
        }
      }
      m.assignments.push_back({"w" + std::to_string(w), expr});
    }
    m.assignments.push_back({"o", Ref("w0")});
    for (int k = 0; k < n; ++k) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (reach[a][k] && reach[k][b]) reach[a][b] = true;
        }
      }
    }
    bool oracle_cyclic = false;
    for (int a = 0; a < n; ++a) oracle_cyclic = oracle_cyclic || reach[a][a];
    cyclic_seen += oracle_cyclic;
    EXPECT_EQ(!CombinationalOrder(m).has_value(), oracle_cyclic);

    if (auto order = CombinationalOrder(m)) {
      // Every reader comes after what it reads.
      std::vector<std::size_t> position(m.assignments.size());
      for (std::size_t i = 0; i < order->size(); ++i) position[(*order)[i]] = i;
      for (std::size_t i = 0; i < m.assignments.size(); ++i) {
        for (const std::string& ref : CollectRefs(*m.assignments[i].expr)) {
          if (ref == "i") continue;
          std::size_t src = std::stoul(ref.substr(1));
          EXPECT_LT(position[src], position[i]);
        }
      }
    }
  }
  EXPECT_GT(cyclic_seen, 20);
  EXPECT_LT(cyclic_seen, 380);
}

}  // namespace
}  // namespace hwv::ir
