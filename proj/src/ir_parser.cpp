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

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hwv/ir.h"

namespace hwv::ir {
namespace {

enum class Tok { kIdent, kNumber, kLParen, kRParen, kComma, kColon, kLt, kGt,
                 kConnect, kEnd };

struct Token {
  Tok kind;
  std::string_view text;
  int column;  // 1-based
};

std::string_view Describe(Tok kind) {
  switch (kind) {
    case Tok::kIdent: return "identifier";
    case Tok::kNumber: return "number";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kComma: return "','";
    case Tok::kColon: return "':'";
    case Tok::kLt: return "'<'";
    case Tok::kGt: return "'>'";
    case Tok::kConnect: return "'<='";
    case Tok::kEnd: return "end of line";
  }
  return "token";
}

bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Parser state for one logical line.
class LineParser {
 public:
  LineParser(std::string_view text, int line, int indent)
      : line_(line) {
    Tokenize(text, indent);
  }

  [[noreturn]] void Fail(const Token& at, const std::string& message) const {
    throw ParseError(ErrorCode::kSyntax, line_, at.column, message);
  }

  const Token& Peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  Token Take() {
    Token tok = Peek();
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return tok;
  }

  Token Expect(Tok kind) {
    const Token& tok = Peek();
    if (tok.kind != kind) {
      Fail(tok, fmt::format("expected {}, found {}", Describe(kind),
                            tok.kind == Tok::kEnd
                                ? std::string(Describe(Tok::kEnd))
                                : fmt::format("'{}'", tok.text)));
    }
    return Take();
  }

  void ExpectKeyword(std::string_view word) {
    const Token& tok = Peek();
    if (tok.kind != Tok::kIdent || tok.text != word) {
      Fail(tok, fmt::format("expected '{}'", word));
    }
    Take();
  }

  void ExpectEnd() { Expect(Tok::kEnd); }

  std::uint64_t Number() {
    Token tok = Expect(Tok::kNumber);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.text.data(),
                                     tok.text.data() + tok.text.size(), value);
    if (ec != std::errc() || ptr != tok.text.data() + tok.text.size()) {
      Fail(tok, fmt::format("number '{}' out of range", tok.text));
    }
    return value;
  }

  unsigned Width() {
    Token at = Peek();
    std::uint64_t width = Number();
    if (width == 0 || width > kMaxWidth) {
      Fail(at, fmt::format("width {} outside [1, {}]", width, kMaxWidth));
    }
    return static_cast<unsigned>(width);
  }

  // `UInt<w>`; the leading identifier has already been checked.
  unsigned UIntType() {
    ExpectKeyword("UInt");
    Expect(Tok::kLt);
    unsigned width = Width();
    Expect(Tok::kGt);
    return width;
  }

  LiteralExpr LiteralValue() {
    unsigned width = UIntType();
    Expect(Tok::kLParen);
    std::uint64_t value = Number();
    Expect(Tok::kRParen);
    return LiteralExpr{value, width};
  }

  ExprRef ParseExpr() {
    const Token& tok = Peek();
    if (tok.kind != Tok::kIdent) Fail(tok, "expected expression");
    if (tok.text == "UInt" && Peek(1).kind == Tok::kLt) {
      LiteralExpr lit = LiteralValue();
      return Literal(lit.value, lit.width);
    }
    if (Peek(1).kind != Tok::kLParen) {
      return Ref(std::string(Take().text));
    }
    Token op = Take();
    Take();  // (
    std::vector<ExprRef> args;
    args.push_back(ParseExpr());
    while (Peek().kind == Tok::kComma) {
      Take();
      args.push_back(ParseExpr());
    }
    Expect(Tok::kRParen);

    auto arity = [&](std::size_t n) {
      if (args.size() != n) {
        Fail(op, fmt::format("'{}' takes {} operand(s), got {}", op.text, n,
                             args.size()));
      }
    };
    if (op.text == "mux") {
      arity(3);
      return Mux(args[0], args[1], args[2]);
    }
    if (op.text == OpName(UnaryOp::kNot)) {
      arity(1);
      return Not(args[0]);
    }
    for (BinaryOp bop : {BinaryOp::kAnd, BinaryOp::kOr, BinaryOp::kXor,
                         BinaryOp::kAdd, BinaryOp::kSub, BinaryOp::kEq,
                         BinaryOp::kNeq, BinaryOp::kLt, BinaryOp::kGt,
                         BinaryOp::kLeq, BinaryOp::kGeq}) {
      if (op.text == OpName(bop)) {
        arity(2);
        return Binary(bop, args[0], args[1]);
      }
    }
    Fail(op, fmt::format("unknown operator '{}'", op.text));
  }

  int line() const { return line_; }

 private:
  void Tokenize(std::string_view text, int indent) {
    std::size_t i = 0;
    auto column = [&](std::size_t at) { return indent + static_cast<int>(at) + 1; };
    while (i < text.size()) {
      char c = text[i];
      if (c == ' ') {
        ++i;
        continue;
      }
      std::size_t start = i;
      if (IsIdentStart(c)) {
        while (i < text.size() && IsIdentChar(text[i])) ++i;
        tokens_.push_back({Tok::kIdent, text.substr(start, i - start),
                           column(start)});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        while (i < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i]))) {
          ++i;
        }
        tokens_.push_back({Tok::kNumber, text.substr(start, i - start),
                           column(start)});
        continue;
      }
      Tok kind;
      std::size_t len = 1;
      switch (c) {
        case '(': kind = Tok::kLParen; break;
        case ')': kind = Tok::kRParen; break;
        case ',': kind = Tok::kComma; break;
        case ':': kind = Tok::kColon; break;
        case '>': kind = Tok::kGt; break;
        case '<':
          if (i + 1 < text.size() && text[i + 1] == '=') {
            kind = Tok::kConnect;
            len = 2;
          } else {
            kind = Tok::kLt;
          }
          break;
        default:
          throw ParseError(ErrorCode::kSyntax, line_, column(start),
                           fmt::format("unexpected character '{}'", c));
      }
      tokens_.push_back({kind, text.substr(start, len), column(start)});
      i += len;
    }
    tokens_.push_back({Tok::kEnd, {}, column(text.size())});
  }

  int line_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void ParseStatement(LineParser& p, ModuleDef& module) {
  const Token& first = p.Peek();
  if (first.kind != Tok::kIdent) p.Fail(first, "expected statement");
  int line = p.line();

  if (p.Peek(1).kind == Tok::kConnect) {
    std::string target(p.Take().text);
    p.Take();
    ExprRef expr = p.ParseExpr();
    p.ExpectEnd();
    module.assignments.push_back({std::move(target), std::move(expr), line});
    return;
  }

  std::string_view keyword = first.text;
  if (keyword == "input" || keyword == "output") {
    p.Take();
    Port port;
    port.direction =
        keyword == "input" ? Direction::kInput : Direction::kOutput;
    port.name = std::string(p.Expect(Tok::kIdent).text);
    p.Expect(Tok::kColon);
    const Token& type = p.Peek();
    if (type.kind == Tok::kIdent && type.text == "Clock") {
      p.Take();
      port.kind = PortKind::kClock;
      port.width = 1;
    } else if (type.kind == Tok::kIdent && type.text == "UInt") {
      port.width = p.UIntType();
    } else {
      p.Fail(type, "expected 'UInt<w>' or 'Clock'");
    }
    p.ExpectEnd();
    port.line = line;
    module.ports.push_back(std::move(port));
    return;
  }
  if (keyword == "wire") {
    p.Take();
    Wire wire;
    wire.name = std::string(p.Expect(Tok::kIdent).text);
    p.Expect(Tok::kColon);
    wire.width = p.UIntType();
    p.ExpectEnd();
    wire.line = line;
    module.wires.push_back(std::move(wire));
    return;
  }
  if (keyword == "reg") {
    p.Take();
    Register reg;
    reg.name = std::string(p.Expect(Tok::kIdent).text);
    p.Expect(Tok::kColon);
    reg.width = p.UIntType();
    p.Expect(Tok::kComma);
    p.ExpectKeyword("reset");
    reg.reset = p.LiteralValue();
    p.ExpectEnd();
    reg.line = line;
    module.registers.push_back(std::move(reg));
    return;
  }
  p.Fail(first, fmt::format("unknown statement '{}'", keyword));
}

}  // namespace

Circuit ParseCircuit(std::string_view text) {
  Circuit circuit;
  bool have_circuit = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (auto comment = raw.find(';'); comment != std::string_view::npos) {
      raw = raw.substr(0, comment);
    }
    std::size_t indent = 0;
    while (indent < raw.size() && raw[indent] == ' ') ++indent;
    if (indent < raw.size() && raw[indent] == '\t') {
      throw ParseError(ErrorCode::kSyntax, line_no, static_cast<int>(indent) + 1,
                       "tabs are not allowed for indentation");
    }
    std::string_view body = raw.substr(indent);
    while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
    if (body.empty()) continue;

    LineParser p(body, line_no, static_cast<int>(indent));
    auto fail_indent = [&](std::string_view what) {
      throw ParseError(ErrorCode::kSyntax, line_no, static_cast<int>(indent) + 1,
                       fmt::format("{} (indentation {})", what, indent));
    };
    if (indent == 0) {
      if (have_circuit) fail_indent("only one circuit per file");
      p.ExpectKeyword("circuit");
      circuit.name = std::string(p.Expect(Tok::kIdent).text);
      p.Expect(Tok::kColon);
      p.ExpectEnd();
      have_circuit = true;
    } else if (indent == 2) {
      if (!have_circuit) fail_indent("module outside of a circuit");
      p.ExpectKeyword("module");
      ModuleDef module;
      module.name = std::string(p.Expect(Tok::kIdent).text);
      p.Expect(Tok::kColon);
      p.ExpectEnd();
      circuit.modules.push_back(std::move(module));
    } else if (indent == 4) {
      if (circuit.modules.empty()) fail_indent("statement outside of a module");
      ParseStatement(p, circuit.modules.back());
    } else {
      fail_indent("unexpected indentation");
    }
  }
  if (!have_circuit) {
    throw ParseError(ErrorCode::kSyntax, line_no, 1, "missing 'circuit' header");
  }

  std::vector<Diagnostic> diagnostics = Validate(circuit);
  if (!diagnostics.empty()) {
    const Diagnostic& d = diagnostics.front();
    throw ParseError(ErrorCode::kValidation, d.line, 1,
                     fmt::format("{}: {}: {}", d.rule, d.location, d.message));
  }
  return circuit;
}

}  // namespace hwv::ir
