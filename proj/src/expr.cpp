// Copyright 2026 The privflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privflow/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "privflow/error.hpp"

namespace privflow {

// ---------------------------------------------------------------------------
// Lexer

namespace {

const std::set<std::string, std::less<>> kKeywords = {"let", "in", "if", "then", "else", "true", "false", "msg"};

const std::map<std::string, std::size_t, std::less<>> kBuiltins = {
    {"len", 1}, {"abs", 1}, {"min", 2}, {"max", 2}, {"round", 1}, {"contains", 2}, {"coalesce", 2},
};

enum class Tok { end, integer, number, string, ident, keyword, op };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourcePos pos;
  std::int64_t integer = 0;
  double number = 0;
};

[[noreturn]] void syntax(SourcePos pos, const std::string& message) {
  throw Error(Errc::syntax_error, std::to_string(pos.line) + ":" + std::to_string(pos.col), message);
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[i_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number(t);
      } else if (ident_start(c)) {
        while (i_ < src_.size() && ident_char(src_[i_])) t.text += advance();
        t.kind = kKeywords.count(t.text) ? Tok::keyword : Tok::ident;
      } else if (c == '"') {
        lex_string(t);
      } else {
        static const std::vector<std::string> kOps = {"||", "&&", "==", "!=", "<=", ">=", "<", ">", "+", "-",
                                                      "*",  "/",  "%",  "!",  "(",  ")",  "{", "}", "[", "]",
                                                      ",",  ":",  ".",  "="};
        for (const auto& op : kOps) {
          if (src_.compare(i_, op.size(), op) == 0) {
            t.kind = Tok::op;
            t.text = op;
            for (std::size_t k = 0; k < op.size(); ++k) advance();
            break;
          }
        }
        if (t.kind != Tok::op) syntax(t.pos, std::string("unexpected character '") + c + "'");
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    const char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (i_ < src_.size()) {
      const char c = src_[i_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  bool digit_at(std::size_t k) const {
    return k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]));
  }

  void lex_number(Token& t) {
    const std::size_t start = i_;
    bool real = false;
    while (digit_at(i_)) advance();
    if (i_ < src_.size() && src_[i_] == '.' && digit_at(i_ + 1)) {
      real = true;
      advance();
      while (digit_at(i_)) advance();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      real = true;
      advance();
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-')) advance();
      if (!digit_at(i_)) syntax({line_, col_}, "exponent needs digits");
      while (digit_at(i_)) advance();
    }
    t.text = src_.substr(start, i_ - start);
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (real) {
      t.kind = Tok::number;
      auto [p, ec] = std::from_chars(first, last, t.number);
      if (ec != std::errc() || p != last || !std::isfinite(t.number)) syntax(t.pos, "number literal out of range");
    } else {
      t.kind = Tok::integer;
      auto [p, ec] = std::from_chars(first, last, t.integer);
      if (ec != std::errc() || p != last) syntax(t.pos, "integer literal out of range");
    }
  }

  void lex_string(Token& t) {
    t.kind = Tok::string;
    advance();
    for (;;) {
      if (i_ >= src_.size()) syntax(t.pos, "unterminated string");
      const SourcePos at{line_, col_};
      const char c = advance();
      if (c == '"') return;
      if (c == '\n') syntax(t.pos, "newline in string");
      if (c != '\\') {
        t.text += c;
        continue;
      }
      if (i_ >= src_.size()) syntax(t.pos, "unterminated string");
      switch (advance()) {
        case '"': t.text += '"'; break;
        case '\\': t.text += '\\'; break;
        case 'n': t.text += '\n'; break;
        case 't': t.text += '\t'; break;
        case 'r': t.text += '\r'; break;
        default: syntax(at, "unknown escape");
      }
    }
  }

  const std::string& src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

std::shared_ptr<Expr> node(ExprKind kind, SourcePos pos) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->pos = pos;
  return e;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr program() {
    auto e = expr();
    if (peek().kind != Tok::end) unexpected("end of input");
    return e;
  }

 private:
  const Token& peek() const { return toks_[k_]; }
  const Token& take() { return toks_[k_ == toks_.size() - 1 ? k_ : k_++]; }

  bool is_op(const char* op) const { return peek().kind == Tok::op && peek().text == op; }
  bool is_kw(const char* kw) const { return peek().kind == Tok::keyword && peek().text == kw; }

  [[noreturn]] void unexpected(const std::string& wanted) const {
    const auto& t = peek();
    const std::string got = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    syntax(t.pos, "expected " + wanted + ", found " + got);
  }

  void expect_op(const char* op) {
    if (!is_op(op)) unexpected(std::string("'") + op + "'");
    take();
  }

  void expect_kw(const char* kw) {
    if (!is_kw(kw)) unexpected(std::string("'") + kw + "'");
    take();
  }

  ExprPtr expr() {
    if (is_kw("let")) {
      auto e = node(ExprKind::let, take().pos);
      if (peek().kind != Tok::ident) unexpected("a variable name");
      e->text = take().text;
      expect_op("=");
      e->kids.push_back(expr());
      expect_kw("in");
      e->kids.push_back(expr());
      return e;
    }
    if (is_kw("if")) {
      auto e = node(ExprKind::cond, take().pos);
      e->kids.push_back(expr());
      expect_kw("then");
      e->kids.push_back(expr());
      expect_kw("else");
      e->kids.push_back(expr());
      return e;
    }
    return disjunction();
  }

  ExprPtr binary(ExprPtr lhs, const Token& op, ExprPtr rhs) {
    auto e = node(ExprKind::binary, op.pos);
    e->text = op.text;
    e->kids = {std::move(lhs), std::move(rhs)};
    return e;
  }

  ExprPtr disjunction() {
    auto lhs = conjunction();
    while (is_op("||")) {
      const Token op = take();
      lhs = binary(lhs, op, conjunction());
    }
    return lhs;
  }

  ExprPtr conjunction() {
    auto lhs = comparison();
    while (is_op("&&")) {
      const Token op = take();
      lhs = binary(lhs, op, comparison());
    }
    return lhs;
  }

  bool at_comparison() const {
    return is_op("==") || is_op("!=") || is_op("<") || is_op("<=") || is_op(">") || is_op(">=");
  }

  ExprPtr comparison() {
    auto lhs = additive();
    if (at_comparison()) {
      const Token op = take();
      lhs = binary(lhs, op, additive());
      if (at_comparison()) syntax(peek().pos, "comparisons do not chain; add parentheses");
    }
    return lhs;
  }

  ExprPtr additive() {
    auto lhs = multiplicative();
    while (is_op("+") || is_op("-")) {
      const Token op = take();
      lhs = binary(lhs, op, multiplicative());
    }
    return lhs;
  }

  ExprPtr multiplicative() {
    auto lhs = unary();
    while (is_op("*") || is_op("/") || is_op("%")) {
      const Token op = take();
      lhs = binary(lhs, op, unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    if (is_op("-") || is_op("!")) {
      const Token op = take();
      auto e = node(ExprKind::unary, op.pos);
      e->text = op.text;
      e->kids.push_back(unary());
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    auto e = primary();
    while (is_op(".")) {
      const Token dot = take();
      const Token& name = peek();
      if (name.kind != Tok::ident && name.kind != Tok::keyword && name.kind != Tok::string) {
        unexpected("a field name");
      }
      auto f = node(ExprKind::field, dot.pos);
      f->text = take().text;
      f->kids.push_back(std::move(e));
      e = std::move(f);
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::integer: {
        auto e = node(ExprKind::int_lit, t.pos);
        e->integer = take().integer;
        return e;
      }
      case Tok::number: {
        auto e = node(ExprKind::num_lit, t.pos);
        e->number = take().number;
        return e;
      }
      case Tok::string: {
        auto e = node(ExprKind::str_lit, t.pos);
        e->text = take().text;
        return e;
      }
      case Tok::keyword:
        if (t.text == "true" || t.text == "false") {
          auto e = node(ExprKind::bool_lit, t.pos);
          e->boolean = take().text == "true";
          return e;
        }
        if (t.text == "msg") return node(ExprKind::msg, take().pos);
        if (t.text == "let" || t.text == "if") return expr();
        unexpected("an expression");
      case Tok::ident: {
        const Token name = take();
        if (!is_op("(")) {
          auto e = node(ExprKind::var, name.pos);
          e->text = name.text;
          return e;
        }
        auto it = kBuiltins.find(name.text);
        if (it == kBuiltins.end()) syntax(name.pos, "unknown function " + name.text);
        take();
        auto e = node(ExprKind::call, name.pos);
        e->text = name.text;
        if (!is_op(")")) {
          e->kids.push_back(expr());
          while (is_op(",")) {
            take();
            e->kids.push_back(expr());
          }
        }
        expect_op(")");
        if (e->kids.size() != it->second) {
          syntax(name.pos, name.text + " takes " + std::to_string(it->second) + " argument(s)");
        }
        return e;
      }
      case Tok::op:
        if (t.text == "(") {
          take();
          auto e = expr();
          expect_op(")");
          return e;
        }
        if (t.text == "{") return object();
        if (t.text == "[") {
          auto e = node(ExprKind::array, take().pos);
          if (!is_op("]")) {
            e->kids.push_back(expr());
            while (is_op(",")) {
              take();
              e->kids.push_back(expr());
            }
          }
          expect_op("]");
          return e;
        }
        unexpected("an expression");
      case Tok::end:
        unexpected("an expression");
    }
    unexpected("an expression");
  }

  ExprPtr object() {
    auto e = node(ExprKind::object, take().pos);
    std::set<std::string> seen;
    if (!is_op("}")) {
      for (;;) {
        const Token& key = peek();
        if (key.kind != Tok::ident && key.kind != Tok::keyword && key.kind != Tok::string) {
          unexpected("a field name");
        }
        if (!seen.insert(key.text).second) syntax(key.pos, "duplicate field " + key.text);
        e->keys.push_back(take().text);
        expect_op(":");
        e->kids.push_back(expr());
        if (!is_op(",")) break;
        take();
      }
    }
    expect_op("}");
    return e;
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
};

bool plain_name(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), ident_char);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string name_text(const std::string& s) { return plain_name(s) ? s : quote(s); }

std::string number_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

ExprPtr parse_expr(const std::string& source) {
  return Parser(Lexer(source).run()).program();
}

bool is_builtin(const std::string& name) { return kBuiltins.count(name) != 0; }

bool same_ast(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.boolean != b.boolean || a.integer != b.integer || a.text != b.text ||
      a.keys != b.keys || a.kids.size() != b.kids.size()) {
    return false;
  }
  if (a.kind == ExprKind::num_lit && !(a.number == b.number && std::signbit(a.number) == std::signbit(b.number))) {
    return false;
  }
  for (std::size_t i = 0; i < a.kids.size(); ++i) {
    if (!same_ast(*a.kids[i], *b.kids[i])) return false;
  }
  return true;
}

std::string pretty_print(const Expr& e) {
  switch (e.kind) {
    case ExprKind::bool_lit: return e.boolean ? "true" : "false";
    case ExprKind::int_lit: return std::to_string(e.integer);
    case ExprKind::num_lit: return number_text(e.number);
    case ExprKind::str_lit: return quote(e.text);
    case ExprKind::msg: return "msg";
    case ExprKind::var: return e.text;
    case ExprKind::field: return pretty_print(*e.kids[0]) + "." + name_text(e.text);
    case ExprKind::let:
      return "(let " + e.text + " = " + pretty_print(*e.kids[0]) + " in " + pretty_print(*e.kids[1]) + ")";
    case ExprKind::cond:
      return "(if " + pretty_print(*e.kids[0]) + " then " + pretty_print(*e.kids[1]) + " else " +
             pretty_print(*e.kids[2]) + ")";
    case ExprKind::unary: return "(" + e.text + pretty_print(*e.kids[0]) + ")";
    case ExprKind::binary:
      return "(" + pretty_print(*e.kids[0]) + " " + e.text + " " + pretty_print(*e.kids[1]) + ")";
    case ExprKind::call: {
      std::string out = e.text + "(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) out += (i ? ", " : "") + pretty_print(*e.kids[i]);
      return out + ")";
    }
    case ExprKind::object: {
      std::string out = "{";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        out += (i ? ", " : "") + name_text(e.keys[i]) + ": " + pretty_print(*e.kids[i]);
      }
      return out + "}";
    }
    case ExprKind::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.kids.size(); ++i) out += (i ? ", " : "") + pretty_print(*e.kids[i]);
      return out + "]";
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Types

bool operator==(const ExprType& a, const ExprType& b) {
  return a.tag == b.tag && a.elems == b.elems && a.fields == b.fields;
}

ExprType schema_to_type(const Schema& s) {
  ExprType t;
  switch (s.kind) {
    case Kind::boolean: t.tag = ExprType::Tag::Bool; break;
    case Kind::integer: t.tag = ExprType::Tag::Int; break;
    case Kind::number: t.tag = ExprType::Tag::Num; break;
    case Kind::string: t.tag = ExprType::Tag::Str; break;
    case Kind::array:
      t.tag = ExprType::Tag::Arr;
      t.elems.push_back(schema_to_type(s.item()));
      break;
    case Kind::object:
      t.tag = ExprType::Tag::Obj;
      for (const auto& p : s.properties) {
        t.fields.push_back(FieldType{p.name, !s.is_required(p.name), schema_to_type(p.schema)});
      }
      break;
    case Kind::union_of:
      t.tag = ExprType::Tag::Union;
      for (const auto& a : s.arms) t.elems.push_back(schema_to_type(a));
      break;
  }
  return t;
}

Schema type_to_schema(const ExprType& t) {
  switch (t.tag) {
    case ExprType::Tag::Bool: return Schema::boolean();
    case ExprType::Tag::Int: return Schema::integer();
    case ExprType::Tag::Num: return Schema::number();
    case ExprType::Tag::Str: return Schema::string();
    case ExprType::Tag::Arr: return Schema::array(type_to_schema(t.elems.front()));
    case ExprType::Tag::Obj: {
      std::vector<Property> props;
      std::vector<std::string> required;
      for (const auto& f : t.fields) {
        props.push_back(Property{f.name, type_to_schema(f.type)});
        if (!f.optional) required.push_back(f.name);
      }
      return Schema::object(std::move(props), std::move(required));
    }
    case ExprType::Tag::Union: {
      std::vector<Schema> arms;
      for (const auto& a : t.elems) arms.push_back(type_to_schema(a));
      return Schema::any_of(std::move(arms));
    }
  }
  return Schema::boolean();
}

std::string to_string(const ExprType& t) {
  switch (t.tag) {
    case ExprType::Tag::Bool: return "Bool";
    case ExprType::Tag::Int: return "Int";
    case ExprType::Tag::Num: return "Num";
    case ExprType::Tag::Str: return "Str";
    case ExprType::Tag::Arr: return "Arr(" + to_string(t.elems.front()) + ")";
    case ExprType::Tag::Obj: {
      std::string out = "Obj{";
      for (std::size_t i = 0; i < t.fields.size(); ++i) {
        const auto& f = t.fields[i];
        out += (i ? ", " : "") + f.name + (f.optional ? "?" : "") + ": " + to_string(f.type);
      }
      return out + "}";
    }
    case ExprType::Tag::Union: {
      std::string out = "Union(";
      for (std::size_t i = 0; i < t.elems.size(); ++i) out += (i ? " | " : "") + to_string(t.elems[i]);
      return out + ")";
    }
  }
  return "?";
}

Value diagnostic_to_json(const ExprDiagnostic& d) {
  return Value{{"line", d.line}, {"col", d.col}, {"code", d.code}, {"message", d.message}};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53

bool is_num(const Schema& s) { return s.kind == Kind::integer || s.kind == Kind::number; }

double lo_of(const Schema& s) { return s.minimum.value_or(-kInf); }
double hi_of(const Schema& s) { return s.maximum.value_or(kInf); }

/// A numeric schema from a computed interval. Bounds that are not finite
/// (or, for integers, not exactly representable) are dropped.
Schema interval(Kind kind, double lo, double hi) {
  Schema s = kind == Kind::integer ? Schema::integer() : Schema::number();
  auto keep = [&](double b) {
    if (!std::isfinite(b)) return false;
    return kind != Kind::integer || std::fabs(b) <= kMaxExactInt;
  };
  if (keep(lo)) s.minimum = kind == Kind::integer ? std::ceil(lo) : lo;
  if (keep(hi)) s.maximum = kind == Kind::integer ? std::floor(hi) : hi;
  if (s.minimum && s.maximum && *s.minimum > *s.maximum) {
    // Only reachable through rounding at the edges; stay sound.
    s.minimum.reset();
    s.maximum.reset();
  }
  return s;
}

double mul_bound(double a, double b) {
  if (a == 0 || b == 0) return 0;
  return a * b;
}

/// Least schema covering both, keeping shapes merged where the language
/// needs them (numeric hulls, enum unions); otherwise a union.
Schema widen(const Schema& a, const Schema& b) {
  if (a == b) return a;
  if (is_num(a) && is_num(b)) {
    const Kind k = a.kind == Kind::integer && b.kind == Kind::integer ? Kind::integer : Kind::number;
    Schema s = k == Kind::integer ? Schema::integer() : Schema::number();
    if (a.minimum && b.minimum) s.minimum = std::min(*a.minimum, *b.minimum);
    if (a.maximum && b.maximum) s.maximum = std::max(*a.maximum, *b.maximum);
    return s;
  }
  if (a.kind == b.kind) {
    switch (a.kind) {
      case Kind::boolean: return a;
      case Kind::string: {
        if (!a.enumeration || !b.enumeration) return Schema::string();
        auto values = *a.enumeration;
        for (const auto& v : *b.enumeration) {
          if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
        }
        return Schema::string_enum(std::move(values));
      }
      case Kind::array: {
        const bool a_empty = a.max_len && *a.max_len == 0;
        const bool b_empty = b.max_len && *b.max_len == 0;
        Schema item = a_empty ? b.item() : b_empty ? a.item() : widen(a.item(), b.item());
        std::optional<std::uint64_t> lo;
        if (a.min_len && b.min_len) lo = std::min(*a.min_len, *b.min_len);
        std::optional<std::uint64_t> hi;
        if (a.max_len && b.max_len) hi = std::max(*a.max_len, *b.max_len);
        return Schema::array(std::move(item), lo, hi);
      }
      case Kind::object: {
        if (a.required == b.required && a.properties.size() == b.properties.size()) {
          std::vector<Property> props;
          bool same_names = true;
          for (std::size_t i = 0; i < a.properties.size(); ++i) {
            if (a.properties[i].name != b.properties[i].name) {
              same_names = false;
              break;
            }
            props.push_back(Property{a.properties[i].name, widen(a.properties[i].schema, b.properties[i].schema)});
          }
          if (same_names) return Schema::object(std::move(props), a.required);
        }
        break;
      }
      default: break;
    }
  }
  return join(a, b);
}

bool comparable(const Schema& a, const Schema& b) {
  if (is_num(a) && is_num(b)) return true;
  return a.kind == b.kind && a.kind != Kind::union_of;
}

std::string shape(const Schema& s) { return to_string(schema_to_type(s)); }

class Typer {
 public:
  explicit Typer(ArmTyping& arm) : arm_(arm) {}

  std::vector<ExprDiagnostic> diagnostics;

  std::optional<Schema> type(const Expr& e) {
    auto t = infer(e);
    if (t) arm_.types[&e] = *t;
    return t;
  }

 private:
  void error(const Expr& e, std::string message) {
    diagnostics.push_back(ExprDiagnostic{e.pos.line, e.pos.col, "type-error", std::move(message)});
  }

  std::optional<Schema> fail(const Expr& e, std::string message) {
    error(e, std::move(message));
    return std::nullopt;
  }

  // Field lookup; `optional_ok` is set inside coalesce's first argument.
  std::optional<Schema> field(const Expr& e, bool optional_ok) {
    auto target = type(*e.kids[0]);
    if (!target) return std::nullopt;
    if (target->kind != Kind::object) {
      return fail(e, "field access ." + e.text + " on " + shape(*target));
    }
    const Schema* p = target->property(e.text);
    if (!p) return fail(e, shape(*target) + " has no field " + e.text);
    if (!optional_ok && !target->is_required(e.text)) {
      return fail(e, "field " + e.text + " is optional; use coalesce(" + pretty_print(e) + ", default)");
    }
    return *p;
  }

  std::optional<Schema> numeric_unary(const Expr& e, const Schema& x) {
    if (!is_num(x)) return fail(e, "operator " + e.text + " needs Int or Num, found " + shape(x));
    return interval(x.kind, -hi_of(x), -lo_of(x));
  }

  std::optional<Schema> arithmetic(const Expr& e, const Schema& a, const Schema& b) {
    const auto& op = e.text;
    if (op == "+" && a.kind == Kind::string && b.kind == Kind::string) return Schema::string();
    if (!is_num(a) || !is_num(b)) {
      return fail(e, "operator " + op + " needs Int or Num operands, found " + shape(a) + " and " + shape(b));
    }
    const Kind k = a.kind == Kind::integer && b.kind == Kind::integer ? Kind::integer : Kind::number;
    const double a1 = lo_of(a), a2 = hi_of(a), b1 = lo_of(b), b2 = hi_of(b);
    if (op == "+") return interval(k, a1 + b1, a2 + b2);
    if (op == "-") return interval(k, a1 - b2, a2 - b1);
    if (op == "*") {
      const double c[] = {mul_bound(a1, b1), mul_bound(a1, b2), mul_bound(a2, b1), mul_bound(a2, b2)};
      return interval(k, *std::min_element(c, c + 4), *std::max_element(c, c + 4));
    }
    if (op == "/") {
      if (b1 <= 0 && b2 >= 0) return interval(k, -kInf, kInf);
      const double c[] = {a1 / b1, a1 / b2, a2 / b1, a2 / b2};
      if (std::any_of(c, c + 4, [](double x) { return std::isnan(x); })) return interval(k, -kInf, kInf);
      double lo = *std::min_element(c, c + 4);
      double hi = *std::max_element(c, c + 4);
      if (k == Kind::integer) {
        lo = std::trunc(lo);
        hi = std::trunc(hi);
      }
      return interval(k, lo, hi);
    }
    // %
    if (k != Kind::integer) return fail(e, "operator % needs Int operands, found " + shape(a) + " and " + shape(b));
    double m = std::max(std::fabs(b1), std::fabs(b2)) - 1;
    m = std::min(m, std::max(std::fabs(a1), std::fabs(a2)));
    return interval(Kind::integer, a1 >= 0 ? 0 : -m, a2 <= 0 ? 0 : m);
  }

  std::optional<Schema> call(const Expr& e) {
    const auto& f = e.text;
    if (f == "coalesce") {
      const Expr& first = *e.kids[0];
      std::optional<Schema> a = first.kind == ExprKind::field ? field(first, true) : infer(first);
      if (a) arm_.types[&first] = *a;
      auto b = type(*e.kids[1]);
      if (!a || !b) return std::nullopt;
      return widen(*a, *b);
    }
    std::vector<Schema> args;
    for (const auto& k : e.kids) {
      auto t = type(*k);
      if (!t) return std::nullopt;
      args.push_back(std::move(*t));
    }
    const Schema& x = args[0];
    if (f == "len") {
      if (x.kind == Kind::array) {
        return interval(Kind::integer, static_cast<double>(x.min_len.value_or(0)),
                        x.max_len ? static_cast<double>(*x.max_len) : kInf);
      }
      if (x.kind == Kind::string) return interval(Kind::integer, 0, kInf);
      return fail(e, "len needs an Arr or Str, found " + shape(x));
    }
    if (f == "abs") {
      if (!is_num(x)) return fail(e, "abs needs Int or Num, found " + shape(x));
      const double lo = lo_of(x), hi = hi_of(x);
      if (lo >= 0) return interval(x.kind, lo, hi);
      if (hi <= 0) return interval(x.kind, -hi, -lo);
      return interval(x.kind, 0, std::max(-lo, hi));
    }
    if (f == "round") {
      if (!is_num(x)) return fail(e, "round needs Int or Num, found " + shape(x));
      return interval(Kind::integer, std::round(lo_of(x)), std::round(hi_of(x)));
    }
    if (f == "min" || f == "max") {
      const Schema& y = args[1];
      if (!is_num(x) || !is_num(y)) {
        return fail(e, f + " needs Int or Num operands, found " + shape(x) + " and " + shape(y));
      }
      const Kind k = x.kind == Kind::integer && y.kind == Kind::integer ? Kind::integer : Kind::number;
      if (f == "min") return interval(k, std::min(lo_of(x), lo_of(y)), std::min(hi_of(x), hi_of(y)));
      return interval(k, std::max(lo_of(x), lo_of(y)), std::max(hi_of(x), hi_of(y)));
    }
    // contains
    const Schema& y = args[1];
    if (x.kind == Kind::string && y.kind == Kind::string) return Schema::boolean();
    if (x.kind == Kind::array) {
      const bool empty = x.max_len && *x.max_len == 0;
      if (empty || comparable(x.item(), y)) return Schema::boolean();
      return fail(e, "contains: cannot look for " + shape(y) + " in " + shape(x));
    }
    return fail(e, "contains needs an Arr or Str, found " + shape(x));
  }

  std::optional<Schema> infer(const Expr& e) {
    switch (e.kind) {
      case ExprKind::bool_lit: return Schema::boolean();
      case ExprKind::int_lit:
        return interval(Kind::integer, static_cast<double>(e.integer), static_cast<double>(e.integer));
      case ExprKind::num_lit: return Schema::number(e.number, e.number);
      case ExprKind::str_lit: return Schema::string_enum({e.text});
      case ExprKind::msg: return arm_.input;
      case ExprKind::var: {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it) {
          if (it->first == e.text) return it->second;
        }
        return fail(e, "unbound variable " + e.text);
      }
      case ExprKind::field: return field(e, false);
      case ExprKind::let: {
        auto v = type(*e.kids[0]);
        if (!v) return std::nullopt;
        env_.emplace_back(e.text, *v);
        auto body = type(*e.kids[1]);
        env_.pop_back();
        return body;
      }
      case ExprKind::cond: {
        auto c = type(*e.kids[0]);
        auto a = type(*e.kids[1]);
        auto b = type(*e.kids[2]);
        if (c && c->kind != Kind::boolean) return fail(*e.kids[0], "condition must be Bool, found " + shape(*c));
        if (!c || !a || !b) return std::nullopt;
        return widen(*a, *b);
      }
      case ExprKind::unary: {
        auto x = type(*e.kids[0]);
        if (!x) return std::nullopt;
        if (e.text == "!") {
          if (x->kind != Kind::boolean) return fail(e, "operator ! needs Bool, found " + shape(*x));
          return Schema::boolean();
        }
        return numeric_unary(e, *x);
      }
      case ExprKind::binary: {
        auto a = type(*e.kids[0]);
        auto b = type(*e.kids[1]);
        if (!a || !b) return std::nullopt;
        const auto& op = e.text;
        if (op == "&&" || op == "||") {
          if (a->kind != Kind::boolean || b->kind != Kind::boolean) {
            return fail(e, "operator " + op + " needs Bool operands, found " + shape(*a) + " and " + shape(*b));
          }
          return Schema::boolean();
        }
        if (op == "==" || op == "!=") {
          if (!comparable(*a, *b)) return fail(e, "cannot compare " + shape(*a) + " with " + shape(*b));
          return Schema::boolean();
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
          const bool ok = (is_num(*a) && is_num(*b)) || (a->kind == Kind::string && b->kind == Kind::string);
          if (!ok) return fail(e, "cannot order " + shape(*a) + " and " + shape(*b));
          return Schema::boolean();
        }
        return arithmetic(e, *a, *b);
      }
      case ExprKind::call: return call(e);
      case ExprKind::object: {
        std::vector<Property> props;
        bool ok = true;
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
          auto t = type(*e.kids[i]);
          if (!t) {
            ok = false;
            continue;
          }
          props.push_back(Property{e.keys[i], std::move(*t)});
        }
        if (!ok) return std::nullopt;
        return Schema::object(std::move(props), e.keys);
      }
      case ExprKind::array: {
        if (e.kids.empty()) return Schema::array(Schema::boolean(), std::uint64_t{0}, std::uint64_t{0});
        std::optional<Schema> item;
        bool ok = true;
        for (const auto& k : e.kids) {
          auto t = type(*k);
          if (!t) {
            ok = false;
            continue;
          }
          item = item ? widen(*item, *t) : *t;
        }
        if (!ok) return std::nullopt;
        const auto n = static_cast<std::uint64_t>(e.kids.size());
        return Schema::array(std::move(*item), n, n);
      }
    }
    return std::nullopt;
  }

  ArmTyping& arm_;
  std::vector<std::pair<std::string, Schema>> env_;
};

std::string mismatch(const Schema& got, const Schema& want) {
  auto a = shape(got);
  auto b = shape(want);
  if (a == b) {
    a = describe(got);
    b = describe(want);
  }
  return a + " ⋢ " + b;
}

}  // namespace

TypedProgram infer_type(const ExprPtr& program, const Schema& input, const std::optional<Schema>& expected) {
  TypedProgram out;
  out.ast = program;
  std::vector<Schema> arms;
  if (input.kind == Kind::union_of) arms = input.arms;
  else arms.push_back(input);

  for (std::size_t i = 0; i < arms.size(); ++i) {
    ArmTyping arm{arms[i], {}};
    Typer typer(arm);
    auto result = typer.type(*program);
    auto diags = std::move(typer.diagnostics);
    if (result && expected) {
      if (auto c = is_subtype(*result, *expected); !c) {
        std::string message = mismatch(*result, *expected);
        if (!c.path.empty() && c.path != ".") message += " at " + c.path;
        diags.push_back(ExprDiagnostic{program->pos.line, program->pos.col, "type-error", std::move(message)});
      }
    }
    if (!diags.empty()) {
      if (arms.size() > 1) {
        for (auto& d : diags) d.message = "input arm " + std::to_string(i) + " (" + describe(arms[i]) + "): " + d.message;
      }
      out.diagnostics = std::move(diags);
      out.arms.clear();
      out.result.reset();
      return out;
    }
    out.result = out.result ? join(*out.result, *result) : *result;
    out.arms.push_back(std::move(arm));
  }
  return out;
}

TypedProgram check_program(const std::string& source, const Schema& input, const std::optional<Schema>& expected) {
  try {
    return infer_type(parse_expr(source), input, expected);
  } catch (const Error& e) {
    if (e.code() != Errc::syntax_error) throw;
    TypedProgram out;
    const auto colon = e.location().find(':');
    ExprDiagnostic d;
    d.line = std::stoi(e.location().substr(0, colon));
    d.col = std::stoi(e.location().substr(colon + 1));
    d.code = "syntax-error";
    const std::string prefix = "syntax-error at " + e.location() + ": ";
    d.message = std::string(e.what()).substr(prefix.size());
    out.diagnostics.push_back(std::move(d));
    return out;
  }
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

class Evaluator {
 public:
  explicit Evaluator(const ArmTyping& arm, const Value& input) : arm_(arm), input_(input) {}

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::bool_lit: return e.boolean;
      case ExprKind::int_lit: return e.integer;
      case ExprKind::num_lit: return e.number;
      case ExprKind::str_lit: return e.text;
      case ExprKind::msg: return input_;
      case ExprKind::var: {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it) {
          if (it->first == e.text) return it->second;
        }
        throw TypeFault("unbound variable " + e.text);
      }
      case ExprKind::field: {
        Value target = eval(*e.kids[0]);
        if (!target.is_object()) throw TypeFault("field access on a non-object");
        auto it = target.find(e.text);
        if (it == target.end()) throw TypeFault("missing field " + e.text);
        return *it;
      }
      case ExprKind::let: {
        env_.emplace_back(e.text, eval(*e.kids[0]));
        Value v = eval(*e.kids[1]);
        env_.pop_back();
        return v;
      }
      case ExprKind::cond: return as_bool(eval(*e.kids[0])) ? eval(*e.kids[1]) : eval(*e.kids[2]);
      case ExprKind::unary: {
        Value x = eval(*e.kids[0]);
        if (e.text == "!") return !as_bool(x);
        if (kind_of(*e.kids[0]) == Kind::integer) {
          const auto v = as_int(x);
          if (v == std::numeric_limits<std::int64_t>::min()) throw EvalError("overflow", "integer overflow in negation");
          return -v;
        }
        return -as_num(x);
      }
      case ExprKind::binary: return binary(e);
      case ExprKind::call: return call(e);
      case ExprKind::object: {
        Value out = Value::object();
        for (std::size_t i = 0; i < e.kids.size(); ++i) out[e.keys[i]] = eval(*e.kids[i]);
        return out;
      }
      case ExprKind::array: {
        Value out = Value::array();
        for (const auto& k : e.kids) out.push_back(eval(*k));
        return out;
      }
    }
    throw TypeFault("unknown node");
  }

 private:
  Kind kind_of(const Expr& e) const {
    auto it = arm_.types.find(&e);
    if (it == arm_.types.end()) throw TypeFault("node was not typed");
    return it->second.kind;
  }

  static bool as_bool(const Value& v) {
    if (!v.is_boolean()) throw TypeFault("expected a boolean, found " + v.dump());
    return v.get<bool>();
  }

  static std::int64_t as_int(const Value& v) {
    if (v.is_number_integer()) {
      if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        throw EvalError("overflow", "integer exceeds 64 bits");
      }
      return v.get<std::int64_t>();
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) != d) throw TypeFault("expected an integer, found " + v.dump());
      if (std::fabs(d) >= 9223372036854775808.0) throw EvalError("overflow", "integer exceeds 64 bits");
      return static_cast<std::int64_t>(d);
    }
    throw TypeFault("expected an integer, found " + v.dump());
  }

  static double as_num(const Value& v) {
    if (!v.is_number()) throw TypeFault("expected a number, found " + v.dump());
    return v.get<double>();
  }

  static Value finite(double x) {
    if (!std::isfinite(x)) throw EvalError("overflow", "number overflow");
    return x;
  }

  bool equal(const Expr& ea, const Value& a, const Expr& eb, const Value& b) const {
    const Kind ka = kind_of(ea);
    const Kind kb = kind_of(eb);
    if (ka == Kind::integer && kb == Kind::integer) return as_int(a) == as_int(b);
    if (is_num_kind(ka) && is_num_kind(kb)) return as_num(a) == as_num(b);
    return a == b;
  }

  static bool is_num_kind(Kind k) { return k == Kind::integer || k == Kind::number; }

  Value binary(const Expr& e) {
    const auto& op = e.text;
    const Expr& ea = *e.kids[0];
    const Expr& eb = *e.kids[1];
    if (op == "&&") return as_bool(eval(ea)) && as_bool(eval(eb));
    if (op == "||") return as_bool(eval(ea)) || as_bool(eval(eb));
    const Value a = eval(ea);
    const Value b = eval(eb);
    if (op == "==") return equal(ea, a, eb, b);
    if (op == "!=") return !equal(ea, a, eb, b);
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      int c;
      if (kind_of(ea) == Kind::string) {
        if (!a.is_string() || !b.is_string()) throw TypeFault("expected strings");
        const auto& x = a.get_ref<const std::string&>();
        const auto& y = b.get_ref<const std::string&>();
        c = x < y ? -1 : (x == y ? 0 : 1);
      } else if (kind_of(ea) == Kind::integer && kind_of(eb) == Kind::integer) {
        const auto x = as_int(a), y = as_int(b);
        c = x < y ? -1 : (x == y ? 0 : 1);
      } else {
        const auto x = as_num(a), y = as_num(b);
        c = x < y ? -1 : (x == y ? 0 : 1);
      }
      if (op == "<") return c < 0;
      if (op == "<=") return c <= 0;
      if (op == ">") return c > 0;
      return c >= 0;
    }
    const Kind k = kind_of(e);
    if (k == Kind::string) {
      if (!a.is_string() || !b.is_string()) throw TypeFault("expected strings");
      return a.get<std::string>() + b.get<std::string>();
    }
    if (k == Kind::integer) {
      const auto x = as_int(a), y = as_int(b);
      std::int64_t r = 0;
      if (op == "+" && __builtin_add_overflow(x, y, &r)) throw EvalError("overflow", "integer overflow in +");
      if (op == "-" && __builtin_sub_overflow(x, y, &r)) throw EvalError("overflow", "integer overflow in -");
      if (op == "*" && __builtin_mul_overflow(x, y, &r)) throw EvalError("overflow", "integer overflow in *");
      if (op == "/" || op == "%") {
        if (y == 0) throw EvalError("division-by-zero", "integer division by zero");
        if (x == std::numeric_limits<std::int64_t>::min() && y == -1) {
          if (op == "/") throw EvalError("overflow", "integer overflow in /");
          return std::int64_t{0};
        }
        r = op == "/" ? x / y : x % y;
      }
      return r;
    }
    const double x = as_num(a), y = as_num(b);
    if (op == "+") return finite(x + y);
    if (op == "-") return finite(x - y);
    if (op == "*") return finite(x * y);
    if (op == "/") {
      if (y == 0) throw EvalError("division-by-zero", "division by zero");
      return finite(x / y);
    }
    throw TypeFault("% on numbers");
  }

  Value call(const Expr& e) {
    const auto& f = e.text;
    if (f == "coalesce") {
      const Expr& first = *e.kids[0];
      if (first.kind == ExprKind::field) {
        Value target = eval(*first.kids[0]);
        if (!target.is_object()) throw TypeFault("field access on a non-object");
        auto it = target.find(first.text);
        if (it != target.end()) return *it;
        return eval(*e.kids[1]);
      }
      return eval(first);
    }
    const Value x = eval(*e.kids[0]);
    if (f == "len") {
      if (x.is_array()) return static_cast<std::int64_t>(x.size());
      if (x.is_string()) return static_cast<std::int64_t>(x.get_ref<const std::string&>().size());
      throw TypeFault("len of " + x.dump());
    }
    if (f == "abs") {
      if (kind_of(*e.kids[0]) == Kind::integer) {
        const auto v = as_int(x);
        if (v == std::numeric_limits<std::int64_t>::min()) throw EvalError("overflow", "integer overflow in abs");
        return v < 0 ? -v : v;
      }
      return std::fabs(as_num(x));
    }
    if (f == "round") {
      if (kind_of(*e.kids[0]) == Kind::integer) return as_int(x);
      const double r = std::round(as_num(x));
      if (!(std::fabs(r) < 9223372036854775808.0)) throw EvalError("overflow", "round result exceeds 64 bits");
      return static_cast<std::int64_t>(r);
    }
    const Value y = eval(*e.kids[1]);
    if (f == "min" || f == "max") {
      if (kind_of(e) == Kind::integer) {
        const auto a = as_int(x), b = as_int(y);
        return f == "min" ? std::min(a, b) : std::max(a, b);
      }
      const auto a = as_num(x), b = as_num(y);
      return f == "min" ? std::min(a, b) : std::max(a, b);
    }
    // contains
    if (x.is_string()) {
      if (!y.is_string()) throw TypeFault("contains on a string needs a string");
      return x.get_ref<const std::string&>().find(y.get_ref<const std::string&>()) != std::string::npos;
    }
    if (!x.is_array()) throw TypeFault("contains on " + x.dump());
    const Schema& item = arm_.types.at(e.kids[0].get()).item();
    const bool numeric = is_num(item) && is_num(arm_.types.at(e.kids[1].get()));
    for (const auto& v : x) {
      if (numeric ? as_num(v) == as_num(y) : v == y) return true;
    }
    return false;
  }

  const ArmTyping& arm_;
  const Value& input_;
  std::vector<std::pair<std::string, Value>> env_;
};

}  // namespace

Value evaluate(const TypedProgram& program, const Value& input, Rng& /*rng*/) {
  if (!program.ok() || !program.ast) throw TypeFault("evaluate needs a well-typed program");
  for (const auto& arm : program.arms) {
    if (validate_value(input, arm.input)) return Evaluator(arm, input).eval(*program.ast);
  }
  throw TypeFault("input does not conform to the program's input schema");
}

// ---------------------------------------------------------------------------
// Skeletons

namespace {

std::string literal_number(double v, bool integral) {
  if (integral && std::fabs(v) <= kMaxExactInt) return std::to_string(static_cast<std::int64_t>(v));
  const std::string text = number_text(std::fabs(v));
  return v < 0 ? "-" + text : text;
}

std::string placeholder(const Schema& s) {
  switch (s.kind) {
    case Kind::boolean: return "false";
    case Kind::integer:
    case Kind::number: {
      double v = 0;
      if (s.minimum && v < *s.minimum) v = *s.minimum;
      if (s.maximum && v > *s.maximum) v = *s.maximum;
      if (s.kind == Kind::integer) v = std::ceil(v);
      return literal_number(v, s.kind == Kind::integer || std::floor(v) == v);
    }
    case Kind::string: return quote(s.enumeration ? s.enumeration->front() : std::string());
    case Kind::array: {
      std::string out = "[";
      for (std::uint64_t i = 0; i < s.min_len.value_or(0); ++i) out += (i ? ", " : "") + placeholder(s.item());
      return out + "]";
    }
    case Kind::object: {
      std::string out = "{";
      for (std::size_t i = 0; i < s.properties.size(); ++i) {
        out += (i ? ", " : "") + name_text(s.properties[i].name) + ": " + placeholder(s.properties[i].schema);
      }
      return out + "}";
    }
    case Kind::union_of: return placeholder(s.arms.front());
  }
  return "false";
}

}  // namespace

std::string generate_skeleton(const Schema& input, const std::optional<Schema>& output) {
  std::string out;
  if (input.kind == Kind::object) {
    std::set<std::string> used = {"msg"};
    for (std::size_t i = 0; i < input.properties.size(); ++i) {
      const auto& p = input.properties[i];
      std::string var = plain_name(p.name) && !kKeywords.count(p.name) ? p.name : "field" + std::to_string(i);
      while (!used.insert(var).second) var += "_";
      const std::string access = "msg." + name_text(p.name);
      if (input.is_required(p.name)) {
        out += "let " + var + " = " + access + " in\n";
      } else {
        out += "let " + var + " = coalesce(" + access + ", " + placeholder(p.schema) + ") in\n";
      }
    }
  } else {
    out += "let value = msg in\n";
  }
  out += output ? placeholder(*output) : std::string("msg");
  return out + "\n";
}

}  // namespace privflow
