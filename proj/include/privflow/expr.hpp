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

#pragma once

// The expression language run by function nodes. Programs are total: no
// loops, no recursion, no I/O. The only runtime failures are division by
// zero and arithmetic overflow.
//
//   expr  := let IDENT = expr in expr | if expr then expr else expr | or
//   or    := and (|| and)*          and := cmp (&& cmp)*
//   cmp   := add [(== != < <= > >=) add]
//   add   := mul ((+ -) mul)*       mul := unary ((* / %) unary)*
//   unary := (- !) unary | post     post := prim (. IDENT | . STRING)*
//   prim  := INT | NUM | STRING | true | false | msg | IDENT
//          | IDENT ( args ) | ( expr ) | { key: expr, ... } | [ expr, ... ]

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "privflow/schema.hpp"
#include "privflow/value.hpp"

namespace privflow {

struct SourcePos {
  int line = 1;
  int col = 1;
};

enum class ExprKind {
  bool_lit,
  int_lit,
  num_lit,
  str_lit,
  msg,
  var,
  field,   // kids[0].text
  let,     // let text = kids[0] in kids[1]
  cond,    // if kids[0] then kids[1] else kids[2]
  unary,   // text is "-" or "!"
  binary,  // text is the operator
  call,    // text is the builtin name
  object,  // keys[i]: kids[i]
  array,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::bool_lit;
  SourcePos pos;
  bool boolean = false;
  std::int64_t integer = 0;  // non-negative; negation is a unary node
  double number = 0;
  std::string text;
  std::vector<ExprPtr> kids;
  std::vector<std::string> keys;
};

/// Structural equality, ignoring source positions.
bool same_ast(const Expr& a, const Expr& b);

/// Throws Error(syntax_error) with location "line:col".
ExprPtr parse_expr(const std::string& source);

/// Fully parenthesized source text; parse_expr(pretty_print(e)) equals e.
std::string pretty_print(const Expr& e);

bool is_builtin(const std::string& name);

// ---------------------------------------------------------------------------
// Types

struct FieldType;

/// Range-erased view of a schema, used in messages and signatures.
struct ExprType {
  enum class Tag { Bool, Int, Num, Str, Arr, Obj, Union };

  Tag tag = Tag::Bool;
  std::vector<ExprType> elems;   // Arr: the item type; Union: the arms
  std::vector<FieldType> fields; // Obj, sorted by name

  friend bool operator==(const ExprType& a, const ExprType& b);
};

struct FieldType {
  std::string name;
  bool optional = false;
  ExprType type;

  friend bool operator==(const FieldType&, const FieldType&) = default;
};

ExprType schema_to_type(const Schema& s);
/// The least-constrained schema of that shape.
Schema type_to_schema(const ExprType& t);
std::string to_string(const ExprType& t);

struct ExprDiagnostic {
  int line = 1;
  int col = 1;
  std::string code;  // syntax-error | type-error
  std::string message;

  friend bool operator==(const ExprDiagnostic&, const ExprDiagnostic&) = default;
};

Value diagnostic_to_json(const ExprDiagnostic& d);

/// Types inferred for one input arm. Node types are keyed by node address.
struct ArmTyping {
  Schema input;
  std::map<const Expr*, Schema> types;
};

struct TypedProgram {
  ExprPtr ast;
  std::vector<ArmTyping> arms;
  std::optional<Schema> result;
  std::vector<ExprDiagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Types `program` against `input`. A union input is checked arm by arm and
/// the first failing arm is reported. With an expected output the result must
/// be a subtype of it; without one any result type is accepted.
TypedProgram infer_type(const ExprPtr& program, const Schema& input,
                        const std::optional<Schema>& expected);

/// Parses and types; a syntax error becomes the single diagnostic.
TypedProgram check_program(const std::string& source, const Schema& input,
                           const std::optional<Schema>& expected);

// ---------------------------------------------------------------------------
// Evaluation

/// A declared runtime failure: "division-by-zero" or "overflow".
class EvalError : public std::runtime_error {
 public:
  EvalError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// A value did not have the shape its static type promised. Never raised for
/// well-typed programs on conforming input; tests use it to detect that.
class TypeFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Requires a program with no diagnostics and an input valid under one of
/// its arms. The language has no randomness; `rng` is accepted so the
/// signature matches other node behaviors and is left untouched.
Value evaluate(const TypedProgram& program, const Value& input, Rng& rng);

/// Source that binds each top-level input field with a let and returns a
/// placeholder of the output's shape. A missing output means unconstrained.
std::string generate_skeleton(const Schema& input, const std::optional<Schema>& output);

}  // namespace privflow
