// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trajsql/core/box.h"

namespace trajsql {

/// `table.column`, both parts nonempty.
struct QualifiedColumn {
  std::string table;
  std::string column;

  std::string str() const { return table + "." + column; }
  auto operator<=>(const QualifiedColumn&) const = default;
};

/// Identifier check used by both grammars: `[A-Za-z_][A-Za-z0-9_ ]*` after
/// trimming. Embedded spaces are legal but force quoting when rendered.
bool is_valid_identifier(std::string_view name);
/// True when the identifier can be written bare (no spaces).
bool is_simple_identifier(std::string_view name);

enum class LiteralKind { Integer, Real, String, Date };

/// Typed scalar. Numbers keep their source spelling so round trips are
/// exact; strings hold unescaped content. A string whose content is a
/// `YYYY-MM-DD` date is always classified as Date.
struct Literal {
  LiteralKind kind = LiteralKind::Integer;
  std::string text;

  static Literal integer(std::int64_t v) { return {LiteralKind::Integer, std::to_string(v)}; }
  static Literal string(std::string s);
  static Literal number(std::string spelling);
  bool is_numeric() const { return kind == LiteralKind::Integer || kind == LiteralKind::Real; }
  bool operator==(const Literal&) const = default;
};

bool looks_like_date(std::string_view s);

enum class AggregateKind { Sum, Avg, Count, Min, Max };
enum class ArithOp { Add, Sub, Mul, Div };

std::string_view aggregate_name(AggregateKind kind);  // dsl spelling: sum, average, count, ...
std::string_view aggregate_sql_name(AggregateKind kind);  // SUM, AVG, ...
std::optional<AggregateKind> aggregate_from_name(std::string_view name);
char arith_symbol(ArithOp op);

struct Expression;

struct ColumnExpr {
  QualifiedColumn ref;
  bool operator==(const ColumnExpr&) const = default;
};
struct StarExpr {
  bool operator==(const StarExpr&) const = default;
};
struct AggregateExpr {
  AggregateKind kind;
  bool distinct = false;
  Box<Expression> arg;
  bool operator==(const AggregateExpr&) const = default;
};
struct CastExpr {
  Box<Expression> arg;
  std::string type;
  bool operator==(const CastExpr&) const = default;
};
struct ArithmeticExpr {
  ArithOp op;
  Box<Expression> lhs;
  Box<Expression> rhs;
  bool operator==(const ArithmeticExpr&) const = default;
};
struct SubstrExpr {
  Box<Expression> arg;
  std::int64_t start = 1;
  std::optional<std::int64_t> length;
  bool operator==(const SubstrExpr&) const = default;
};
/// Scalar function outside the action vocabulary (e.g. strftime).
struct FunctionExpr {
  std::string name;
  std::vector<Expression> args;
  bool operator==(const FunctionExpr&) const = default;
};
/// Reference to the scalar/list result of an earlier binding (non-correlated
/// subquery).
struct SubqueryExpr {
  std::string binding;
  bool operator==(const SubqueryExpr&) const = default;
};

struct Expression {
  using Node = std::variant<ColumnExpr, Literal, StarExpr, AggregateExpr, CastExpr,
                            ArithmeticExpr, SubstrExpr, FunctionExpr, SubqueryExpr>;
  Node node;

  static Expression column(std::string table, std::string column) {
    return {ColumnExpr{{std::move(table), std::move(column)}}};
  }
  static Expression literal(Literal lit) { return {std::move(lit)}; }
  static Expression star() { return {StarExpr{}}; }
  static Expression aggregate(AggregateKind kind, Expression arg, bool distinct = false) {
    return {AggregateExpr{kind, distinct, std::move(arg)}};
  }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }
  bool operator==(const Expression&) const = default;
};

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge, Like, In, NotIn, Between, IsNull, IsNotNull };

std::string_view comparator_sql(Comparator c);

/// A single comparison applied to an element. Operand count: 0 for null
/// checks, 2 for BETWEEN, >= 1 for IN lists, 1 otherwise.
struct FilterCondition {
  Comparator comparator = Comparator::Eq;
  std::vector<Expression> operands;
  bool operator==(const FilterCondition&) const = default;
};

/// Filter argument of where/having. A Predicate is the common
/// `element + filter` shape; And/Or nodes hold a disjunction (possibly with
/// nested conjunctions) that is carried as one opaque `compound` filter.
struct Condition {
  enum class Kind { Predicate, And, Or };
  Kind kind = Kind::Predicate;
  Expression element{StarExpr{}};
  FilterCondition filter;
  std::vector<Condition> terms;

  static Condition predicate(Expression element, FilterCondition filter) {
    Condition c;
    c.element = std::move(element);
    c.filter = std::move(filter);
    return c;
  }
  bool compound() const { return kind != Kind::Predicate; }
  bool operator==(const Condition&) const = default;
};

/// Throws std::invalid_argument when operand counts or BETWEEN kinds are
/// inconsistent with the comparator.
void check_filter(const FilterCondition& filter);

}  // namespace trajsql
