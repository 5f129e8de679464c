// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trajsql/action/expression.h"
#include "trajsql/core/box.h"

namespace trajsql::sql {

enum class Dialect { SQLite, MySQL, PostgreSQL };

std::string_view dialect_name(Dialect d);
/// Accepts `sqlite`, `mysql`, `postgresql`/`postgres`/`pg` in any case.
std::optional<Dialect> dialect_from_name(std::string_view name);

struct Select;
struct SqlExpr;

struct SqlColumn {
  std::string table;  // qualifier as written (table or alias); may be empty
  std::string column;
  /// Written as a double-quoted identifier. SQLite falls back to a string
  /// literal when such a name resolves to no column.
  bool double_quoted = false;
  bool operator==(const SqlColumn&) const = default;
};

struct SqlLiteral {
  Literal value;
  bool operator==(const SqlLiteral&) const = default;
};

struct SqlNull {
  bool operator==(const SqlNull&) const = default;
};

struct SqlStar {
  std::string table;  // `t.*` when nonempty
  bool operator==(const SqlStar&) const = default;
};

/// Function call, including aggregates. `COUNT(*)` has a single SqlStar arg.
struct SqlCall {
  std::string name;  // uppercased
  bool distinct = false;
  std::vector<SqlExpr> args;
  bool operator==(const SqlCall&) const = default;
};

struct SqlCast {
  Box<SqlExpr> arg;
  std::string type;  // uppercased
  bool operator==(const SqlCast&) const = default;
};

enum class BinaryOp { Add, Sub, Mul, Div, Mod, Concat, Eq, Ne, Lt, Le, Gt, Ge, Like, And, Or };

struct SqlBinary {
  BinaryOp op;
  Box<SqlExpr> lhs;
  Box<SqlExpr> rhs;
  bool operator==(const SqlBinary&) const = default;
};

enum class UnaryOp { Neg, Not };

struct SqlUnary {
  UnaryOp op;
  Box<SqlExpr> arg;
  bool operator==(const SqlUnary&) const = default;
};

struct SqlBetween {
  Box<SqlExpr> arg;
  Box<SqlExpr> low;
  Box<SqlExpr> high;
  bool negated = false;
  bool operator==(const SqlBetween&) const = default;
};

struct SqlIn {
  Box<SqlExpr> arg;
  std::vector<SqlExpr> list;        // empty when `subquery` is set
  std::optional<Box<Select>> subquery;
  bool negated = false;
  bool operator==(const SqlIn&) const = default;
};

struct SqlIsNull {
  Box<SqlExpr> arg;
  bool negated = false;
  bool operator==(const SqlIsNull&) const = default;
};

struct SqlNotLike {
  Box<SqlExpr> arg;
  Box<SqlExpr> pattern;
  bool operator==(const SqlNotLike&) const = default;
};

/// Scalar subquery `( SELECT ... )`.
struct SqlSubquery {
  Box<Select> query;
  bool operator==(const SqlSubquery&) const = default;
};

struct SqlExists {
  Box<Select> query;
  bool negated = false;
  bool operator==(const SqlExists&) const = default;
};

struct SqlCase {
  struct When;
  std::optional<Box<SqlExpr>> operand;
  std::vector<When> whens;
  std::optional<Box<SqlExpr>> otherwise;
  bool operator==(const SqlCase&) const;
};

struct SqlExpr {
  using Node = std::variant<SqlColumn, SqlLiteral, SqlNull, SqlStar, SqlCall, SqlCast, SqlBinary,
                            SqlUnary, SqlBetween, SqlIn, SqlIsNull, SqlNotLike, SqlSubquery,
                            SqlExists, SqlCase>;
  Node node;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <class T>
  T* as() {
    return std::get_if<T>(&node);
  }
  bool operator==(const SqlExpr&) const = default;
};

struct SqlCase::When {
  SqlExpr condition;
  SqlExpr result;
  bool operator==(const When&) const = default;
};

inline bool SqlCase::operator==(const SqlCase& o) const {
  return operand == o.operand && whens == o.whens && otherwise == o.otherwise;
}

struct SelectItem {
  SqlExpr expr;
  std::string alias;
  bool operator==(const SelectItem&) const = default;
};

struct TableRef {
  std::string name;
  std::string alias;
  bool operator==(const TableRef&) const = default;
};

enum class JoinType { Comma, Inner, Left, Right, Full, Cross };

struct Join {
  JoinType type = JoinType::Inner;
  TableRef table;
  std::optional<SqlExpr> on;
  bool operator==(const Join&) const = default;
};

struct OrderItem {
  SqlExpr expr;
  bool desc = false;
  bool operator==(const OrderItem&) const = default;
};

struct SelectCore {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::optional<TableRef> from;
  std::vector<Join> joins;
  std::optional<SqlExpr> where;
  std::vector<SqlExpr> group_by;
  std::optional<SqlExpr> having;
  bool operator==(const SelectCore&) const = default;
};

enum class SetOp { Union, UnionAll, Intersect, Except };

struct Compound {
  SetOp op = SetOp::Union;
  SelectCore core;
  bool operator==(const Compound&) const = default;
};

struct Select {
  SelectCore core;
  std::vector<Compound> compounds;
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;
  std::optional<std::int64_t> offset;
  bool operator==(const Select&) const = default;
};

/// Raw text plus its parsed statement.
struct SqlQuery {
  std::string text;
  Select ast;
  Dialect dialect = Dialect::SQLite;
};

std::string_view binary_op_sql(BinaryOp op);
std::string_view set_op_sql(SetOp op);

/// Helper constructors.
SqlExpr make_column(std::string table, std::string column);
SqlExpr make_literal(Literal value);
SqlExpr make_binary(BinaryOp op, SqlExpr lhs, SqlExpr rhs);

}  // namespace trajsql::sql
