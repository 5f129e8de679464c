// SPDX-License-Identifier: Apache-2.0
#include "trajsql/sql/ast.h"

#include <cctype>

namespace trajsql::sql {

std::string_view dialect_name(Dialect d) {
  switch (d) {
    case Dialect::SQLite: return "sqlite";
    case Dialect::MySQL: return "mysql";
    case Dialect::PostgreSQL: return "postgresql";
  }
  return "sqlite";
}

std::optional<Dialect> dialect_from_name(std::string_view name) {
  std::string n(name);
  for (auto& c : n) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "sqlite" || n == "sqlite3") return Dialect::SQLite;
  if (n == "mysql") return Dialect::MySQL;
  if (n == "postgresql" || n == "postgres" || n == "pg") return Dialect::PostgreSQL;
  return std::nullopt;
}

std::string_view binary_op_sql(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Concat: return "||";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Like: return "LIKE";
    case BinaryOp::And: return "AND";
    case BinaryOp::Or: return "OR";
  }
  return "?";
}

std::string_view set_op_sql(SetOp op) {
  switch (op) {
    case SetOp::Union: return "UNION";
    case SetOp::UnionAll: return "UNION ALL";
    case SetOp::Intersect: return "INTERSECT";
    case SetOp::Except: return "EXCEPT";
  }
  return "UNION";
}

SqlExpr make_column(std::string table, std::string column) {
  return SqlExpr{SqlColumn{std::move(table), std::move(column), false}};
}

SqlExpr make_literal(Literal value) { return SqlExpr{SqlLiteral{std::move(value)}}; }

SqlExpr make_binary(BinaryOp op, SqlExpr lhs, SqlExpr rhs) {
  return SqlExpr{SqlBinary{op, std::move(lhs), std::move(rhs)}};
}

}  // namespace trajsql::sql
