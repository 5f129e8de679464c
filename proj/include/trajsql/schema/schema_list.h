// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "trajsql/action/expression.h"
#include "trajsql/schema/database.h"
#include "trajsql/sql/ast.h"

namespace trajsql {

/// Table used for columns whose table cannot be determined.
inline constexpr std::string_view kUnresolvedTable = "?";

/// Tables and columns a query mentions, in first-appearance order.
struct SchemaList {
  std::vector<std::string> tables;
  std::vector<QualifiedColumn> columns;

  bool has_table(std::string_view table) const;
  bool has_column(const QualifiedColumn& c) const;
  bool operator==(const SchemaList&) const = default;
};

/// Walks the statement in textual order. Without `d`, unqualified columns
/// in a single-table scope take that table and all others go under `?`.
/// With `d`, a column found in more than one FROM table throws
/// AmbiguousColumn. Select aliases and `*` are not columns.
SchemaList extract_schema(const sql::SqlQuery& s, const DatabaseInput* d = nullptr);

/// `tables: a, b` / `columns: a.x, b.y`, two lines.
std::string render_schema_list(const SchemaList& l);

}  // namespace trajsql
