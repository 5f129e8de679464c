// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "trajsql/sql/ast.h"

namespace trajsql::sql {

/// Parses one SELECT statement (optionally a set-operation chain) with an
/// optional trailing `;`. Throws SyntaxError, or UnsupportedSql for
/// constructs rejected at parse time (CTEs, window functions, derived
/// tables, NATURAL/USING joins).
SqlQuery parse_sql(std::string_view text, Dialect dialect = Dialect::SQLite);

/// Reserved words that cannot appear as bare identifiers or implicit
/// aliases.
bool is_sql_keyword(std::string_view word);

/// Parses a stand-alone scalar expression.
SqlExpr parse_sql_expression(std::string_view text, Dialect dialect = Dialect::SQLite);

}  // namespace trajsql::sql
