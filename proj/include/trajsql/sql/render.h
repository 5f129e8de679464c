// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "trajsql/schema/database.h"
#include "trajsql/sql/ast.h"

namespace trajsql::sql {

/// Renders the statement for a dialect: identifier quoting (backticks for
/// SQLite/MySQL, double quotes for PostgreSQL) and LIMIT syntax differ.
/// Parsing the result under the same dialect yields an equal ast.
std::string render_sql(const Select& s, Dialect dialect = Dialect::SQLite);
std::string render_sql_expression(const SqlExpr& e, Dialect dialect = Dialect::SQLite);

/// Normalized statement used for equivalence. Resolves aliases and
/// unqualified columns (using `d` when given), folds inner joins into a
/// sorted FROM list plus WHERE conjuncts, sorts AND chains, orients
/// comparisons with constants on the right and rewrites COUNT(*) to the
/// counted column of the decomposition rule.
Select canonical_ast(const Select& s, const DatabaseInput* d = nullptr);

/// Canonical text: uppercase keywords and function names, single spaces,
/// no trailing `;`.
std::string canonicalize(const SqlQuery& s, const DatabaseInput* d = nullptr);
std::string canonicalize(const Select& s, const DatabaseInput* d = nullptr);

}  // namespace trajsql::sql
