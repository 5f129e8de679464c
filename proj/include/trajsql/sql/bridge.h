// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "trajsql/action/trajectory.h"
#include "trajsql/schema/database.h"
#include "trajsql/sql/ast.h"

namespace trajsql::sql {

struct DecomposeOptions {
  /// Accept columns missing from the schema, qualifying them with the only
  /// (or first) FROM table. Tables must still exist. Used for model-written
  /// SQL whose errors are the point.
  bool lenient = false;
};

/// SQL to trajectory. Throws UnsupportedSql, SchemaMismatch, or
/// JoinPathNotFound when the FROM clause is not the implicit FK join.
Trajectory decompose(const SqlQuery& s, const DatabaseInput& d, DecomposeOptions options = {});

/// Trajectory to a single SELECT. Throws JoinPathNotFound, InvalidChain, or
/// SchemaMismatch for tables absent from `d`.
SqlQuery revert(const Trajectory& t, const DatabaseInput& d, Dialect dialect = Dialect::SQLite);

enum class Verdict { Pass, CanonicalMismatch, Unsupported };

std::string_view verdict_name(Verdict v);

struct RoundTripReport {
  SqlQuery original;
  std::optional<Trajectory> trajectory;
  std::optional<SqlQuery> reverted;
  Verdict verdict = Verdict::Unsupported;
  std::string canonical_original;
  std::string canonical_reverted;
  /// Token diff of the two canonical forms (empty on Pass).
  std::string diff;
  /// Why the query is unsupported, when it is.
  std::string reason;
};

/// Never throws for ordinary input: parse failures, unsupported constructs
/// and schema mismatches become the Unsupported verdict.
RoundTripReport round_trip(const SqlQuery& s, const DatabaseInput& d);
RoundTripReport round_trip(std::string_view sql, const DatabaseInput& d, Dialect dialect = Dialect::SQLite);

/// `-`/`+` prefixed token diff (longest common subsequence over
/// whitespace tokens).
std::string token_diff(const std::string& a, const std::string& b);

}  // namespace trajsql::sql
