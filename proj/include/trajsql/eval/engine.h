// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trajsql/sql/ast.h"

struct sqlite3;

namespace trajsql {

using Value = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Value>;

std::string value_text(const Value& v);

struct ExecutionResult {
  std::optional<std::vector<Row>> rows;
  std::optional<std::string> error;
  std::chrono::microseconds elapsed{0};

  bool ok() const { return rows.has_value(); }
};

/// In-memory SQLite database built from a DDL+INSERT script. Executions
/// on one handle are serialized.
class FixtureDatabase {
 public:
  /// Throws IoError when the script cannot be read or fails to load.
  static std::shared_ptr<FixtureDatabase> load(const std::filesystem::path& script, std::string name = {});
  static std::shared_ptr<FixtureDatabase> from_script(const std::string& sql, std::string name);
  ~FixtureDatabase();
  FixtureDatabase(const FixtureDatabase&) = delete;
  FixtureDatabase& operator=(const FixtureDatabase&) = delete;

  const std::string& name() const { return name_; }
  ExecutionResult execute(std::string_view sql) const;

 private:
  FixtureDatabase(sqlite3* db, std::string name) : db_(db), name_(std::move(name)) {}
  sqlite3* db_;
  std::string name_;
  mutable std::mutex mu_;
};

/// `<name>.sqlite.sql` scripts in a directory, opened lazily.
class DatabaseDirectory {
 public:
  explicit DatabaseDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {}
  bool has(const std::string& name) const;
  /// Throws IoError when no script exists for `name`.
  std::shared_ptr<FixtureDatabase> get(const std::string& name);

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::shared_ptr<FixtureDatabase>> open_;
  std::mutex mu_;
};

/// Runs `s` on `db`. Throws EngineUnavailable for non-SQLite dialects;
/// engine errors land in the result.
ExecutionResult execute_sql(const sql::SqlQuery& s, const FixtureDatabase& db);
ExecutionResult execute_sql(std::string_view text, const FixtureDatabase& db);

/// Multiset equality (ordered when `ordered`) with 1e-6 tolerance on
/// numbers and NULL equal to NULL.
bool rows_equal(const std::vector<Row>& a, const std::vector<Row>& b, bool ordered);

/// True when `sql` has a top-level ORDER BY.
bool has_order_by(std::string_view sql);

/// Pred errors give false. Throws GoldExecutionFailed when gold fails.
bool ex_match(std::string_view pred, std::string_view gold, const FixtureDatabase& db);
bool ex_match(const sql::SqlQuery& pred, const sql::SqlQuery& gold, const FixtureDatabase& db);

}  // namespace trajsql
