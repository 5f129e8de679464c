// SPDX-License-Identifier: Apache-2.0
#include "trajsql/eval/engine.h"

#include <sqlite3.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "trajsql/core/error.h"
#include "trajsql/sql/parser.h"

namespace trajsql {

std::string value_text(const Value& v) {
  return std::visit(Overloaded{
                        [](std::monostate) { return std::string("NULL"); },
                        [](std::int64_t x) { return std::to_string(x); },
                        [](double x) {
                          std::ostringstream out;
                          out.precision(15);
                          out << x;
                          return out.str();
                        },
                        [](const std::string& s) { return s; },
                    },
                    v);
}

std::shared_ptr<FixtureDatabase> FixtureDatabase::from_script(const std::string& sql, std::string name) {
  sqlite3* db = nullptr;
  if (sqlite3_open(":memory:", &db) != SQLITE_OK) {
    sqlite3_close(db);
    throw IoError("cannot open in-memory database");
  }
  char* err = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    sqlite3_close(db);
    throw IoError("loading database `" + name + "`: " + msg);
  }
  return std::shared_ptr<FixtureDatabase>(new FixtureDatabase(db, std::move(name)));
}

std::shared_ptr<FixtureDatabase> FixtureDatabase::load(const std::filesystem::path& script, std::string name) {
  std::ifstream in(script, std::ios::binary);
  if (!in) throw IoError("cannot read " + script.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (name.empty()) {
    name = script.filename().string();
    if (const auto dot = name.find('.'); dot != std::string::npos) name.resize(dot);
  }
  return from_script(text.str(), std::move(name));
}

FixtureDatabase::~FixtureDatabase() { sqlite3_close(db_); }

ExecutionResult FixtureDatabase::execute(std::string_view sql) const {
  std::lock_guard<std::mutex> lock(mu_);
  ExecutionResult result;
  const auto start = std::chrono::steady_clock::now();
  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  const int rc = sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt, &tail);
  if (rc != SQLITE_OK || !stmt) {
    result.error = rc == SQLITE_OK ? "empty statement" : sqlite3_errmsg(db_);
    sqlite3_finalize(stmt);
    return result;
  }
  std::vector<Row> rows;
  int step;
  while ((step = sqlite3_step(stmt)) == SQLITE_ROW) {
    Row row;
    const int n = sqlite3_column_count(stmt);
    for (int i = 0; i < n; ++i) {
      switch (sqlite3_column_type(stmt, i)) {
        case SQLITE_NULL: row.emplace_back(std::monostate{}); break;
        case SQLITE_INTEGER: row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt, i))); break;
        case SQLITE_FLOAT: row.emplace_back(sqlite3_column_double(stmt, i)); break;
        default:
          row.emplace_back(std::string(reinterpret_cast<const char*>(sqlite3_column_text(stmt, i)),
                                       static_cast<std::size_t>(sqlite3_column_bytes(stmt, i))));
      }
    }
    rows.push_back(std::move(row));
  }
  if (step != SQLITE_DONE) {
    result.error = sqlite3_errmsg(db_);
  } else {
    result.rows = std::move(rows);
  }
  sqlite3_finalize(stmt);
  result.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
  return result;
}

bool DatabaseDirectory::has(const std::string& name) const {
  return std::filesystem::exists(dir_ / (name + ".sqlite.sql"));
}

std::shared_ptr<FixtureDatabase> DatabaseDirectory::get(const std::string& name) {
  std::lock_guard<std::mutex> lock(mu_);
  if (auto it = open_.find(name); it != open_.end()) return it->second;
  const auto path = dir_ / (name + ".sqlite.sql");
  if (!std::filesystem::exists(path)) throw IoError("no fixture database `" + name + "` in " + dir_.string());
  auto db = FixtureDatabase::load(path, name);
  open_[name] = db;
  return db;
}

ExecutionResult execute_sql(const sql::SqlQuery& s, const FixtureDatabase& db) {
  if (s.dialect != sql::Dialect::SQLite) {
    throw EngineUnavailable("no embedded engine for dialect " + std::string(sql::dialect_name(s.dialect)));
  }
  return db.execute(s.text);
}

ExecutionResult execute_sql(std::string_view text, const FixtureDatabase& db) { return db.execute(text); }

namespace {

bool values_equal(const Value& a, const Value& b) {
  auto number = [](const Value& v) -> std::optional<double> {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    return std::nullopt;
  };
  const auto x = number(a);
  const auto y = number(b);
  if (x && y) return std::fabs(*x - *y) <= 1e-6;
  return a == b;
}

bool rows_match(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!values_equal(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool rows_equal(const std::vector<Row>& a, const std::vector<Row>& b, bool ordered) {
  if (a.size() != b.size()) return false;
  if (ordered) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!rows_match(a[i], b[i])) return false;
    }
    return true;
  }
  std::vector<bool> used(b.size(), false);
  for (const auto& row : a) {
    bool found = false;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!used[j] && rows_match(row, b[j])) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool has_order_by(std::string_view text) {
  try {
    return !sql::parse_sql(text).ast.order_by.empty();
  } catch (const Error&) {
    std::string lower(text);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower.find("order by") != std::string::npos;
  }
}

bool ex_match(std::string_view pred, std::string_view gold, const FixtureDatabase& db) {
  const ExecutionResult g = db.execute(gold);
  if (!g.ok()) throw GoldExecutionFailed(*g.error);
  const ExecutionResult p = db.execute(pred);
  if (!p.ok()) return false;
  return rows_equal(*p.rows, *g.rows, has_order_by(gold));
}

bool ex_match(const sql::SqlQuery& pred, const sql::SqlQuery& gold, const FixtureDatabase& db) {
  const ExecutionResult g = execute_sql(gold, db);
  if (!g.ok()) throw GoldExecutionFailed(*g.error);
  const ExecutionResult p = execute_sql(pred, db);
  if (!p.ok()) return false;
  return rows_equal(*p.rows, *g.rows, !gold.ast.order_by.empty());
}

}  // namespace trajsql
