// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trajsql {

/// One (database, question, gold SQL, initial SQL) example. SQL is kept as
/// text: the initial SQL may not parse.
struct SeedExample {
  std::string id;
  std::string db;
  std::string question;
  std::optional<std::string> evidence;
  std::string gold_sql;
  std::string initial_sql;
  std::optional<std::string> difficulty;

  bool operator==(const SeedExample&) const = default;
};

/// JSON lines with keys id, db, question, gold_sql, initial_sql and
/// optional evidence, difficulty. Blank lines and `#` lines are skipped.
/// Throws FormatError (line number) or IoError. Ids must be unique.
std::vector<SeedExample> parse_seeds(std::string_view text);
std::vector<SeedExample> load_seeds(const std::filesystem::path& path);
std::string render_seed(const SeedExample& seed);

}  // namespace trajsql
