// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trajsql/action/expression.h"

namespace trajsql {

struct ColumnDef {
  std::string name;
  std::string type;
  bool primary_key = false;
  std::vector<std::string> samples;  // at most 3
};

struct ForeignKey {
  std::string from_column;
  std::string to_table;
  std::string to_column;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::vector<ForeignKey> foreign_keys;

  /// Case-insensitive, like SQL identifiers.
  const ColumnDef* find_column(std::string_view column) const;
  const ColumnDef* primary_key() const;
};

/// Schema of one database plus sampled values.
struct DatabaseInput {
  std::string name;
  std::vector<TableDef> tables;

  const TableDef* find_table(std::string_view table) const;
  /// Resolves a reference to the schema's spelling; false when absent.
  bool resolve(QualifiedColumn& ref) const;
  bool has_column(const QualifiedColumn& ref) const;
};

/// Parses the line-oriented schema format:
///
///   database <name>            (optional, defaults to `default_name`)
///   table <name>
///     column <name> <type> [pk]
///     fk <col> -> <table>.<col>
///     sample <col> v1|v2|v3
///
/// `#` starts a comment. Throws FormatError.
DatabaseInput parse_database_input(std::string_view text, const std::string& default_name = "db");

/// Reads a schema file; the file stem is the default database name. Throws
/// IoError or FormatError.
DatabaseInput load_database_input(const std::filesystem::path& path);

/// Serializes back to the schema format (parse of the result is equal).
std::string render_database_input(const DatabaseInput& d);

/// Prompt-oriented text: one line per table with typed columns, keys and
/// sampled values.
std::string summarize_database(const DatabaseInput& d);

/// Every `*.schema` file of a directory, keyed by database name.
class SchemaCatalog {
 public:
  SchemaCatalog() = default;
  static SchemaCatalog load_directory(const std::filesystem::path& dir);

  void add(DatabaseInput d);
  /// Throws MissingSchema.
  const DatabaseInput& get(const std::string& name) const;
  bool contains(const std::string& name) const { return dbs_.count(name) != 0; }
  const std::map<std::string, DatabaseInput>& all() const { return dbs_; }

 private:
  std::map<std::string, DatabaseInput> dbs_;
};

bool iequals(std::string_view a, std::string_view b);

}  // namespace trajsql
