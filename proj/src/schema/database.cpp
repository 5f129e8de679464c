// SPDX-License-Identifier: Apache-2.0
#include "trajsql/schema/database.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "trajsql/core/error.h"

namespace trajsql {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

const ColumnDef* TableDef::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return &c;
  }
  return nullptr;
}

const ColumnDef* TableDef::primary_key() const {
  for (const auto& c : columns) {
    if (c.primary_key) return &c;
  }
  return nullptr;
}

const TableDef* DatabaseInput::find_table(std::string_view table) const {
  for (const auto& t : tables) {
    if (iequals(t.name, table)) return &t;
  }
  return nullptr;
}

bool DatabaseInput::resolve(QualifiedColumn& ref) const {
  const TableDef* t = find_table(ref.table);
  if (!t) return false;
  const ColumnDef* c = t->find_column(ref.column);
  if (!c) return false;
  ref.table = t->name;
  ref.column = c->name;
  return true;
}

bool DatabaseInput::has_column(const QualifiedColumn& ref) const {
  QualifiedColumn copy = ref;
  return resolve(copy);
}

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct PendingFk {
  std::size_t line;
  std::string table;
  ForeignKey fk;
};

}  // namespace

DatabaseInput parse_database_input(std::string_view text, const std::string& default_name) {
  DatabaseInput d;
  d.name = default_name;
  std::vector<PendingFk> fks;
  std::size_t lineno = 0;
  bool saw_database = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto words = split_ws(line);
    const std::string& kw = words[0];
    if (kw == "database") {
      if (saw_database || !d.tables.empty()) throw FormatError(lineno, "`database` must come first, once");
      if (words.size() != 2) throw FormatError(lineno, "expected `database <name>`");
      d.name = words[1];
      saw_database = true;
      continue;
    }
    if (kw == "table") {
      if (words.size() != 2 || !is_simple_identifier(words[1])) {
        throw FormatError(lineno, "expected `table <name>`");
      }
      if (d.find_table(words[1])) throw FormatError(lineno, "duplicate table `" + words[1] + "`");
      d.tables.push_back({words[1], {}, {}});
      continue;
    }
    if (d.tables.empty()) throw FormatError(lineno, "`" + kw + "` outside a table");
    TableDef& table = d.tables.back();
    if (kw == "column") {
      if (words.size() < 3 || words.size() > 4 || (words.size() == 4 && words[3] != "pk")) {
        throw FormatError(lineno, "expected `column <name> <type> [pk]`");
      }
      if (!is_simple_identifier(words[1])) throw FormatError(lineno, "bad column name `" + words[1] + "`");
      if (table.find_column(words[1])) throw FormatError(lineno, "duplicate column `" + words[1] + "`");
      const bool pk = words.size() == 4;
      if (pk && table.primary_key()) throw FormatError(lineno, "second primary key in `" + table.name + "`");
      table.columns.push_back({words[1], words[2], pk, {}});
    } else if (kw == "fk") {
      if (words.size() != 4 || words[2] != "->") throw FormatError(lineno, "expected `fk <col> -> <table>.<col>`");
      const auto dot = words[3].find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == words[3].size()) {
        throw FormatError(lineno, "fk target must be `<table>.<col>`");
      }
      fks.push_back({lineno, table.name, {words[1], words[3].substr(0, dot), words[3].substr(dot + 1)}});
    } else if (kw == "sample") {
      const auto space = line.find_first_of(" \t");
      const std::string rest = trim(line.substr(space));
      const auto sep = rest.find_first_of(" \t");
      if (sep == std::string::npos) throw FormatError(lineno, "expected `sample <col> v1|v2|v3`");
      ColumnDef* col = nullptr;
      for (auto& c : table.columns) {
        if (iequals(c.name, rest.substr(0, sep))) col = &c;
      }
      if (!col) throw FormatError(lineno, "sample for unknown column `" + rest.substr(0, sep) + "`");
      std::string values = trim(rest.substr(sep));
      std::vector<std::string> samples;
      std::size_t start = 0;
      while (true) {
        const auto bar = values.find('|', start);
        samples.push_back(trim(values.substr(start, bar == std::string::npos ? std::string::npos : bar - start)));
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
      if (samples.size() > 3) throw FormatError(lineno, "at most 3 sampled values per column");
      col->samples = std::move(samples);
    } else {
      throw FormatError(lineno, "unknown directive `" + kw + "`");
    }
  }
  if (d.tables.empty()) throw FormatError(lineno, "schema declares no tables");
  for (const auto& t : d.tables) {
    if (t.columns.empty()) throw FormatError(lineno, "table `" + t.name + "` has no columns");
  }
  for (auto& p : fks) {
    TableDef* from = nullptr;
    for (auto& t : d.tables) {
      if (t.name == p.table) from = &t;
    }
    const ColumnDef* from_col = from->find_column(p.fk.from_column);
    if (!from_col) throw FormatError(p.line, "fk column `" + p.fk.from_column + "` not in `" + p.table + "`");
    const TableDef* to = d.find_table(p.fk.to_table);
    if (!to) throw FormatError(p.line, "fk target table `" + p.fk.to_table + "` does not exist");
    const ColumnDef* to_col = to->find_column(p.fk.to_column);
    if (!to_col) throw FormatError(p.line, "fk target column `" + p.fk.to_table + "." + p.fk.to_column + "` does not exist");
    from->foreign_keys.push_back({from_col->name, to->name, to_col->name});
  }
  return d;
}

DatabaseInput load_database_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read schema file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_database_input(buf.str(), path.stem().string());
}

std::string render_database_input(const DatabaseInput& d) {
  std::string out = "database " + d.name + "\n";
  for (const auto& t : d.tables) {
    out += "table " + t.name + "\n";
    for (const auto& c : t.columns) {
      out += "  column " + c.name + " " + c.type + (c.primary_key ? " pk" : "") + "\n";
    }
    for (const auto& fk : t.foreign_keys) {
      out += "  fk " + fk.from_column + " -> " + fk.to_table + "." + fk.to_column + "\n";
    }
    for (const auto& c : t.columns) {
      if (c.samples.empty()) continue;
      out += "  sample " + c.name + " ";
      for (std::size_t i = 0; i < c.samples.size(); ++i) out += (i ? "|" : "") + c.samples[i];
      out += "\n";
    }
  }
  return out;
}

std::string summarize_database(const DatabaseInput& d) {
  std::string out = "Database: " + d.name + "\n";
  for (const auto& t : d.tables) {
    out += "Table " + t.name + " (";
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      const auto& c = t.columns[i];
      if (i) out += ", ";
      out += c.name + " " + c.type;
      if (c.primary_key) out += " PRIMARY KEY";
      if (!c.samples.empty()) {
        out += " e.g. [";
        for (std::size_t k = 0; k < c.samples.size(); ++k) out += (k ? ", " : "") + c.samples[k];
        out += "]";
      }
    }
    out += ")\n";
    for (const auto& fk : t.foreign_keys) {
      out += "  " + t.name + "." + fk.from_column + " references " + fk.to_table + "." + fk.to_column + "\n";
    }
  }
  return out;
}

SchemaCatalog SchemaCatalog::load_directory(const std::filesystem::path& dir) {
  SchemaCatalog cat;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("schema directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".schema") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      cat.add(load_database_input(f));
    } catch (const FormatError& e) {
      throw FormatError(e.line(), f.filename().string() + ": " + e.reason());
    }
  }
  return cat;
}

void SchemaCatalog::add(DatabaseInput d) {
  const std::string name = d.name;
  dbs_.insert_or_assign(name, std::move(d));
}

const DatabaseInput& SchemaCatalog::get(const std::string& name) const {
  const auto it = dbs_.find(name);
  if (it == dbs_.end()) throw MissingSchema("no schema for database `" + name + "`");
  return it->second;
}

}  // namespace trajsql
