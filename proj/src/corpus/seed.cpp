// SPDX-License-Identifier: Apache-2.0
#include "trajsql/corpus/seed.h"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "trajsql/core/error.h"

namespace trajsql {

using json = nlohmann::ordered_json;

std::vector<SeedExample> parse_seeds(std::string_view text) {
  std::vector<SeedExample> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError(lineno, "expected a JSON object");
    auto field = [&](const char* key) -> std::string {
      if (!j.contains(key) || !j[key].is_string()) throw FormatError(lineno, std::string("missing string field `") + key + "`");
      return j[key].get<std::string>();
    };
    auto optional = [&](const char* key) -> std::optional<std::string> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      if (!j[key].is_string()) throw FormatError(lineno, std::string("field `") + key + "` must be a string");
      return j[key].get<std::string>();
    };
    SeedExample s{field("id"), field("db"), field("question"), optional("evidence"),
                  field("gold_sql"), field("initial_sql"), optional("difficulty")};
    if (!ids.insert(s.id).second) throw FormatError(lineno, "duplicate seed id `" + s.id + "`");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SeedExample> load_seeds(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_seeds(text.str());
}

std::string render_seed(const SeedExample& s) {
  json j;
  j["id"] = s.id;
  j["db"] = s.db;
  j["question"] = s.question;
  if (s.evidence) j["evidence"] = *s.evidence;
  j["gold_sql"] = s.gold_sql;
  j["initial_sql"] = s.initial_sql;
  if (s.difficulty) j["difficulty"] = *s.difficulty;
  return j.dump();
}

}  // namespace trajsql
