// SPDX-License-Identifier: Apache-2.0
#include "fixtures.h"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace trajsql::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return TRAJSQL_DATA_DIR; }

fs::path fixture(const std::string& relative) { return data_dir() / "fixtures" / relative; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const SchemaCatalog& catalog() {
  static const SchemaCatalog c = SchemaCatalog::load_directory(fixture("schemas"));
  return c;
}

const DatabaseInput& schema(const std::string& name) { return catalog().get(name); }

std::vector<SeedExample> seeds() { return load_seeds(fixture("seeds/seeds.jsonl")); }

DatabaseDirectory databases() { return DatabaseDirectory(fixture("dbs")); }

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("trajsql-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace trajsql::testing
