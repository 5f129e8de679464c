// SPDX-License-Identifier: Apache-2.0
#include "trajsql/orchestrator/prompts.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "trajsql/core/error.h"

namespace trajsql {

namespace fs = std::filesystem;

fs::path TemplateStore::shipped_dir() {
  if (const char* env = std::getenv("TRAJSQL_DATA_DIR"); env && *env) return fs::path(env) / "prompts";
  return fs::path(TRAJSQL_DATA_DIR) / "prompts";
}

TemplateStore::TemplateStore() : TemplateStore(std::nullopt) {}

TemplateStore::TemplateStore(std::optional<fs::path> override_dir) {
  if (override_dir) dirs_.push_back(*override_dir);
  dirs_.push_back(shipped_dir());
}

std::string TemplateStore::get(const std::string& id) const {
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos)
    throw TemplateNotFound("invalid template id '" + id + "'");
  for (const auto& dir : dirs_) {
    const fs::path p = dir / (id + ".txt");
    std::ifstream in(p, std::ios::binary);
    if (!in) continue;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  throw TemplateNotFound("no template '" + id + "'");
}

bool TemplateStore::contains(const std::string& id) const {
  try {
    get(id);
    return true;
  } catch (const TemplateNotFound&) {
    return false;
  }
}

std::vector<std::string> TemplateStore::ids() const {
  std::set<std::string> out;
  for (const auto& dir : dirs_) {
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec))
      if (e.path().extension() == ".txt") out.insert(e.path().stem().string());
  }
  return {out.begin(), out.end()};
}

std::string render_template(const std::string& text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t open = text.find("{{", i);
    if (open == std::string::npos) break;
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    out.append(text, i, open - i);
    const auto it = vars.find(text.substr(open + 2, close - open - 2));
    if (it != vars.end())
      out += it->second;
    else
      out.append(text, open, close + 2 - open);
    i = close + 2;
  }
  out.append(text, i, std::string::npos);
  return out;
}

}  // namespace trajsql
