// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trajsql {

/// Named prompt templates (`<id>.txt`) with `{{var}}` placeholders. An
/// override directory is searched before the shipped assets.
class TemplateStore {
 public:
  /// Shipped assets only: `$TRAJSQL_DATA_DIR/prompts`, else the build-time
  /// data directory.
  TemplateStore();
  explicit TemplateStore(std::optional<std::filesystem::path> override_dir);

  /// Throws TemplateNotFound.
  std::string get(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;

  static std::filesystem::path shipped_dir();

 private:
  std::vector<std::filesystem::path> dirs_;
};

/// Replaces `{{name}}` for every key of `vars`; other placeholders stay.
std::string render_template(const std::string& text, const std::map<std::string, std::string>& vars);

}  // namespace trajsql
