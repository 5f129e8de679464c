// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajsql/action/action.h"

namespace trajsql {

struct ParamDescriptor {
  std::string name;
  std::string type;
  bool optional = false;
  bool repeated = false;
};

struct ActionSpaceEntry {
  std::string name;       // dsl spelling
  ActionKind kind;
  ActionCategory category;
  std::vector<ParamDescriptor> params;
  std::string doc;
  /// Chain position (`df.name(...)`) versus expression position only.
  bool chainable = true;
};

/// The closed action vocabulary.
class ActionSpace {
 public:
  static const ActionSpace& instance();

  const std::vector<ActionSpaceEntry>& entries() const { return entries_; }
  /// Case-insensitive lookup; accepts the documented aliases (`avg`,
  /// `group_by`, `order_by`).
  const ActionSpaceEntry* find(std::string_view name) const;

  /// One JSON object per line (name, kind, category, params, doc).
  std::string catalog_jsonl() const;
  /// FNV-1a 64 over the catalog text, 16 hex digits.
  std::string catalog_hash() const;

 private:
  ActionSpace();
  std::vector<ActionSpaceEntry> entries_;
};

}  // namespace trajsql
