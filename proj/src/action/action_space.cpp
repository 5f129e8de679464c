// SPDX-License-Identifier: Apache-2.0
#include "trajsql/action/action_space.h"

#include <cctype>
#include <cstdint>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace trajsql {

namespace {

ParamDescriptor param(std::string name, std::string type, bool optional = false,
                      bool repeated = false) {
  return {std::move(name), std::move(type), optional, repeated};
}

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

ActionSpace::ActionSpace() {
  using K = ActionKind;
  const auto expr = std::string("expression");
  auto add = [&](std::string name, K kind, std::vector<ParamDescriptor> params, std::string doc,
                 bool chainable = true) {
    entries_.push_back(
        {std::move(name), kind, action_category(kind), std::move(params), std::move(doc), chainable});
  };
  add("select", K::Select, {param("elements", expr, false, true)},
      "Output elements of the frame: qualified columns, aggregates or other expressions.");
  add("where", K::Where, {param("element", expr), param("filter", "filter")},
      "Keep rows whose element satisfies the filter.");
  add("groupby", K::GroupBy, {param("elements", expr, false, true)},
      "Group rows sharing the same element values.");
  add("having", K::Having, {param("element", expr), param("filter", "filter")},
      "Keep groups whose aggregate element satisfies the filter.");
  add("orderby", K::OrderBy, {param("by", expr), param("order", "ASC|DESC")},
      "Sort rows by an element.");
  add("limit", K::Limit, {param("num", "integer"), param("count", "integer", true)},
      "Cap the number of rows; limit(n) or limit(offset, n).");
  add("distinct", K::Distinct, {param("elements", expr, false, true)},
      "Drop duplicate rows over the given elements.");
  add("union", K::Union, {param("other", "binding")}, "Rows of either frame, duplicates removed.");
  add("intersect", K::Intersect, {param("other", "binding")}, "Rows present in both frames.");
  add("except", K::Except, {param("other", "binding")},
      "Rows of the receiver that are absent from the other frame.");
  add("sum", K::AggregateChain, {param("element", expr)}, "Sum of non-null values.");
  add("average", K::AggregateChain, {param("element", expr)}, "Mean of non-null values.");
  add("count", K::AggregateChain, {param("element", expr)}, "Number of values.");
  add("min", K::AggregateChain, {param("element", expr)}, "Smallest non-null value.");
  add("max", K::AggregateChain, {param("element", expr)}, "Largest non-null value.");
  add("cast", K::Cast, {param("element", expr), param("type", "type-name")},
      "Convert an element to a target type.");
  add("calculation", K::Calculation,
      {param("lhs", expr), param("op", "+|-|*|/"), param("rhs", expr)},
      "Binary arithmetic between two expressions.", false);
  add("substr", K::Substr,
      {param("element", expr), param("piv", "integer"), param("len", "integer", true)},
      "Substring from a 1-based start position, optionally bounded in length.");
}

const ActionSpace& ActionSpace::instance() {
  static const ActionSpace space;
  return space;
}

const ActionSpaceEntry* ActionSpace::find(std::string_view name) const {
  std::string key = lower(name);
  if (key == "avg") key = "average";
  if (key == "group_by") key = "groupby";
  if (key == "order_by") key = "orderby";
  for (const auto& entry : entries_) {
    if (entry.chainable && entry.name == key) return &entry;
  }
  return nullptr;
}

std::string ActionSpace::catalog_jsonl() const {
  std::string out;
  for (const auto& entry : entries_) {
    nlohmann::ordered_json j;
    j["name"] = entry.name;
    j["kind"] = std::string(action_kind_name(entry.kind));
    j["category"] = std::string(category_name(entry.category));
    j["chainable"] = entry.chainable;
    auto params = nlohmann::ordered_json::array();
    for (const auto& p : entry.params) {
      params.push_back({{"name", p.name}, {"type", p.type}, {"optional", p.optional},
                        {"repeated", p.repeated}});
    }
    j["params"] = std::move(params);
    j["doc"] = entry.doc;
    out += j.dump() + "\n";
  }
  return out;
}

std::string ActionSpace::catalog_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : catalog_jsonl()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace trajsql
