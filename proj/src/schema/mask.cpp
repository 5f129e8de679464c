// SPDX-License-Identifier: Apache-2.0
#include "trajsql/schema/mask.h"

#include <map>
#include <regex>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"

namespace trajsql {

std::string_view slot_kind_name(SlotKind k) { return k == SlotKind::Table ? "table" : "column"; }

SchemaElement SchemaElement::parse(std::string_view text) {
  if (text.find('.') == std::string_view::npos) {
    std::string name(text);
    if (name.size() >= 2 && name.front() == '`' && name.back() == '`') name = name.substr(1, name.size() - 2);
    if (!is_valid_identifier(name)) throw SyntaxError({1, 1}, "table name", std::string(text));
    return {SlotKind::Table, name, ""};
  }
  return of(parse_qualified_column(text));
}

std::string SchemaElement::str() const {
  if (kind == SlotKind::Column) return render_column({table, column});
  return is_simple_identifier(table) ? table : "`" + table + "`";
}

std::vector<SchemaElement> MaskedTrajectory::original_values() const {
  std::vector<SchemaElement> out;
  for (const auto& s : slots) out.push_back(SchemaElement::parse(s.original));
  return out;
}

namespace {

std::string token(std::size_t k) { return "[MASK:" + std::to_string(k) + "]"; }

const std::regex& mask_pattern() {
  static const std::regex re(R"(\[MASK:(\d+)\])");
  return re;
}

}  // namespace

MaskedTrajectory mask_schema(const Trajectory& t) {
  MaskedTrajectory m;
  RenderOptions options;
  options.column_hook = [&](const QualifiedColumn& c) {
    const std::size_t k = m.slots.size();
    m.slots.push_back({k, SlotKind::Column, 0, render_column(c)});
    return token(k);
  };
  m.template_text = render_trajectory(t, options);

  // Positions in the unmasked text: shift by the length difference of
  // every earlier slot.
  std::ptrdiff_t shift = 0;
  std::size_t k = 0;
  for (auto it = std::sregex_iterator(m.template_text.begin(), m.template_text.end(), mask_pattern());
       it != std::sregex_iterator(); ++it, ++k) {
    auto& slot = m.slots.at(k);
    slot.position = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(it->position()) + shift);
    shift += static_cast<std::ptrdiff_t>(slot.original.size()) - static_cast<std::ptrdiff_t>(it->length());
  }
  return m;
}

std::string render_bare(const MaskedTrajectory& m) {
  return std::regex_replace(m.template_text, mask_pattern(), "[MASK]");
}

MaskedTrajectory parse_masked_template(std::string_view text) {
  MaskedTrajectory m;
  m.template_text = std::string(text);
  std::map<std::size_t, std::size_t> seen;
  for (auto it = std::sregex_iterator(m.template_text.begin(), m.template_text.end(), mask_pattern());
       it != std::sregex_iterator(); ++it) {
    const std::size_t k = std::stoul((*it)[1].str());
    if (!seen.emplace(k, static_cast<std::size_t>(it->position())).second) {
      throw SyntaxError({1, static_cast<std::size_t>(it->position()) + 1}, "each mask index once", it->str());
    }
  }
  std::size_t expect = 0;
  for (const auto& [k, pos] : seen) {
    if (k != expect++) throw SyntaxError({1, pos + 1}, "mask indices 0.." + std::to_string(seen.size() - 1), token(k));
    m.slots.push_back({k, SlotKind::Column, pos, ""});
  }
  return m;
}

Trajectory fill_mask(const MaskedTrajectory& m, const std::vector<SchemaElement>& values, const DatabaseInput& d) {
  if (values.size() != m.slots.size()) {
    throw ArityMismatch(std::to_string(m.slots.size()) + " mask slots, " + std::to_string(values.size()) + " values");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& slot = m.slots[i];
    const auto& v = values[i];
    if (v.kind != slot.kind) {
      throw KindMismatch("slot " + std::to_string(slot.index) + " expects a " + std::string(slot_kind_name(slot.kind)) +
                         ", got " + std::string(slot_kind_name(v.kind)) + " `" + v.str() + "`");
    }
    const TableDef* table = d.find_table(v.table);
    if (!table) throw SchemaMismatch("slot " + std::to_string(slot.index) + ": table `" + v.table + "` is not in `" + d.name + "`");
    if (v.kind == SlotKind::Column && !table->find_column(v.column)) {
      throw SchemaMismatch("slot " + std::to_string(slot.index) + ": column `" + v.str() + "` is not in `" + d.name + "`");
    }
  }
  std::string text;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(m.template_text.begin(), m.template_text.end(), mask_pattern());
       it != std::sregex_iterator(); ++it) {
    const std::size_t k = std::stoul((*it)[1].str());
    if (k >= values.size()) throw ArityMismatch("template references slot " + std::to_string(k));
    text.append(m.template_text, last, static_cast<std::size_t>(it->position()) - last);
    text += values[k].str();
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  text.append(m.template_text, last, std::string::npos);
  return parse_trajectory(text);
}

}  // namespace trajsql
