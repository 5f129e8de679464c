// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trajsql/action/trajectory.h"
#include "trajsql/schema/database.h"

namespace trajsql {

enum class SlotKind { Table, Column };

std::string_view slot_kind_name(SlotKind k);

/// A table name or a qualified column used to fill a mask slot.
struct SchemaElement {
  SlotKind kind = SlotKind::Column;
  std::string table;
  std::string column;  // empty for tables

  static SchemaElement of(const QualifiedColumn& c) { return {SlotKind::Column, c.table, c.column}; }
  /// `t` is a table, `t.c` a column (backticks allowed).
  static SchemaElement parse(std::string_view text);
  std::string str() const;
  bool operator==(const SchemaElement&) const = default;
};

struct MaskSlot {
  std::size_t index = 0;
  SlotKind kind = SlotKind::Column;
  /// Byte offset of the occurrence in the unmasked trajectory text.
  std::size_t position = 0;
  /// Printed form of the masked element (empty for parsed templates).
  std::string original;
  bool operator==(const MaskSlot&) const = default;
};

struct MaskedTrajectory {
  std::string template_text;
  std::vector<MaskSlot> slots;

  /// Values the template was masked from, in slot order.
  std::vector<SchemaElement> original_values() const;
  bool operator==(const MaskedTrajectory&) const = default;
};

/// Replaces every column occurrence (table and column together) with
/// `[MASK:k]`, numbered left to right.
MaskedTrajectory mask_schema(const Trajectory& t);

/// The template with `[MASK:k]` tokens rendered as bare `[MASK]`.
std::string render_bare(const MaskedTrajectory& m);

/// Recovers slots from template text. Indices must be 0..n-1, each once;
/// every slot is a column slot. Throws SyntaxError otherwise.
MaskedTrajectory parse_masked_template(std::string_view text);

/// Substitutes `values` into the slots and parses the result. Throws
/// ArityMismatch, KindMismatch, or SchemaMismatch naming the first slot
/// whose value is not in `d`.
Trajectory fill_mask(const MaskedTrajectory& m, const std::vector<SchemaElement>& values, const DatabaseInput& d);

}  // namespace trajsql
