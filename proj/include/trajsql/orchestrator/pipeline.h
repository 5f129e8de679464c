// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "trajsql/action/trajectory.h"
#include "trajsql/orchestrator/backend.h"
#include "trajsql/orchestrator/prompts.h"
#include "trajsql/schema/mask.h"
#include "trajsql/sql/ast.h"

namespace trajsql {

struct Feedback {
  std::string trajectory;
  std::string prompt;
  std::optional<std::string> reverted_sql;

  bool operator==(const Feedback&) const = default;
};

/// Prompt vars beyond the trajectory and schema.
struct FeedbackContext {
  std::string question;
  std::string sql;
};

/// Renders template `template_id` around `t` and attaches the reverted SQL
/// when revert succeeds. Throws TemplateNotFound.
Feedback make_feedback(const Trajectory& t, const DatabaseInput& d, const std::string& template_id,
                       const TemplateStore& templates = TemplateStore(), const FeedbackContext& context = {});

struct StageRecord {
  Stage stage = Stage::Bam;
  std::string backend;
  /// The backend declares itself a pass-through.
  bool pass_through = false;
  std::chrono::microseconds elapsed{0};
  std::string output;
  bool valid = false;
};

struct PipelineTrace {
  sql::SqlQuery initial;
  std::optional<Trajectory> bam;
  std::optional<MaskedTrajectory> masked;
  std::optional<Trajectory> sam;
  std::optional<Trajectory> lom;
  std::optional<Feedback> feedback;
  /// In stage order; a failed stage is the last entry.
  std::vector<StageRecord> stages;
  /// Set in degraded mode.
  std::optional<Stage> failed_stage;
  std::optional<std::string> error;

  /// LOM output, else the last valid trajectory.
  const Trajectory* final_trajectory() const;
};

struct PipelineOptions {
  std::string feedback_template = "feedback";
};

/// BAM -> SAM-mask -> SAM-fill -> LOM. A stage whose output fails to parse
/// ends the run: the trace keeps earlier stages, records the error, and
/// builds feedback from the last valid trajectory. BackendUnavailable and
/// errors raised by the backends themselves propagate.
PipelineTrace run_pipeline(const DatabaseInput& d, const std::string& question, const sql::SqlQuery& initial,
                           const Backends& backends, const TemplateStore& templates = TemplateStore(),
                           const PipelineOptions& options = {});

/// Structured form; timings are left out unless asked so runs compare equal.
ordered_json trace_json(const PipelineTrace& t, bool with_timing = false);

}  // namespace trajsql
