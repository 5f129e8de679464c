// SPDX-License-Identifier: Apache-2.0
#include "trajsql/orchestrator/pipeline.h"

#include <spdlog/spdlog.h>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/schema/schema_list.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/render.h"

namespace trajsql {

const Trajectory* PipelineTrace::final_trajectory() const {
  if (lom) return &*lom;
  if (sam) return &*sam;
  if (bam) return &*bam;
  return nullptr;
}

Feedback make_feedback(const Trajectory& t, const DatabaseInput& d, const std::string& template_id,
                       const TemplateStore& templates, const FeedbackContext& context) {
  Feedback f;
  f.trajectory = render_trajectory(t);
  f.prompt = render_template(templates.get(template_id), {{"trajectory", f.trajectory},
                                                          {"schema", summarize_database(d)},
                                                          {"question", context.question},
                                                          {"sql", context.sql}});
  try {
    const sql::SqlQuery q = sql::revert(t, d);
    f.reverted_sql = sql::render_sql(q.ast, q.dialect);
  } catch (const Error& e) {
    spdlog::debug("feedback without SQL: {}", e.what());
  }
  return f;
}

namespace {

std::string schema_list_text(const sql::SqlQuery& s, const DatabaseInput& d) {
  try {
    return render_schema_list(extract_schema(s, &d));
  } catch (const AmbiguousColumn&) {
    return render_schema_list(extract_schema(s));
  }
}

template <class Parse>
auto parse_stage(Stage stage, const std::string& text, Parse parse) {
  try {
    return parse(text);
  } catch (const SyntaxError& e) {
    throw StageOutputInvalid(std::string(stage_name(stage)) + " output: " + e.what());
  } catch (const BindingError& e) {
    throw StageOutputInvalid(std::string(stage_name(stage)) + " output: " + e.what());
  } catch (const UnknownAction& e) {
    throw StageOutputInvalid(std::string(stage_name(stage)) + " output: " + e.what());
  }
}

}  // namespace

PipelineTrace run_pipeline(const DatabaseInput& d, const std::string& question, const sql::SqlQuery& initial,
                           const Backends& backends, const TemplateStore& templates, const PipelineOptions& options) {
  for (Stage s : {Stage::Bam, Stage::SamMask, Stage::SamFill, Stage::Lom})
    if (!backends.get(s)) throw UsageError("no backend for stage " + std::string(stage_name(s)));

  PipelineTrace trace;
  trace.initial = initial;
  StageInput in;
  in.database = &d;
  in.question = question;
  in.sql = initial.text;

  auto run = [&](Stage stage, auto parse) {
    StageBackend* b = backends.get(stage);
    in.stage = stage;
    StageRecord rec{stage, b->id(), b->identity(), {}, {}, false};
    const auto start = std::chrono::steady_clock::now();
    rec.output = b->call(in);
    rec.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    trace.stages.push_back(rec);
    auto value = parse_stage(stage, rec.output, parse);
    trace.stages.back().valid = true;
    return value;
  };

  try {
    trace.bam = run(Stage::Bam, [](const std::string& s) { return parse_trajectory(s); });
    in.trajectory = render_trajectory(*trace.bam);
    trace.masked = run(Stage::SamMask, [](const std::string& s) { return parse_masked_template(s); });
    in.upstream_trajectory = in.trajectory;
    in.trajectory.clear();
    in.masked_template = trace.masked->template_text;
    in.schema_list = schema_list_text(initial, d);
    trace.sam = run(Stage::SamFill, [](const std::string& s) { return parse_trajectory(s); });
    in.trajectory = render_trajectory(*trace.sam);
    in.masked_template.clear();
    in.schema_list.clear();
    in.upstream_trajectory.clear();
    trace.lom = run(Stage::Lom, [](const std::string& s) { return parse_trajectory(s); });
  } catch (const StageOutputInvalid& e) {
    trace.failed_stage = trace.stages.back().stage;
    trace.error = e.what();
    spdlog::warn("degraded pipeline: {}", e.what());
  }
  if (const Trajectory* t = trace.final_trajectory())
    trace.feedback = make_feedback(*t, d, options.feedback_template, templates, {question, in.sql});
  return trace;
}

ordered_json trace_json(const PipelineTrace& t, bool with_timing) {
  ordered_json j;
  j["initial_sql"] = t.initial.text;
  auto traj = [](const std::optional<Trajectory>& x) {
    return x ? ordered_json(render_trajectory(*x)) : ordered_json(nullptr);
  };
  j["bam"] = traj(t.bam);
  j["masked"] = t.masked ? ordered_json(t.masked->template_text) : ordered_json(nullptr);
  j["sam"] = traj(t.sam);
  j["lom"] = traj(t.lom);
  j["stages"] = ordered_json::array();
  for (const auto& s : t.stages) {
    ordered_json e{{"stage", stage_name(s.stage)},
                   {"backend", s.backend},
                   {"pass_through", s.pass_through},
                   {"valid", s.valid},
                   {"output", s.output}};
    if (with_timing) e["elapsed_us"] = s.elapsed.count();
    j["stages"].push_back(std::move(e));
  }
  if (t.feedback) {
    j["feedback"] = {{"trajectory", t.feedback->trajectory},
                     {"prompt", t.feedback->prompt},
                     {"reverted_sql", t.feedback->reverted_sql ? ordered_json(*t.feedback->reverted_sql)
                                                               : ordered_json(nullptr)}};
  } else {
    j["feedback"] = nullptr;
  }
  if (t.error) j["error"] = {{"stage", stage_name(*t.failed_stage)}, {"message", *t.error}};
  return j;
}

}  // namespace trajsql
