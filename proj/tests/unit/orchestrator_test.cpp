// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "fixtures.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/orchestrator/batch.h"
#include "trajsql/orchestrator/pipeline.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"
#include "trajsql/sql/render.h"

namespace trajsql {
namespace {

using testing::catalog;
using testing::fixture;
using testing::read_text;
using testing::schema;

Backends config(const std::string& name) { return load_backend_config(fixture("backends/" + name + ".json")); }

PipelineTrace closures_example(const Backends& b) {
  const auto& d = schema("california_schools");
  const auto initial = sql::parse_sql(read_text(fixture("golden/closures/initial.sql")));
  return run_pipeline(d, "Which county had the most closed schools with SOC 11 during the 1980s?", initial, b);
}

TEST(Pipeline, ClosuresScriptedReplay) {
  const auto trace = closures_example(config("closures"));
  ASSERT_FALSE(trace.error) << *trace.error;
  ASSERT_EQ(trace.stages.size(), 4u);
  EXPECT_EQ(render_trajectory(*trace.bam), read_text(fixture("golden/closures/bam.traj")));
  EXPECT_EQ(trace.masked->template_text, read_text(fixture("golden/closures/bam.masked")));
  EXPECT_EQ(render_trajectory(*trace.sam), read_text(fixture("golden/closures/sam.traj")));
  EXPECT_EQ(render_trajectory(*trace.lom), read_text(fixture("golden/closures/lom.traj")));
  ASSERT_TRUE(trace.feedback && trace.feedback->reverted_sql);
  const auto& d = schema("california_schools");
  EXPECT_EQ(sql::canonicalize(sql::parse_sql(*trace.feedback->reverted_sql), &d),
            sql::canonicalize(sql::parse_sql(read_text(fixture("golden/closures/final_output.sql"))), &d));
  for (const auto& s : trace.stages) EXPECT_TRUE(s.valid);
}

TEST(Pipeline, RuleBackendsAreReproducible) {
  const auto a = trace_json(closures_example(Backends::rule())).dump();
  const auto b = trace_json(closures_example(Backends::rule())).dump();
  EXPECT_EQ(a, b);
}

TEST(Pipeline, RuleOnCorrectSqlKeepsMeaning) {
  for (const auto& s : testing::seeds()) {
    if (s.id != "mp-nolan-score" && s.id != "rc-district-day" && s.id != "cs-fresno-soc") continue;
    const auto& d = schema(s.db);
    const auto initial = sql::parse_sql(s.initial_sql);
    const auto trace = run_pipeline(d, s.question, initial, Backends::rule());
    ASSERT_TRUE(trace.feedback && trace.feedback->reverted_sql) << s.id;
    EXPECT_EQ(sql::canonicalize(sql::parse_sql(*trace.feedback->reverted_sql), &d), sql::canonicalize(initial, &d))
        << s.id;
  }
}

TEST(Pipeline, IdentityArmsRecordPassThrough) {
  for (const char* name : {"identity-sam", "identity-lom"}) {
    const auto trace = closures_example(config(name));
    ASSERT_EQ(trace.stages.size(), 4u) << name;
    ASSERT_FALSE(trace.error);
    int pass_through = 0;
    for (const auto& s : trace.stages) pass_through += s.pass_through;
    if (std::string(name) == "identity-sam") {
      EXPECT_TRUE(trace.stages[1].pass_through);
      EXPECT_TRUE(trace.stages[2].pass_through);
      EXPECT_EQ(*trace.sam, *trace.bam);
    } else {
      EXPECT_TRUE(trace.stages[3].pass_through);
      EXPECT_EQ(*trace.lom, *trace.sam);
    }
    const auto j = trace_json(trace);
    ASSERT_EQ(j["stages"].size(), 4u);
  }
}

TEST(Pipeline, IdentityBackendsChangeNothing) {
  const auto trace = closures_example(Backends::identity());
  EXPECT_EQ(*trace.lom, *trace.bam);
  EXPECT_EQ(render_trajectory(*trace.lom), read_text(fixture("golden/closures/bam_from_initial.traj")));
}

TEST(Pipeline, InvalidLomDegradesToSam) {
  const auto trace = closures_example(config("invalid-lom"));
  ASSERT_TRUE(trace.failed_stage);
  EXPECT_EQ(*trace.failed_stage, Stage::Lom);
  EXPECT_FALSE(trace.lom);
  ASSERT_TRUE(trace.sam);
  EXPECT_EQ(trace.final_trajectory(), &*trace.sam);
  ASSERT_TRUE(trace.feedback);
  EXPECT_EQ(trace.feedback->trajectory, render_trajectory(*trace.sam));
  EXPECT_FALSE(trace.stages.back().valid);
}

TEST(Pipeline, MissingBackendIsUsageError) {
  auto b = Backends::rule();
  b.lom.reset();
  EXPECT_THROW(closures_example(b), UsageError);
}

TEST(Feedback, RevertedSqlAbsentWhenNotRevertible) {
  const auto& d = schema("california_schools");
  const auto ok = make_feedback(parse_trajectory(read_text(fixture("golden/closures/lom.traj"))), d, "feedback");
  EXPECT_TRUE(ok.reverted_sql);
  EXPECT_NE(ok.prompt.find(ok.trajectory), std::string::npos);
  const auto bad = make_feedback(parse_trajectory("res = df.select(nowhere.a)\n"), d, "feedback");
  EXPECT_FALSE(bad.reverted_sql);
  EXPECT_THROW(make_feedback(parse_trajectory("res = df.select(schools.SOC)\n"), d, "no-such-template"),
               TemplateNotFound);
}

TEST(Templates, ShippedAndOverride) {
  TemplateStore shipped;
  for (const char* id : {"bam", "sam-mask", "sam-fill", "lom", "feedback"}) EXPECT_TRUE(shipped.contains(id));
  const auto dir = testing::scratch_dir("prompts");
  std::ofstream(dir / "feedback.txt") << "T={{trajectory}}";
  TemplateStore over(dir);
  const auto f = make_feedback(parse_trajectory("res = df.select(schools.SOC)\n"), schema("california_schools"),
                               "feedback", over);
  EXPECT_EQ(f.prompt, "T=res = df.select(schools.SOC)\n");
  EXPECT_EQ(render_template("{{a}}-{{b}}", {{"a", "1"}, {"b", "2"}}), "1-2");
}

TEST(BackendConfig, Errors) {
  EXPECT_THROW(parse_backend_config(ordered_json::parse(R"({"BAM":{"kind":"rule"}})"), "."), FormatError);
  EXPECT_THROW(parse_backend_config(ordered_json::parse(
                                        R"({"BAM":{"kind":"rule"},"SAM-mask":{"kind":"rule"},
                                            "SAM-fill":{"kind":"rule"},"LOM":{"kind":"magic"}})"),
                                    "."),
               FormatError);
  EXPECT_EQ(stage_from_name("SAM-fill"), Stage::SamFill);
}

TEST(RemoteBackend, DownEndpointIsUnavailable) {
  RemoteOptions o;
  o.timeout = std::chrono::milliseconds(200);
  o.retries = 1;
  o.backoff = std::chrono::milliseconds(10);
  auto b = make_remote_backend(Stage::Bam, "http://127.0.0.1:9", o);
  StageInput in;
  in.database = &schema("california_schools");
  in.sql = "SELECT County FROM schools";
  EXPECT_THROW(b->call(in), BackendUnavailable);
}

class SlowBackend : public StageBackend {
 public:
  std::string id() const override { return "slow"; }
  bool single_flight() const override { return true; }
  std::atomic<int> active{0};
  std::atomic<int> peak{0};

 protected:
  std::string invoke(const StageInput&) override {
    const int now = ++active;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active;
    return "res = df.select(schools.SOC)\n";
  }
};

TEST(StageBackend, SingleFlightSerializesCalls) {
  SlowBackend b;
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i)
    threads.emplace_back([&] {
      StageInput in;
      b.call(in);
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(b.peak.load(), 1);
}

TEST(Batch, ParallelMatchesSerial) {
  const auto seeds = testing::seeds();
  auto echo = make_echo_generator();
  BatchOptions serial;
  BatchOptions parallel;
  parallel.jobs = 4;
  const auto a = correct_batch(seeds, catalog(), Backends::rule(), echo.get(), TemplateStore(), serial);
  const auto b = correct_batch(seeds, catalog(), Backends::rule(), echo.get(), TemplateStore(), parallel);
  ASSERT_EQ(a.size(), seeds.size());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(result_json(a[i]).dump(), result_json(b[i]).dump());
    if (i) EXPECT_LT(a[i - 1].seed, a[i].seed);
  }
}

TEST(Batch, PerSeedErrorsAndEcho) {
  const auto seeds = testing::seeds();
  auto echo = make_echo_generator();
  const auto results = correct_batch(seeds, catalog(), Backends::rule(), echo.get());
  for (const auto& r : results) {
    // Strict round trip of the initial SQL: the closures query names a missing column.
    if (r.seed == "cs-closures") EXPECT_FALSE(r.round_trip_pass);
    if (r.seed == "rc-five-stars") EXPECT_TRUE(r.round_trip_pass);
    if (r.error_code) continue;
    ASSERT_TRUE(r.regenerated_sql) << r.seed;
    ASSERT_TRUE(r.feedback);
    EXPECT_EQ(*r.regenerated_sql, r.feedback->reverted_sql.value_or(r.initial_sql));
    // The trace is diagnostic and not read back.
    auto written = result_json(r);
    written.erase("trace");
    EXPECT_EQ(result_json(parse_result(written)).dump(), written.dump());
  }
}

TEST(Batch, UnreachableBackendRecordedPerSeed) {
  RemoteOptions o;
  o.timeout = std::chrono::milliseconds(100);
  o.retries = 0;
  o.backoff = std::chrono::milliseconds(1);
  auto b = Backends::rule();
  b.lom = make_remote_backend(Stage::Lom, "http://127.0.0.1:9", o);
  auto seeds = testing::seeds();
  seeds.resize(2);
  auto echo = make_echo_generator();
  const auto results = correct_batch(seeds, catalog(), b, echo.get());
  ASSERT_EQ(results.size(), 2u);
  for (const auto& r : results) EXPECT_EQ(r.error_code.value_or(""), "BackendUnavailable") << r.seed;
}

TEST(Generator, Factory) {
  EXPECT_EQ(make_generator("echo")->id(), "echo");
  EXPECT_THROW(make_generator("carrier-pigeon"), UsageError);
}

}  // namespace
}  // namespace trajsql
