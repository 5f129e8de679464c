// SPDX-License-Identifier: Apache-2.0
// One line per acceptance criterion; exits nonzero when any fails.
#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ex_pairs.h"
#include "fixtures.h"
#include "query_gen.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/corpus/build.h"
#include "trajsql/eval/report.h"
#include "trajsql/orchestrator/batch.h"
#include "trajsql/perturb/perturb.h"
#include "trajsql/schema/mask.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"
#include "trajsql/sql/render.h"

namespace {

using namespace trajsql;
using testing::catalog;
using testing::fixture;
using testing::read_text;
using testing::schema;

using Clock = std::chrono::steady_clock;

constexpr std::size_t kMinRoundTripQueries = 500;
constexpr auto kRoundTripBudget = std::chrono::seconds(10);
constexpr std::size_t kPerturbations = 1000;
constexpr std::size_t kMaskTrajectories = 1000;
constexpr std::size_t kMaxInjectSize = 100;
constexpr std::size_t kExPairs = 20;
constexpr auto kSuiteBudget = std::chrono::minutes(2);

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Collects failures with a short reason and keeps the first few.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 3) failures_.push_back(what);
    ++failed_;
  }
  Outcome done(const std::string& summary) const {
    if (failed_ == 0) return {true, summary};
    std::string d = summary + "; " + std::to_string(failed_) + " failed:";
    for (const auto& f : failures_) d += " [" + f + "]";
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

std::vector<Trajectory> generated_trajectories(std::size_t n, std::uint64_t seed,
                                               std::vector<const DatabaseInput*>* dbs) {
  std::vector<Trajectory> out;
  std::vector<const DatabaseInput*> all;
  for (const auto& [name, d] : catalog().all()) all.push_back(&d);
  std::vector<testing::QueryGenerator> gens;
  for (const auto* d : all) gens.emplace_back(*d, seed);
  for (std::size_t i = 0; out.size() < n; ++i) {
    const std::size_t k = i % all.size();
    out.push_back(sql::decompose(sql::parse_sql(gens[k].next()), *all[k]));
    dbs->push_back(all[k]);
  }
  return out;
}

Outcome round_trip_suite() {
  Check c;
  const auto start = Clock::now();
  std::size_t n = 0;
  std::size_t passed = 0;
  std::set<std::size_t> table_counts;
  for (const auto& [name, d] : catalog().all()) {
    testing::QueryGenerator gen(d, 20261014);
    for (int i = 0; i < 200; ++i, ++n) {
      const std::string sql = gen.next();
      const auto r = sql::round_trip(sql, d);
      c.expect(r.verdict == sql::Verdict::Pass, sql);
      passed += r.verdict == sql::Verdict::Pass;
      if (r.trajectory) table_counts.insert(r.trajectory->source_tables().size());
    }
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  c.expect(n >= kMinRoundTripQueries, "fewer than 500 queries");
  c.expect(elapsed < kRoundTripBudget, "over 10 s");
  c.expect(table_counts.count(1) && table_counts.count(2), "grammar must cover 1- and 2-table queries");
  return c.done(std::to_string(passed) + "/" + std::to_string(n) + " Pass in " + std::to_string(elapsed.count()) +
                " ms");
}

Outcome closures_goldens() {
  Check c;
  const auto& d = schema("california_schools");
  const auto gold = sql::parse_sql(read_text(fixture("golden/closures/gold.sql")));
  c.expect(render_trajectory(sql::decompose(gold, d)) == read_text(fixture("golden/closures/gold.traj")),
           "decompose(gold) != gold.traj");
  // The initial SQL's COUNT(*) is counted on the group key.
  const auto initial = sql::parse_sql(read_text(fixture("golden/closures/initial.sql")));
  std::string from_initial = render_trajectory(sql::decompose(initial, d, {.lenient = true}));
  std::string logged = read_text(fixture("golden/closures/bam.traj"));
  for (auto* s : {&from_initial, &logged}) {
    for (const char* col : {"count(schools.County)", "count(schools.Year)"}) {
      for (std::size_t p; (p = s->find(col)) != std::string::npos;) s->replace(p, std::string(col).size(), "count(#)");
    }
  }
  c.expect(from_initial == logged, "decompose(initial) != logged BAM trajectory modulo COUNT(*)");
  const auto lom = parse_trajectory(read_text(fixture("golden/closures/lom.traj")));
  const auto final_sql = sql::parse_sql(read_text(fixture("golden/closures/final_output.sql")));
  c.expect(sql::canonicalize(sql::revert(lom, d).ast, &d) == sql::canonicalize(final_sql, &d),
           "revert(LOM) not canonically equal to final output");
  for (const char* f : {"gold.traj", "bam.traj", "sam.traj", "lom.traj"}) {
    const std::string text = read_text(fixture(std::string("golden/closures/") + f));
    c.expect(render_trajectory(parse_trajectory(text)) == text, std::string(f) + " does not re-render exactly");
  }
  c.expect(mask_schema(parse_trajectory(read_text(fixture("golden/closures/bam.traj"))))
                   .template_text == read_text(fixture("golden/closures/bam.masked")),
           "mask(bam.traj) != bam.masked");
  return c.done("gold decompose, initial decompose, LOM revert, golden files");
}

Outcome edit_goldens() {
  Check c;
  struct Case {
    const char* name;
    PerturbationKind kind;
    std::uint64_t seed;
    const char* db;
  };
  for (const Case& k : {Case{"add", PerturbationKind::Add, 5, "movie_platform"},
                        Case{"delete", PerturbationKind::Delete, 3, "movie_platform"},
                        Case{"substitute", PerturbationKind::Substitute, 4, "retail_complaints"}}) {
    const auto before = parse_trajectory(read_text(fixture(std::string("golden/edits/") + k.name + ".before.traj")));
    Rng rng(k.seed);
    const auto p = perturb_once(before, k.kind, rng, schema(k.db));
    c.expect(render_trajectory(p.trajectory) ==
                 read_text(fixture(std::string("golden/edits/") + k.name + ".after.traj")),
             std::string(k.name) + " golden");
  }
  std::vector<const DatabaseInput*> dbs;
  const auto trajs = generated_trajectories(kPerturbations, 99, &dbs);
  const long delta[] = {1, -1, 0};
  std::size_t done = 0;
  std::size_t not_viable = 0;
  for (std::uint64_t seed = 0; done < kPerturbations; ++seed) {
    const std::size_t i = seed % trajs.size();
    const auto kind = static_cast<PerturbationKind>(seed % 3);
    Rng rng(seed);
    try {
      const auto p = perturb_once(trajs[i], kind, rng, *dbs[i]);
      const long d = static_cast<long>(p.trajectory.action_count()) - static_cast<long>(trajs[i].action_count());
      c.expect(d == delta[seed % 3], std::string(perturbation_kind_name(kind)) + " arity " + std::to_string(d));
      ++done;
    } catch (const NoViablePerturbation&) {
      ++not_viable;
    }
  }
  return c.done("3/3 goldens; arity over " + std::to_string(done) + " perturbations (" + std::to_string(not_viable) +
                " draws not viable)");
}

Outcome mask_fill_inverse() {
  Check c;
  std::vector<const DatabaseInput*> dbs;
  const auto trajs = generated_trajectories(kMaskTrajectories, 4321, &dbs);
  std::size_t slots = 0;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto m = mask_schema(trajs[i]);
    slots += m.slots.size();
    try {
      c.expect(fill_mask(m, m.original_values(), *dbs[i]) == trajs[i], render_trajectory(trajs[i]));
    } catch (const Error& e) {
      c.expect(false, e.what());
    }
    for (const auto& t : dbs[i]->tables) {
      auto leaks = [&](const std::string& name) {
        const std::string& s = m.template_text;
        for (std::size_t p = s.find(name); p != std::string::npos; p = s.find(name, p + 1)) {
          const bool left = p == 0 || !(std::isalnum(static_cast<unsigned char>(s[p - 1])) || s[p - 1] == '_');
          const std::size_t e = p + name.size();
          const bool right = e == s.size() || !(std::isalnum(static_cast<unsigned char>(s[e])) || s[e] == '_');
          if (left && right) return true;
        }
        return false;
      };
      c.expect(!leaks(t.name), "table name in template: " + t.name);
      for (const auto& col : t.columns) c.expect(!leaks(col.name), "column name in template: " + col.name);
    }
  }
  return c.done(std::to_string(trajs.size()) + " trajectories, " + std::to_string(slots) + " slots");
}

Outcome negative_ratio() {
  Check c;
  for (std::size_t n = 1; n <= kMaxInjectSize; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(-1 - static_cast<int>(i), static_cast<int>(i));
    const auto out = inject_negatives(pairs, Ratio{}, n);
    std::size_t ids = 0;
    for (const auto& p : out) ids += p.identity;
    c.expect(ids == n / 4 && out.size() == n + n / 4, "n=" + std::to_string(n));
  }
  return c.done("sizes 1.." + std::to_string(kMaxInjectSize) + " give floor(n/4) identities");
}

Outcome pipeline_determinism() {
  Check c;
  const auto& d = schema("california_schools");
  const auto initial = sql::parse_sql(read_text(fixture("golden/closures/initial.sql")));
  const std::string q = "Which county had the most closed schools with SOC 11 during the 1980s?";
  const auto a = trace_json(run_pipeline(d, q, initial, Backends::rule())).dump();
  const auto b = trace_json(run_pipeline(d, q, initial, Backends::rule())).dump();
  c.expect(a == b, "rule pipeline traces differ");
  auto echo = make_echo_generator();
  const auto seeds = testing::seeds();
  BatchOptions par;
  par.jobs = 4;
  const auto s1 = correct_batch(seeds, catalog(), Backends::rule(), echo.get());
  const auto s2 = correct_batch(seeds, catalog(), Backends::rule(), echo.get(), TemplateStore(), par);
  for (std::size_t i = 0; i < s1.size(); ++i)
    c.expect(result_json(s1[i]).dump() == result_json(s2[i]).dump(), "jobs=4 differs at " + s1[i].seed);

  // Ablated stages must pass through; the others report their backend.
  struct Arm {
    const char* config;
    std::set<Stage> ablated;
  };
  for (const Arm& arm : {Arm{"identity-sam", {Stage::SamMask, Stage::SamFill}}, Arm{"identity-lom", {Stage::Lom}}}) {
    const auto backends = load_backend_config(fixture(std::string("backends/") + arm.config + ".json"));
    const auto trace = run_pipeline(d, q, initial, backends);
    c.expect(trace.stages.size() == 4 && !trace.error, std::string(arm.config) + " incomplete");
    for (const auto& st : trace.stages) {
      const bool want = arm.ablated.count(st.stage) ? true : backends.get(st.stage)->identity();
      c.expect(st.pass_through == want, std::string(arm.config) + " stage " + std::string(stage_name(st.stage)));
      if (st.stage == Stage::Bam) c.expect(!st.pass_through, "BAM recorded as pass-through");
    }
    if (arm.ablated.count(Stage::SamFill))
      c.expect(trace.sam && trace.bam && *trace.sam == *trace.bam, "identity SAM changed the trajectory");
    else
      c.expect(trace.lom && trace.sam && *trace.lom == *trace.sam, "identity LOM changed the trajectory");
  }
  return c.done("rule traces identical, jobs 1 == 4, both ablation arms record pass-through");
}

EvalReport evaluate(const std::string& config) {
  const auto seeds = testing::seeds();
  auto echo = make_echo_generator();
  const auto results =
      correct_batch(seeds, catalog(), load_backend_config(fixture("backends/" + config + ".json")), echo.get());
  auto dbs = testing::databases();
  return evaluate_correction(results, seeds, dbs, catalog());
}

Outcome ex_harness() {
  Check c;
  auto dbs = testing::databases();
  std::size_t discrepancies = 0;
  const auto& pairs = testing::hand_checked_ex_pairs();
  c.expect(pairs.size() == kExPairs, "expected 20 pairs");
  for (const auto& p : pairs) {
    const bool got = ex_match(p.pred, p.gold, *dbs.get(p.db));
    discrepancies += got != p.match;
    c.expect(got == p.match, p.pred);
  }
  const auto replay = evaluate("closures");
  bool flipped = false;
  for (const auto& i : replay.instances)
    if (i.seed == "cs-closures") flipped = !i.initial_ex && i.final_ex;
  c.expect(flipped, "closures seed did not flip under replay");
  const auto identity = evaluate("identity");
  c.expect(identity.overcorrected == 0 && identity.overcorrection == 0.0, "identity overcorrection not 0");
  const auto bad = evaluate("bad-lom");
  c.expect(bad.overcorrected == 1 && bad.overcorrection == 1.0 / static_cast<double>(bad.n),
           "bad-LOM overcorrection not 1/N");
  std::ostringstream s;
  s << discrepancies << " discrepancies over " << pairs.size() << " pairs; closures seed flips; overcorrection "
    << identity.overcorrection << " (identity), " << bad.overcorrected << "/" << bad.n << " (bad LOM)";
  return c.done(s.str());
}

Outcome corpus_pipeline() {
  Check c;
  const auto seeds = testing::seeds();
  auto dbs = testing::databases();
  const auto bam = build_bam_corpus(seeds, catalog());
  const auto sam = build_sam_corpus(bam, seeds, catalog());
  LomOptions o;
  o.perturbation.k = 2;
  o.perturbation.seed = 7;
  o.dbs = &dbs;
  const auto lom = build_lom_corpus(bam, seeds, catalog(), o);
  // 9 of 10 golds round-trip; 3 decomposable wrong initial SQLs plus 6
  // correct ones at K = 2 give 15 positives and floor(15/4) identities.
  const std::size_t positives = 3 + 2 * 6;
  c.expect(bam.corpus.records.size() == 9, "BAM " + std::to_string(bam.corpus.records.size()));
  c.expect(sam.records.size() == 2 * 9, "SAM " + std::to_string(sam.records.size()));
  c.expect(lom.corpus.records.size() == positives + positives / 4, "LOM " + std::to_string(lom.corpus.records.size()));
  const auto dir = testing::scratch_dir("acceptance");
  for (const Corpus* corpus : {&bam.corpus, &sam, &lom.corpus}) {
    const auto p = dir / (corpus->kind + ".jsonl");
    write_corpus(*corpus, p);
    const std::string bytes = read_text(p);
    const auto back = read_corpus(p);
    c.expect(serialize_corpus(back) == bytes, corpus->kind + " re-read not byte-identical");
    c.expect(compute_stats(back.records, back.rejected) == back.stats, corpus->kind + " stats differ");
    c.expect(bytes == read_text(fixture("corpus/" + corpus->kind + ".jsonl")), corpus->kind + " differs from fixture");
  }
  return c.done("BAM " + std::to_string(bam.corpus.records.size()) + ", SAM " + std::to_string(sam.records.size()) +
                ", LOM " + std::to_string(lom.corpus.records.size()) + "; files re-read byte-identically");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"round-trip property suite", round_trip_suite},
      {"closures example goldens", closures_goldens},
      {"edit goldens and arity", edit_goldens},
      {"mask/fill inverse", mask_fill_inverse},
      {"negative ratio", negative_ratio},
      {"pipeline determinism and ablation arms", pipeline_determinism},
      {"fixture EX harness", ex_harness},
      {"corpus pipeline", corpus_pipeline},
  };
  const auto start = Clock::now();
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << index << "] " << name << ": " << o.detail << "\n";
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  const bool in_budget = elapsed < kSuiteBudget;
  std::cout << (in_budget ? "PASS" : "FAIL") << " [*] runtime: " << elapsed.count() << " ms\n";
  return failed == 0 && in_budget ? 0 : 1;
}
