// SPDX-License-Identifier: Apache-2.0
#include "trajsql/corpus/build.h"

#include <algorithm>
#include <spdlog/spdlog.h>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/schema/mask.h"
#include "trajsql/schema/schema_list.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"
#include "trajsql/sql/render.h"

namespace trajsql {

namespace {

void sort_by_seed(std::vector<CorpusRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const CorpusRecord& a, const CorpusRecord& b) { return a.seed < b.seed; });
}

ordered_json action_json(const std::optional<Action>& a) {
  return a ? ordered_json(render_action(*a)) : ordered_json(nullptr);
}

ordered_json perturbation_json(const PerturbationRecord& r) {
  return {{"kind", perturbation_kind_name(r.kind)},
          {"rule", r.rule},
          {"step", r.step},
          {"action", r.action},
          {"before", action_json(r.before)},
          {"after", action_json(r.after)},
          {"seed", r.seed}};
}

Corpus finish(std::string kind, std::vector<CorpusRecord> records, std::vector<Rejection> rejected) {
  sort_by_seed(records);
  Corpus c{std::move(kind), std::move(records), std::move(rejected), {}};
  c.stats = compute_stats(c.records, c.rejected);
  return c;
}

}  // namespace

BamBuild build_bam_corpus(const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas, BamInput input) {
  BamBuild out;
  std::vector<CorpusRecord> records;
  std::vector<Rejection> rejected;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& seed = seeds[i];
    const DatabaseInput& d = schemas.get(seed.db);
    const sql::RoundTripReport report = sql::round_trip(seed.gold_sql, d);
    if (report.verdict != sql::Verdict::Pass) {
      spdlog::info("seed {}: {} ({})", seed.id, sql::verdict_name(report.verdict),
                   report.reason.empty() ? report.diff : report.reason);
      rejected.push_back({seed.id, std::string(sql::verdict_name(report.verdict)),
                          report.reason.empty() ? "canonical forms differ" : report.reason});
      continue;
    }
    CorpusRecord r;
    r.target = CorpusTarget::Bam;
    r.seed = seed.id;
    r.schema_ref = d.name;
    r.input["sql"] = input == BamInput::Gold ? seed.gold_sql : seed.initial_sql;
    r.output = render_trajectory(*report.trajectory);
    r.provenance = {{"seed", seed.id}, {"verdict", "Pass"}};
    records.push_back(std::move(r));
    out.verified.push_back({i, *report.trajectory});
  }
  out.corpus = finish("bam", std::move(records), std::move(rejected));
  return out;
}

Corpus build_sam_corpus(const BamBuild& bam, const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas) {
  std::vector<CorpusRecord> records;
  for (const auto& v : bam.verified) {
    const auto& seed = seeds.at(v.seed_index);
    const DatabaseInput& d = schemas.get(seed.db);
    const MaskedTrajectory m = mask_schema(v.trajectory);
    const std::string trajectory = render_trajectory(v.trajectory);

    SchemaList initial;
    bool parse_failed = false;
    try {
      const sql::SqlQuery q = sql::parse_sql(seed.initial_sql);
      try {
        initial = extract_schema(q, &d);
      } catch (const AmbiguousColumn&) {
        initial = extract_schema(q);
      }
    } catch (const SyntaxError&) {
      parse_failed = true;
    } catch (const UnsupportedSql&) {
      parse_failed = true;
    }

    CorpusRecord p1;
    p1.target = CorpusTarget::SamPhase1;
    p1.seed = seed.id;
    p1.schema_ref = d.name;
    p1.input["trajectory"] = trajectory;
    p1.output = m.template_text;
    p1.provenance = {{"seed", seed.id}, {"verdict", "Pass"}};
    records.push_back(std::move(p1));

    CorpusRecord p2;
    p2.target = CorpusTarget::SamPhase2;
    p2.seed = seed.id;
    p2.schema_ref = d.name;
    p2.input["schema"] = summarize_database(d);
    p2.input["question"] = seed.question;
    p2.input["schema_list"] = render_schema_list(initial);
    p2.input["template"] = m.template_text;
    p2.output = trajectory;
    p2.provenance = {{"seed", seed.id}, {"verdict", "Pass"}, {"initial_parse_failed", parse_failed}};
    records.push_back(std::move(p2));
  }
  return finish("sam", std::move(records), bam.corpus.rejected);
}

bool initial_sql_correct(const SeedExample& seed, const DatabaseInput& d, DatabaseDirectory* dbs) {
  if (dbs && dbs->has(seed.db)) {
    try {
      return ex_match(seed.initial_sql, seed.gold_sql, *dbs->get(seed.db));
    } catch (const GoldExecutionFailed& e) {
      spdlog::warn("seed {}: gold SQL fails on fixture db ({}); using canonical equality", seed.id, e.what());
    }
  }
  try {
    return sql::canonicalize(sql::parse_sql(seed.initial_sql), &d) == sql::canonicalize(sql::parse_sql(seed.gold_sql), &d);
  } catch (const Error&) {
    return false;
  }
}

LomBuild build_lom_corpus(const BamBuild& bam, const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas,
                          const LomOptions& options) {
  options.perturbation.check();
  LomBuild out;
  struct Positive {
    std::size_t seed_index;
    ordered_json provenance;
  };
  std::vector<std::pair<Trajectory, Trajectory>> pairs;
  std::vector<Positive> meta;
  std::vector<Rejection> rejected = bam.corpus.rejected;

  for (std::size_t v = 0; v < bam.verified.size(); ++v) {
    const auto& verified = bam.verified[v];
    const auto& seed = seeds.at(verified.seed_index);
    const DatabaseInput& d = schemas.get(seed.db);
    if (!initial_sql_correct(seed, d, options.dbs)) {
      try {
        Trajectory erroneous = sql::decompose(sql::parse_sql(seed.initial_sql), d, {true});
        if (erroneous == verified.trajectory) throw UnsupportedSql("initial trajectory equals the gold trajectory");
        pairs.emplace_back(std::move(erroneous), verified.trajectory);
        meta.push_back({verified.seed_index, {{"seed", seed.id}, {"source", "initial"}}});
        ++out.from_initial;
      } catch (const Error& e) {
        spdlog::info("seed {}: initial SQL not decomposable ({})", seed.id, e.what());
        rejected.push_back({seed.id, "Pass", std::string("initial SQL skipped: ") + e.what()});
        ++out.skipped;
      }
      continue;
    }
    const AugmentReport report = augment_one(verified.trajectory, v, options.perturbation, d);
    out.skipped += report.skipped;
    for (const auto& p : report.pairs) {
      pairs.emplace_back(p.erroneous, p.verified);
      meta.push_back({verified.seed_index,
                      {{"seed", seed.id}, {"source", "perturbation"}, {"perturbation", perturbation_json(p.record)}}});
      ++out.from_perturbation;
    }
  }

  std::vector<CorpusRecord> records;
  for (const auto& tp : inject_negatives(pairs, options.negatives, options.perturbation.seed)) {
    const Positive& m = meta[tp.source];
    const auto& seed = seeds.at(m.seed_index);
    const DatabaseInput& d = schemas.get(seed.db);
    CorpusRecord r;
    r.target = CorpusTarget::Lom;
    r.seed = seed.id;
    r.schema_ref = d.name;
    r.input["schema"] = summarize_database(d);
    r.input["question"] = seed.question;
    r.input["trajectory"] = render_trajectory(tp.input);
    r.output = render_trajectory(tp.target);
    if (tp.identity) {
      r.provenance = {{"seed", seed.id}, {"source", "identity"}};
      ++out.identities;
    } else {
      r.provenance = m.provenance;
    }
    records.push_back(std::move(r));
  }
  out.corpus = finish("lom", std::move(records), std::move(rejected));
  return out;
}

}  // namespace trajsql
