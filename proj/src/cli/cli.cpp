// SPDX-License-Identifier: Apache-2.0
#include "trajsql/cli/cli.h"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "trajsql/action/action_space.h"
#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/corpus/build.h"
#include "trajsql/eval/report.h"
#include "trajsql/orchestrator/batch.h"
#include "trajsql/schema/mask.h"
#include "trajsql/schema/schema_list.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"
#include "trajsql/sql/render.h"

namespace trajsql {

namespace fs = std::filesystem;

std::string version_string() { return "trajsql 0.1.0 (actions " + ActionSpace::instance().catalog_hash() + ")"; }

namespace {

struct Global {
  std::string schemas = (fs::path(TRAJSQL_DATA_DIR) / "fixtures" / "schemas").string();
  std::string dialect = "sqlite";
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string log_level = "warn";
  std::string format = "text";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string prompts;
};

/// Text given inline, else a file (`-` is stdin), else stdin.
struct Source {
  std::string text;
  std::string file;
  bool inline_given = false;
};

class Context {
 public:
  Context(Global& g, std::istream& in, std::ostream& out) : g_(g), in_(in), out_(out) {}

  bool structured() const { return g_.format == "structured"; }
  std::ostream& out() { return out_; }

  sql::Dialect dialect() const {
    if (g_.dialect == "mysql") return sql::Dialect::MySQL;
    if (g_.dialect == "postgresql") return sql::Dialect::PostgreSQL;
    return sql::Dialect::SQLite;
  }

  std::uint64_t seed(const std::string& verb) const {
    if (!g_.seed_opt || g_.seed_opt->count() == 0) throw UsageError(verb + " requires --seed");
    return g_.seed;
  }

  const SchemaCatalog& catalog() {
    if (!catalog_) catalog_ = SchemaCatalog::load_directory(g_.schemas);
    return *catalog_;
  }

  const DatabaseInput& schema(const std::string& name) {
    if (name.empty()) throw UsageError("--schema is required");
    return catalog().get(name);
  }

  TemplateStore templates() const {
    return g_.prompts.empty() ? TemplateStore() : TemplateStore(fs::path(g_.prompts));
  }

  std::size_t jobs() const { return g_.jobs; }

  std::string read(const Source& s) {
    if (s.inline_given) return s.text;
    if (!s.file.empty() && s.file != "-") return read_file(s.file);
    std::ostringstream ss;
    ss << in_.rdbuf();
    return ss.str();
  }

  static std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  void emit(const ordered_json& j, const std::string& text) {
    if (structured())
      out_ << j.dump() << "\n";
    else
      out_ << text << (text.empty() || text.back() == '\n' ? "" : "\n");
  }

 private:
  Global& g_;
  std::istream& in_;
  std::ostream& out_;
  std::optional<SchemaCatalog> catalog_;
};

void add_source(CLI::App* sub, Source& s, const std::string& what) {
  sub->add_option("-e,--text", s.text, what + " given inline")->each([&s](const std::string&) { s.inline_given = true; });
  sub->add_option("input", s.file, what + " file (default stdin)");
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

ordered_json error_json(const Error& e) { return {{"error", e.code()}, {"message", e.what()}}; }

ordered_json slots_json(const MaskedTrajectory& m) {
  ordered_json a = ordered_json::array();
  for (const auto& s : m.slots)
    a.push_back({{"index", s.index}, {"kind", slot_kind_name(s.kind)}, {"position", s.position}, {"original", s.original}});
  return a;
}

std::vector<SchemaElement> parse_values(const std::string& text) {
  std::vector<SchemaElement> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(SchemaElement::parse(item));
  }
  return out;
}

ordered_json record_json(const PerturbationRecord& r) {
  auto act = [](const std::optional<Action>& a) { return a ? ordered_json(render_action(*a)) : ordered_json(nullptr); };
  return {{"kind", perturbation_kind_name(r.kind)}, {"rule", r.rule},     {"step", r.step},
          {"action", r.action},                     {"before", act(r.before)}, {"after", act(r.after)},
          {"seed", r.seed}};
}

Corpus merge_all(const BamBuild& bam, const Corpus& sam, const Corpus& lom) {
  Corpus c;
  c.kind = "all";
  for (const Corpus* part : {&bam.corpus, &sam, &lom})
    c.records.insert(c.records.end(), part->records.begin(), part->records.end());
  std::stable_sort(c.records.begin(), c.records.end(),
                   [](const CorpusRecord& a, const CorpusRecord& b) { return a.seed < b.seed; });
  c.rejected = bam.corpus.rejected;
  for (const auto& r : lom.rejected)
    if (std::find(c.rejected.begin(), c.rejected.end(), r) == c.rejected.end()) c.rejected.push_back(r);
  c.stats = compute_stats(c.records, c.rejected);
  return c;
}

std::string stats_text(const CorpusStats& s) {
  std::ostringstream os;
  for (const auto& [name, t] : s.targets)
    os << name << ": " << t.count << " records, mean tokens in " << t.mean_input_tokens << " / out "
       << t.mean_output_tokens << "\n";
  os << "round trip: " << s.round_trip_passed << "/" << s.round_trip_attempted << " passed\n";
  return os.str();
}

// First bare word that is neither a verb nor the value of a global option.
std::optional<std::string> unknown_verb(CLI::App& app, int argc, const char* const* argv) {
  static const std::set<std::string> valued{"--schemas", "--dialect", "--seed",   "--log-level",
                                            "--format",  "--jobs",    "--prompts"};
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (valued.count(a)) {
      ++i;
      continue;
    }
    if (a.empty() || a[0] == '-') continue;
    for (const auto* sub : app.get_subcommands({}))
      if (sub->get_name() == a) return std::nullopt;
    return a;
  }
  return std::nullopt;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  Global g;
  CLI::App app{"Action-trajectory tools for text-to-SQL correction", "trajsql"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--schemas", g.schemas, "Directory of *.schema files")->envname("TRAJSQL_SCHEMAS");
  app.add_option("--dialect", g.dialect, "sqlite, mysql or postgresql")
      ->envname("TRAJSQL_DIALECT")
      ->check(CLI::IsMember({"sqlite", "mysql", "postgresql"}, CLI::ignore_case));
  g.seed_opt = app.add_option("--seed", g.seed, "Seed for every stochastic verb")->envname("TRAJSQL_SEED");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
      ->envname("TRAJSQL_LOG_LEVEL")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.add_option("--format", g.format, "text or structured (one JSON object per line)")
      ->envname("TRAJSQL_FORMAT")
      ->check(CLI::IsMember({"text", "structured"}));
  app.add_option("--jobs", g.jobs, "Worker threads")->envname("TRAJSQL_JOBS")->check(CLI::PositiveNumber);
  app.add_option("--prompts", g.prompts, "Prompt template override directory")->envname("TRAJSQL_PROMPTS");

  std::string schema_name;
  auto add_schema = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--schema", schema_name, "Database name in the schema directory");
    if (required) o->required();
  };

  // decompose
  Source decompose_src;
  bool lenient = false;
  auto* decompose = app.add_subcommand("decompose", "SQL to trajectory");
  add_source(decompose, decompose_src, "SQL");
  add_schema(decompose, true);
  decompose->add_flag("--lenient", lenient, "Accept columns missing from the schema");

  Source revert_src;
  auto* revert = app.add_subcommand("revert", "Trajectory to SQL");
  add_source(revert, revert_src, "Trajectory");
  add_schema(revert, true);

  Source rt_src;
  auto* roundtrip = app.add_subcommand("roundtrip", "Decompose, revert and compare canonical forms");
  add_source(roundtrip, rt_src, "SQL");
  add_schema(roundtrip, true);

  Source es_src;
  auto* extract = app.add_subcommand("extract-schema", "Tables and columns referenced by SQL");
  add_source(extract, es_src, "SQL");
  add_schema(extract, false);

  Source mask_src;
  auto* mask = app.add_subcommand("mask", "Mask the schema elements of a trajectory");
  add_source(mask, mask_src, "Trajectory");

  Source fill_src;
  std::string fill_values;
  auto* fill = app.add_subcommand("fill", "Fill a masked template");
  add_source(fill, fill_src, "Masked template");
  add_schema(fill, true);
  fill->add_option("--values", fill_values, "Comma-separated table.column values in slot order")->required();

  Source perturb_src;
  std::string perturb_kind;
  int perturb_k = 1;
  auto* perturb = app.add_subcommand("perturb", "Perturb a trajectory");
  add_source(perturb, perturb_src, "Trajectory");
  add_schema(perturb, true);
  perturb->add_option("--kind", perturb_kind, "add, delete or substitute (default: weighted draw)")
      ->check(CLI::IsMember({"add", "delete", "substitute"}, CLI::ignore_case));
  perturb->add_option("-k,--count", perturb_k, "Number of distinct perturbations")->check(CLI::NonNegativeNumber);

  std::string target = "all", seeds_file, corpus_out, dbs_dir, bam_input = "gold";
  int corpus_k = 1;
  auto* build = app.add_subcommand("build-corpus", "Build BAM/SAM/LOM training corpora from seeds");
  build->add_option("--target", target, "bam, sam, lom or all")->check(CLI::IsMember({"bam", "sam", "lom", "all"}));
  build->add_option("--seeds", seeds_file, "Seed file (JSON lines)")->required();
  build->add_option("-o,--out", corpus_out, "Output corpus file")->required();
  build->add_option("--db", dbs_dir, "Fixture database directory for execution checks");
  build->add_option("-k,--perturbations", corpus_k, "Perturbations per verified trajectory")
      ->check(CLI::NonNegativeNumber);
  build->add_option("--bam-input", bam_input, "gold or initial")->check(CLI::IsMember({"gold", "initial"}));

  std::string stats_file;
  auto* cstats = app.add_subcommand("corpus-stats", "Recompute and check corpus statistics");
  cstats->add_option("corpus", stats_file, "Corpus file")->required();

  std::string backends_file, generator_spec, orchestrate_out;
  auto* orchestrate = app.add_subcommand("orchestrate", "Run the correction pipeline over seeds");
  orchestrate->add_option("--backends", backends_file, "Backend config (JSON)")->required();
  orchestrate->add_option("--seeds", seeds_file, "Seed file (JSON lines)")->required();
  orchestrate->add_option("--generator", generator_spec, "echo or an http endpoint");
  orchestrate->add_option("-o,--out", orchestrate_out, "Results file (default stdout)");

  std::string pred_file, gold_file, eval_db, eval_out;
  auto* eval = app.add_subcommand("eval", "Execution accuracy and overcorrection of correction results");
  eval->add_option("--pred", pred_file, "Results from orchestrate")->required();
  eval->add_option("--gold", gold_file, "Seed file with gold SQL")->required();
  eval->add_option("--db", eval_db, "Fixture database directory")->required();
  eval->add_option("-o,--out", eval_out, "Write the structured report here");

  std::string tag_pred, tag_gold;
  bool tag_sql = false;
  auto* tag = app.add_subcommand("tag-errors", "Classify a wrong prediction against gold");
  tag->add_option("--pred", tag_pred, "Predicted trajectory (or SQL with --sql) file")->required();
  tag->add_option("--gold", tag_gold, "Gold trajectory (or SQL with --sql) file")->required();
  tag->add_flag("--sql", tag_sql, "Inputs are SQL; decompose them first");
  add_schema(tag, true);

  auto* catalog = app.add_subcommand("catalog", "Dump the action space");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (const auto verb = unknown_verb(app, argc, argv))
      err << "UsageError: unknown verb '" << *verb << "'\n";
    else
      err << "UsageError: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitError;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("trajsql", sink);
  logger->set_level(spdlog::level::from_str(g.log_level));
  logger->set_pattern("%l: %v");
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> p;
    ~Restore() { spdlog::set_default_logger(p); }
  } restore{previous};

  Context ctx(g, in, out);
  try {
    if (app.got_subcommand(decompose)) {
      const auto q = sql::parse_sql(ctx.read(decompose_src), ctx.dialect());
      const std::string t = render_trajectory(sql::decompose(q, ctx.schema(schema_name), {lenient}));
      ctx.emit({{"trajectory", t}}, t);
    } else if (app.got_subcommand(revert)) {
      const auto q = sql::revert(parse_trajectory(ctx.read(revert_src)), ctx.schema(schema_name), ctx.dialect());
      ctx.emit({{"sql", q.text}}, q.text);
    } else if (app.got_subcommand(roundtrip)) {
      const auto r = sql::round_trip(ctx.read(rt_src), ctx.schema(schema_name), ctx.dialect());
      ordered_json j{{"verdict", sql::verdict_name(r.verdict)},
                     {"canonical_original", r.canonical_original},
                     {"canonical_reverted", r.canonical_reverted}};
      std::string text(sql::verdict_name(r.verdict));
      if (!r.reason.empty()) {
        j["reason"] = r.reason;
        text += ": " + r.reason;
      }
      if (!r.diff.empty()) {
        j["diff"] = r.diff;
        text += "\n" + r.diff;
      }
      if (r.trajectory) j["trajectory"] = render_trajectory(*r.trajectory);
      ctx.emit(j, text);
      if (r.verdict == sql::Verdict::Unsupported) return kExitUnsupported;
      return r.verdict == sql::Verdict::Pass ? kExitOk : kExitError;
    } else if (app.got_subcommand(extract)) {
      const auto q = sql::parse_sql(ctx.read(es_src), ctx.dialect());
      const SchemaList l = schema_name.empty() ? extract_schema(q) : extract_schema(q, &ctx.schema(schema_name));
      ordered_json cols = ordered_json::array();
      for (const auto& c : l.columns) cols.push_back(c.str());
      ctx.emit({{"tables", l.tables}, {"columns", cols}}, render_schema_list(l));
    } else if (app.got_subcommand(mask)) {
      const MaskedTrajectory m = mask_schema(parse_trajectory(ctx.read(mask_src)));
      ctx.emit({{"template", m.template_text}, {"slots", slots_json(m)}}, m.template_text);
    } else if (app.got_subcommand(fill)) {
      const MaskedTrajectory m = parse_masked_template(ctx.read(fill_src));
      const std::string t = render_trajectory(fill_mask(m, parse_values(fill_values), ctx.schema(schema_name)));
      ctx.emit({{"trajectory", t}}, t);
    } else if (app.got_subcommand(perturb)) {
      const std::uint64_t seed = ctx.seed("perturb");
      const Trajectory t = parse_trajectory(ctx.read(perturb_src));
      const DatabaseInput& d = ctx.schema(schema_name);
      std::vector<std::pair<Trajectory, PerturbationRecord>> results;
      std::size_t skipped = 0;
      if (!perturb_kind.empty()) {
        Rng rng(seed);
        const auto kind = *perturbation_kind_from_name(perturb_kind);
        for (int i = 0; i < perturb_k; ++i) {
          Perturbed p = perturb_once(t, kind, rng, d);
          results.emplace_back(std::move(p.trajectory), std::move(p.record));
        }
      } else {
        PerturbationConfig cfg;
        cfg.k = perturb_k;
        cfg.seed = seed;
        const AugmentReport rep = augment_one(t, 0, cfg, d);
        skipped = rep.skipped;
        for (const auto& p : rep.pairs) results.emplace_back(p.erroneous, p.record);
      }
      for (const auto& [traj, rec] : results) {
        const std::string text = render_trajectory(traj);
        ctx.emit({{"trajectory", text}, {"perturbation", record_json(rec)}},
                 "# " + std::string(perturbation_kind_name(rec.kind)) + " " + rec.rule + "\n" + text);
      }
      if (skipped) spdlog::info("{} draws skipped", skipped);
    } else if (app.got_subcommand(build)) {
      const auto seeds = load_seeds(seeds_file);
      const BamBuild bam =
          build_bam_corpus(seeds, ctx.catalog(), bam_input == "gold" ? BamInput::Gold : BamInput::Initial);
      Corpus result;
      if (target == "bam") {
        result = bam.corpus;
      } else if (target == "sam") {
        result = build_sam_corpus(bam, seeds, ctx.catalog());
      } else {
        LomOptions opt;
        opt.perturbation.k = corpus_k;
        opt.perturbation.seed = ctx.seed("build-corpus --target " + target);
        std::optional<DatabaseDirectory> dbs;
        if (!dbs_dir.empty()) dbs.emplace(dbs_dir);
        opt.dbs = dbs ? &*dbs : nullptr;
        const LomBuild lom = build_lom_corpus(bam, seeds, ctx.catalog(), opt);
        spdlog::info("LOM: {} from initial SQL, {} perturbed, {} identities, {} skipped", lom.from_initial,
                     lom.from_perturbation, lom.identities, lom.skipped);
        result = target == "lom" ? lom.corpus : merge_all(bam, build_sam_corpus(bam, seeds, ctx.catalog()), lom.corpus);
      }
      write_corpus(result, corpus_out);
      ctx.emit({{"corpus", corpus_out}, {"kind", result.kind}, {"stats", stats_json(result.stats)}},
               corpus_out + " (" + result.kind + ")\n" + stats_text(result.stats));
    } else if (app.got_subcommand(cstats)) {
      const Corpus c = read_corpus(stats_file);
      const CorpusStats recomputed = compute_stats(c.records, c.rejected);
      const bool ok = recomputed == c.stats;
      ctx.emit({{"stats", stats_json(recomputed)}, {"matches_stored", ok}},
               stats_text(recomputed) + (ok ? "stored stats match" : "stored stats DIFFER"));
      return ok ? kExitOk : kExitError;
    } else if (app.got_subcommand(orchestrate)) {
      const auto seeds = load_seeds(seeds_file);
      const TemplateStore templates = ctx.templates();
      const Backends backends = load_backend_config(backends_file, templates);
      std::unique_ptr<Generator> generator;
      if (!generator_spec.empty()) generator = make_generator(generator_spec);
      BatchOptions opt;
      opt.jobs = ctx.jobs();
      const auto results = correct_batch(seeds, ctx.catalog(), backends, generator.get(), templates, opt);
      std::ofstream file;
      if (!orchestrate_out.empty()) {
        file.open(orchestrate_out, std::ios::binary);
        if (!file) throw IoError("cannot write " + orchestrate_out);
      }
      std::ostream& sink_out = orchestrate_out.empty() ? ctx.out() : file;
      for (const auto& r : results) sink_out << result_json(r).dump() << "\n";
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.error_code.has_value();
      if (!orchestrate_out.empty())
        ctx.emit({{"results", results.size()}, {"errors", failed}},
                 std::to_string(results.size()) + " results, " + std::to_string(failed) + " with errors");
    } else if (app.got_subcommand(eval)) {
      DatabaseDirectory dbs(eval_db);
      const EvalReport report = evaluate_correction(load_results(pred_file), load_seeds(gold_file), dbs, ctx.catalog());
      const ordered_json j = report_json(report);
      if (!eval_out.empty()) {
        std::ofstream f(eval_out, std::ios::binary);
        if (!f) throw IoError("cannot write " + eval_out);
        f << j.dump(2) << "\n";
      }
      ctx.emit(j, render_report(report));
    } else if (app.got_subcommand(tag)) {
      const DatabaseInput& d = ctx.schema(schema_name);
      auto load = [&](const std::string& file, bool is_gold) {
        const std::string text = Context::read_file(file);
        if (!tag_sql) return parse_trajectory(text);
        return sql::decompose(sql::parse_sql(text, ctx.dialect()), d, {!is_gold});
      };
      const auto t = tag_error(load(tag_pred, false), load(tag_gold, true), d);
      ctx.emit({{"tag", t ? ordered_json(t->str()) : ordered_json(nullptr)}}, t ? t->str() : "match");
    } else if (app.got_subcommand(catalog)) {
      const auto& space = ActionSpace::instance();
      if (ctx.structured()) {
        ctx.out() << space.catalog_jsonl();
      } else {
        for (const auto& e : space.entries())
          ctx.out() << e.name << "\t" << category_name(e.category) << "\t" << e.doc << "\n";
        ctx.out() << "catalog hash " << space.catalog_hash() << "\n";
      }
    }
  } catch (const UnsupportedSql& e) {
    if (ctx.structured()) ctx.out() << error_json(e).dump() << "\n";
    err << e.code() << ": " << e.what() << "\n";
    return kExitUnsupported;
  } catch (const UsageError& e) {
    err << e.code() << ": " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    if (!subs.empty()) err << subs.front()->help();
    return kExitError;
  } catch (const Error& e) {
    if (ctx.structured()) ctx.out() << error_json(e).dump() << "\n";
    err << e.code() << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

}  // namespace trajsql
