// SPDX-License-Identifier: Apache-2.0
#include "trajsql/orchestrator/batch.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "trajsql/core/error.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"

namespace trajsql {

namespace {

class EchoGenerator final : public Generator {
 public:
  std::string id() const override { return "echo"; }
  std::string generate(const GeneratorInput& in) override {
    if (in.feedback && in.feedback->reverted_sql) return *in.feedback->reverted_sql;
    return in.sql;
  }
};

class RemoteGenerator final : public Generator {
 public:
  RemoteGenerator(std::string endpoint, RemoteOptions options) : endpoint_(std::move(endpoint)), options_(options) {}
  std::string id() const override { return "remote:" + endpoint_; }
  std::string generate(const GeneratorInput& in) override {
    ordered_json body{{"question", in.question},
                      {"schema", in.database ? summarize_database(*in.database) : std::string()},
                      {"sql", in.sql},
                      {"prompt", in.feedback ? in.feedback->prompt : std::string()},
                      {"trajectory", in.feedback ? in.feedback->trajectory : std::string()}};
    return post_for_text(endpoint_, body, options_);
  }

 private:
  std::string endpoint_;
  RemoteOptions options_;
};

CorrectionResult correct_one(const SeedExample& seed, const SchemaCatalog& schemas, const Backends& backends,
                             Generator* generator, const TemplateStore& templates, const BatchOptions& options) {
  CorrectionResult r;
  r.seed = seed.id;
  r.initial_sql = seed.initial_sql;
  try {
    const DatabaseInput& d = schemas.get(seed.db);
    r.round_trip_pass = sql::round_trip(seed.initial_sql, d).verdict == sql::Verdict::Pass;
    const sql::SqlQuery s = sql::parse_sql(seed.initial_sql);
    r.trace = run_pipeline(d, seed.question, s, backends, templates, options.pipeline);
    r.feedback = r.trace->feedback;
    if (r.trace->error) {
      r.error_code = "StageOutputInvalid";
      r.error = r.trace->error;
    }
    if (generator) r.regenerated_sql = generator->generate({&d, seed.question, seed.initial_sql, r.feedback ? &*r.feedback : nullptr});
  } catch (const Error& e) {
    r.error_code = e.code();
    r.error = e.what();
    spdlog::warn("seed {}: {}: {}", seed.id, e.code(), e.what());
  } catch (const std::exception& e) {
    r.error_code = "Error";
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::unique_ptr<Generator> make_echo_generator() { return std::make_unique<EchoGenerator>(); }

std::unique_ptr<Generator> make_remote_generator(std::string endpoint, RemoteOptions options) {
  return std::make_unique<RemoteGenerator>(std::move(endpoint), options);
}

std::unique_ptr<Generator> make_generator(const std::string& spec, RemoteOptions options) {
  if (spec == "echo") return make_echo_generator();
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) return make_remote_generator(spec, options);
  throw UsageError("--generator must be 'echo' or an http endpoint, got '" + spec + "'");
}

std::vector<CorrectionResult> correct_batch(const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas,
                                            const Backends& backends, Generator* generator,
                                            const TemplateStore& templates, const BatchOptions& options) {
  std::vector<CorrectionResult> out(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++)
      out[i] = correct_one(seeds[i], schemas, backends, generator, templates, options);
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(seeds.size(), 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CorrectionResult& a, const CorrectionResult& b) { return a.seed < b.seed; });
  return out;
}

ordered_json result_json(const CorrectionResult& r) {
  auto opt = [](const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(nullptr); };
  ordered_json j{{"seed", r.seed}, {"initial_sql", r.initial_sql}, {"round_trip", r.round_trip_pass}};
  j["trajectory"] = r.feedback ? ordered_json(r.feedback->trajectory) : ordered_json(nullptr);
  j["reverted_sql"] = r.feedback ? opt(r.feedback->reverted_sql) : ordered_json(nullptr);
  j["regenerated_sql"] = opt(r.regenerated_sql);
  j["error"] = r.error_code ? ordered_json{{"code", *r.error_code}, {"message", *r.error}} : ordered_json(nullptr);
  if (r.trace) j["trace"] = trace_json(*r.trace);
  return j;
}

CorrectionResult parse_result(const ordered_json& j) {
  CorrectionResult r;
  auto opt = [&](const char* key) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
  };
  r.seed = j.at("seed");
  r.initial_sql = j.at("initial_sql");
  r.round_trip_pass = j.value("round_trip", false);
  if (const auto t = opt("trajectory")) r.feedback = Feedback{*t, {}, opt("reverted_sql")};
  r.regenerated_sql = opt("regenerated_sql");
  if (const auto it = j.find("error"); it != j.end() && !it->is_null()) {
    r.error_code = it->at("code");
    r.error = it->at("message");
  }
  return r;
}

std::vector<CorrectionResult> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<CorrectionResult> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(parse_result(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(n, e.what());
    }
  }
  return out;
}

}  // namespace trajsql
