// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajsql/corpus/seed.h"
#include "trajsql/orchestrator/pipeline.h"

namespace trajsql {

struct GeneratorInput {
  const DatabaseInput* database = nullptr;
  std::string question;
  std::string sql;
  const Feedback* feedback = nullptr;
};

/// The model that rewrites s' given the feedback.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string id() const = 0;
  virtual std::string generate(const GeneratorInput& in) = 0;
};

/// Returns the feedback's reverted SQL, else the original SQL.
std::unique_ptr<Generator> make_echo_generator();
/// POSTs {question, schema, sql, prompt, trajectory} and takes `text`.
std::unique_ptr<Generator> make_remote_generator(std::string endpoint, RemoteOptions options = {});
/// `echo` or an http(s) endpoint.
std::unique_ptr<Generator> make_generator(const std::string& spec, RemoteOptions options = {});

struct CorrectionResult {
  std::string seed;
  std::string initial_sql;
  std::optional<PipelineTrace> trace;
  std::optional<Feedback> feedback;
  std::optional<std::string> regenerated_sql;
  /// Error code and message when the seed failed (pipeline or generator).
  std::optional<std::string> error_code;
  std::optional<std::string> error;
  /// Strict round trip of the initial SQL.
  bool round_trip_pass = false;
};

struct BatchOptions {
  std::size_t jobs = 1;
  PipelineOptions pipeline;
};

/// One result per seed, sorted by seed id. Per-seed failures are recorded,
/// never thrown. Runs on up to `jobs` threads.
std::vector<CorrectionResult> correct_batch(const std::vector<SeedExample>& seeds, const SchemaCatalog& schemas,
                                            const Backends& backends, Generator* generator,
                                            const TemplateStore& templates = TemplateStore(),
                                            const BatchOptions& options = {});

/// One JSON line per result; `parse_result` reads back the fields eval
/// needs (the trace is not reconstructed).
ordered_json result_json(const CorrectionResult& r);
CorrectionResult parse_result(const ordered_json& j);
std::vector<CorrectionResult> load_results(const std::filesystem::path& path);

}  // namespace trajsql
