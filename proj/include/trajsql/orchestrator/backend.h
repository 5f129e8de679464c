// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "trajsql/orchestrator/prompts.h"
#include "trajsql/schema/database.h"

namespace trajsql {

using ordered_json = nlohmann::ordered_json;

enum class Stage { Bam, SamMask, SamFill, Lom };

std::string_view stage_name(Stage s);  // BAM, SAM-mask, SAM-fill, LOM
std::optional<Stage> stage_from_name(std::string_view name);
/// Prompt template id of the stage: bam, sam-mask, sam-fill, lom.
std::string_view stage_template_id(Stage s);

/// What a stage sees. Fields unused by a stage are empty.
struct StageInput {
  Stage stage = Stage::Bam;
  const DatabaseInput* database = nullptr;
  std::string question;
  /// The SQL under correction (s').
  std::string sql;
  /// SAM-mask: BAM output. LOM: SAM-fill output.
  std::string trajectory;
  /// SAM-fill only.
  std::string masked_template;
  std::string schema_list;
  /// SAM-fill only: the BAM output the template was masked from.
  std::string upstream_trajectory;

  std::map<std::string, std::string> template_vars() const;
  /// Wire form: {stage, prompt, inputs: {...}}.
  ordered_json to_json(const TemplateStore& templates) const;
};

/// One stage implementation. Output is raw text; the pipeline parses it.
class StageBackend {
 public:
  virtual ~StageBackend() = default;

  /// Serialized when `single_flight()`.
  std::string call(const StageInput& in);

  virtual std::string id() const = 0;
  /// Stage output equals its input (ablation pass-through).
  virtual bool identity() const { return false; }
  virtual bool single_flight() const { return false; }

 protected:
  virtual std::string invoke(const StageInput& in) = 0;

 private:
  std::mutex flight_;
};

/// Deterministic stand-ins: decompose (BAM), mask_schema (SAM-mask), refill
/// with the upstream values repaired against the database (SAM-fill), and
/// pass-through (LOM).
std::unique_ptr<StageBackend> make_rule_backend(Stage stage);

/// Pass-through for the stage. BAM has no trajectory input, so its identity
/// is plain decomposition; SAM-mask masks losslessly; SAM-fill returns the
/// upstream trajectory.
std::unique_ptr<StageBackend> make_identity_backend(Stage stage);

/// Replays responses from a JSON script:
///
///   {"responses": [{"sql": "...", "output": "..."}], "fallback": "identity"}
///
/// Responses are keyed by the SQL under correction (whitespace-insensitive).
/// Unmatched inputs go to `fallback`: identity, rule, or invalid (returns
/// text that fails to parse). Throws IoError or FormatError.
std::unique_ptr<StageBackend> make_scripted_backend(Stage stage, const std::filesystem::path& script);

struct RemoteOptions {
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{500};
  bool single_flight = false;
};

/// POSTs the wire form to `endpoint` (`http://host:port/path`); the reply
/// is `{"text": "..."}`. Throws BackendUnavailable after the retries.
std::unique_ptr<StageBackend> make_remote_backend(Stage stage, std::string endpoint, RemoteOptions options = {},
                                                  TemplateStore templates = TemplateStore());

struct Backends {
  std::shared_ptr<StageBackend> bam;
  std::shared_ptr<StageBackend> sam_mask;
  std::shared_ptr<StageBackend> sam_fill;
  std::shared_ptr<StageBackend> lom;

  StageBackend* get(Stage s) const;
  static Backends rule();
  static Backends identity();
};

/// Per-stage entries keyed by stage name:
///
///   {"BAM": {"kind": "rule"}, "LOM": {"kind": "scripted", "script-file": "x.json"},
///    "SAM-mask": {"kind": "remote", "endpoint": "http://...", "timeout-ms": 30000}}
///
/// All four stages are required. Relative script paths resolve against
/// `base_dir`. Throws FormatError.
Backends parse_backend_config(const ordered_json& config, const std::filesystem::path& base_dir,
                              const TemplateStore& templates = TemplateStore());
Backends load_backend_config(const std::filesystem::path& path, const TemplateStore& templates = TemplateStore());

/// POSTs `body` and returns the reply's `text`, retrying with exponential
/// backoff. Throws BackendUnavailable.
std::string post_for_text(const std::string& endpoint, const ordered_json& body, const RemoteOptions& options);

}  // namespace trajsql
