// SPDX-License-Identifier: Apache-2.0
#include "trajsql/orchestrator/backend.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "trajsql/action/trajectory_text.h"
#include "trajsql/core/error.h"
#include "trajsql/schema/mask.h"
#include "trajsql/sql/bridge.h"
#include "trajsql/sql/parser.h"

namespace trajsql {

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Bam: return "BAM";
    case Stage::SamMask: return "SAM-mask";
    case Stage::SamFill: return "SAM-fill";
    case Stage::Lom: return "LOM";
  }
  return "?";
}

std::optional<Stage> stage_from_name(std::string_view name) {
  for (Stage s : {Stage::Bam, Stage::SamMask, Stage::SamFill, Stage::Lom})
    if (iequals(stage_name(s), name)) return s;
  return std::nullopt;
}

std::string_view stage_template_id(Stage s) {
  switch (s) {
    case Stage::Bam: return "bam";
    case Stage::SamMask: return "sam-mask";
    case Stage::SamFill: return "sam-fill";
    case Stage::Lom: return "lom";
  }
  return "";
}

std::map<std::string, std::string> StageInput::template_vars() const {
  return {{"schema", database ? summarize_database(*database) : std::string()},
          {"question", question},
          {"sql", sql},
          {"trajectory", trajectory},
          {"template", masked_template},
          {"schema_list", schema_list}};
}

ordered_json StageInput::to_json(const TemplateStore& templates) const {
  ordered_json inputs;
  if (database) {
    inputs["database"] = database->name;
    inputs["schema"] = summarize_database(*database);
  }
  inputs["question"] = question;
  switch (stage) {
    case Stage::Bam: inputs["sql"] = sql; break;
    case Stage::SamMask: inputs["trajectory"] = trajectory; break;
    case Stage::SamFill:
      inputs["schema_list"] = schema_list;
      inputs["template"] = masked_template;
      break;
    case Stage::Lom: inputs["trajectory"] = trajectory; break;
  }
  return {{"stage", stage_name(stage)},
          {"prompt", render_template(templates.get(std::string(stage_template_id(stage))), template_vars())},
          {"inputs", std::move(inputs)}};
}

std::string StageBackend::call(const StageInput& in) {
  if (!single_flight()) return invoke(in);
  std::lock_guard lock(flight_);
  return invoke(in);
}

namespace {

const DatabaseInput& need_database(const StageInput& in) {
  if (!in.database) throw UsageError(std::string(stage_name(in.stage)) + " input has no database");
  return *in.database;
}

std::string decompose_text(const StageInput& in) {
  const DatabaseInput& d = need_database(in);
  return render_trajectory(sql::decompose(sql::parse_sql(in.sql), d, {true}));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const bool same = std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                        std::tolower(static_cast<unsigned char>(b[j - 1]));
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (same ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Keeps values present in `d`; otherwise the nearest column name of the
// same table (any table when the table is unknown).
SchemaElement repair(SchemaElement v, const DatabaseInput& d) {
  QualifiedColumn c{v.table, v.column};
  if (d.resolve(c)) return SchemaElement::of(c);
  const TableDef* table = d.find_table(v.table);
  std::optional<QualifiedColumn> best;
  std::size_t best_cost = 0;
  auto consider = [&](const TableDef& t) {
    for (const auto& col : t.columns) {
      const std::size_t cost = edit_distance(v.column, col.name);
      if (!best || cost < best_cost) {
        best = QualifiedColumn{t.name, col.name};
        best_cost = cost;
      }
    }
  };
  if (table)
    consider(*table);
  else
    for (const auto& t : d.tables) consider(t);
  return best ? SchemaElement::of(*best) : v;
}

std::string rule_fill(const StageInput& in) {
  const DatabaseInput& d = need_database(in);
  const MaskedTrajectory m = parse_masked_template(in.masked_template);
  std::vector<SchemaElement> values = mask_schema(parse_trajectory(in.upstream_trajectory)).original_values();
  if (values.size() != m.slots.size())
    throw StageOutputInvalid("template has " + std::to_string(m.slots.size()) + " slots, upstream trajectory has " +
                             std::to_string(values.size()) + " columns");
  for (auto& v : values) v = repair(std::move(v), d);
  return render_trajectory(fill_mask(m, values, d));
}

class RuleBackend final : public StageBackend {
 public:
  explicit RuleBackend(Stage s) : stage_(s) {}
  std::string id() const override { return "rule"; }
  bool identity() const override { return stage_ == Stage::Lom; }

 protected:
  std::string invoke(const StageInput& in) override {
    switch (stage_) {
      case Stage::Bam: return decompose_text(in);
      case Stage::SamMask: return mask_schema(parse_trajectory(in.trajectory)).template_text;
      case Stage::SamFill: return rule_fill(in);
      case Stage::Lom: return in.trajectory;
    }
    return {};
  }

 private:
  Stage stage_;
};

class IdentityBackend final : public StageBackend {
 public:
  explicit IdentityBackend(Stage s) : stage_(s) {}
  std::string id() const override { return "identity"; }
  bool identity() const override { return true; }

 protected:
  std::string invoke(const StageInput& in) override {
    switch (stage_) {
      case Stage::Bam: return decompose_text(in);
      case Stage::SamMask: return mask_schema(parse_trajectory(in.trajectory)).template_text;
      case Stage::SamFill: return in.upstream_trajectory;
      case Stage::Lom: return in.trajectory;
    }
    return {};
  }

 private:
  Stage stage_;
};

std::string normalize_key(std::string_view sql) {
  std::string out;
  bool space = false;
  for (char c : sql) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  while (!out.empty() && (out.back() == ';' || out.back() == ' ')) out.pop_back();
  return out;
}

class ScriptedBackend final : public StageBackend {
 public:
  ScriptedBackend(Stage stage, std::string id, std::map<std::string, std::string> responses, std::string fallback)
      : stage_(stage), id_(std::move(id)), responses_(std::move(responses)), fallback_(std::move(fallback)) {
    if (fallback_ == "identity")
      next_ = make_identity_backend(stage);
    else if (fallback_ == "rule")
      next_ = make_rule_backend(stage);
    else if (fallback_ != "invalid")
      throw FormatError(0, "unknown scripted fallback '" + fallback_ + "'");
  }
  std::string id() const override { return id_; }

 protected:
  std::string invoke(const StageInput& in) override {
    const auto it = responses_.find(normalize_key(in.sql));
    if (it != responses_.end()) return it->second;
    if (next_) return next_->call(in);
    return "<no scripted response for " + std::string(stage_name(stage_)) + ">";
  }

 private:
  Stage stage_;
  std::string id_;
  std::map<std::string, std::string> responses_;
  std::string fallback_;
  std::unique_ptr<StageBackend> next_;
};

class RemoteBackend final : public StageBackend {
 public:
  RemoteBackend(Stage stage, std::string endpoint, RemoteOptions options, TemplateStore templates)
      : stage_(stage), endpoint_(std::move(endpoint)), options_(options), templates_(std::move(templates)) {}
  std::string id() const override { return "remote:" + endpoint_; }
  bool single_flight() const override { return options_.single_flight; }

 protected:
  std::string invoke(const StageInput& in) override {
    StageInput copy = in;
    copy.stage = stage_;
    return post_for_text(endpoint_, copy.to_json(templates_), options_);
  }

 private:
  Stage stage_;
  std::string endpoint_;
  RemoteOptions options_;
  TemplateStore templates_;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json parse_json_file(const std::filesystem::path& p) {
  try {
    return ordered_json::parse(read_file(p));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(0, p.string() + ": " + e.what());
  }
}

}  // namespace

std::unique_ptr<StageBackend> make_rule_backend(Stage stage) { return std::make_unique<RuleBackend>(stage); }

std::unique_ptr<StageBackend> make_identity_backend(Stage stage) { return std::make_unique<IdentityBackend>(stage); }

std::unique_ptr<StageBackend> make_scripted_backend(Stage stage, const std::filesystem::path& script) {
  const ordered_json j = parse_json_file(script);
  std::map<std::string, std::string> responses;
  try {
    for (const auto& r : j.at("responses")) responses[normalize_key(r.at("sql").get<std::string>())] = r.at("output");
    return std::make_unique<ScriptedBackend>(stage, "scripted:" + script.filename().string(), std::move(responses),
                                             j.value("fallback", std::string("identity")));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(0, script.string() + ": " + e.what());
  }
}

std::unique_ptr<StageBackend> make_remote_backend(Stage stage, std::string endpoint, RemoteOptions options,
                                                  TemplateStore templates) {
  return std::make_unique<RemoteBackend>(stage, std::move(endpoint), options, std::move(templates));
}

std::string post_for_text(const std::string& endpoint, const ordered_json& body, const RemoteOptions& options) {
  const std::size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw BackendUnavailable("endpoint '" + endpoint + "' has no scheme");
  const std::size_t slash = endpoint.find('/', scheme + 3);
  const std::string base = endpoint.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : endpoint.substr(slash);

  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  std::string last_error;
  auto backoff = options.backoff;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(base);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    const auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      try {
        return nlohmann::json::parse(res->body).at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        last_error = std::string("bad reply: ") + e.what();
      }
    }
    spdlog::debug("{}: attempt {} failed: {}", endpoint, attempt + 1, last_error);
  }
  throw BackendUnavailable(endpoint + ": " + last_error + " after " + std::to_string(options.retries + 1) + " attempts");
}

StageBackend* Backends::get(Stage s) const {
  switch (s) {
    case Stage::Bam: return bam.get();
    case Stage::SamMask: return sam_mask.get();
    case Stage::SamFill: return sam_fill.get();
    case Stage::Lom: return lom.get();
  }
  return nullptr;
}

Backends Backends::rule() {
  return {make_rule_backend(Stage::Bam), make_rule_backend(Stage::SamMask), make_rule_backend(Stage::SamFill),
          make_rule_backend(Stage::Lom)};
}

Backends Backends::identity() {
  return {make_identity_backend(Stage::Bam), make_identity_backend(Stage::SamMask),
          make_identity_backend(Stage::SamFill), make_identity_backend(Stage::Lom)};
}

Backends parse_backend_config(const ordered_json& config, const std::filesystem::path& base_dir,
                              const TemplateStore& templates) {
  if (!config.is_object()) throw FormatError(0, "backend config must be an object");
  for (const auto& [key, _] : config.items())
    if (!stage_from_name(key)) throw FormatError(0, "unknown stage '" + key + "'");
  Backends out;
  for (Stage s : {Stage::Bam, Stage::SamMask, Stage::SamFill, Stage::Lom}) {
    const std::string name(stage_name(s));
    const auto it = config.find(name);
    if (it == config.end()) throw FormatError(0, "backend config has no entry for " + name);
    const ordered_json& e = *it;
    std::shared_ptr<StageBackend> b;
    try {
      const std::string kind = e.at("kind");
      if (kind == "rule") {
        b = make_rule_backend(s);
      } else if (kind == "identity") {
        b = make_identity_backend(s);
      } else if (kind == "scripted") {
        std::filesystem::path p = e.at("script-file").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        b = make_scripted_backend(s, p);
      } else if (kind == "remote") {
        RemoteOptions o;
        o.timeout = std::chrono::milliseconds(e.value("timeout-ms", 30000));
        o.retries = e.value("retries", 2);
        o.backoff = std::chrono::milliseconds(e.value("backoff-ms", 500));
        o.single_flight = e.value("single-flight", false);
        b = make_remote_backend(s, e.at("endpoint"), o, templates);
      } else {
        throw FormatError(0, name + ": unknown backend kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(0, name + ": " + ex.what());
    }
    switch (s) {
      case Stage::Bam: out.bam = b; break;
      case Stage::SamMask: out.sam_mask = b; break;
      case Stage::SamFill: out.sam_fill = b; break;
      case Stage::Lom: out.lom = b; break;
    }
  }
  return out;
}

Backends load_backend_config(const std::filesystem::path& path, const TemplateStore& templates) {
  return parse_backend_config(parse_json_file(path), path.parent_path(), templates);
}

}  // namespace trajsql
