#include "modelps/service/api_config.h"

#include <cstdlib>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::service {
namespace {

[[noreturn]] void bad(const std::string& key, const std::string& reason) {
  throw Error(ErrorCode::kInvalidConfig, "invalid service config /" + key + ": " + reason,
              {{"path", "/" + key}, {"reason", reason}});
}

int parse_int(const char* name, const char* value) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    if (used == std::string(value).size()) return v;
  } catch (const std::exception&) {
  }
  bad(name, std::string("not an integer: '") + value + "'");
}

}  // namespace

void validate(const ApiConfig& c) {
  if (c.worker_count < 1) bad("worker_count", "must be >= 1");
  if (c.port < 0 || c.port > 65535) bad("port", "out of range");
  if (!(c.validate_budget_s > 0)) bad("validate_budget_s", "must be positive");
  if (!(c.trial_budget_s > 0)) bad("trial_budget_s", "must be positive");
  if (c.genie_evaluator != "auto" && c.genie_evaluator != "simulated") {
    bad("genie_evaluator", "must be 'auto' or 'simulated'");
  }
}

nlohmann::ordered_json to_json(const ApiConfig& c) {
  nlohmann::ordered_json j;
  j["host"] = c.host;
  j["port"] = c.port;
  j["store_dir"] = c.store_dir.string();
  j["worker_count"] = c.worker_count;
  j["validate_budget_s"] = c.validate_budget_s;
  j["trial_budget_s"] = c.trial_budget_s;
  j["genie_rules_path"] = c.genie_rules_path ? nlohmann::ordered_json(c.genie_rules_path->string())
                                             : nlohmann::ordered_json();
  j["surface_path"] =
      c.surface_path ? nlohmann::ordered_json(c.surface_path->string()) : nlohmann::ordered_json();
  j["genie_evaluator"] = c.genie_evaluator;
  j["seed_demo"] = c.seed_demo;
  j["seed"] = c.seed;
  return j;
}

ApiConfig api_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("", "expected object");
  ApiConfig c;
  for (const auto& [k, v] : j.items()) {
    try {
      if (k == "host") c.host = v.get<std::string>();
      else if (k == "port") c.port = v.get<int>();
      else if (k == "store_dir") c.store_dir = v.get<std::string>();
      else if (k == "worker_count") c.worker_count = v.get<int>();
      else if (k == "validate_budget_s") c.validate_budget_s = v.get<double>();
      else if (k == "trial_budget_s") c.trial_budget_s = v.get<double>();
      else if (k == "genie_rules_path") {
        if (!v.is_null()) c.genie_rules_path = v.get<std::string>();
      } else if (k == "surface_path") {
        if (!v.is_null()) c.surface_path = v.get<std::string>();
      } else if (k == "genie_evaluator") c.genie_evaluator = v.get<std::string>();
      else if (k == "seed_demo") c.seed_demo = v.get<bool>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else bad(k, "unknown field");
    } catch (const nlohmann::json::exception&) {
      bad(k, "wrong type");
    }
  }
  validate(c);
  return c;
}

ApiConfig load_api_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, "cannot parse " + path.string() + ": " + e.what(),
                {{"path", path.string()}});
  }
  return api_config_from_json(j);
}

void apply_env_overrides(ApiConfig& c) {
  if (const char* v = std::getenv("MODELPS_STORE"); v && *v) c.store_dir = v;
  if (const char* v = std::getenv("MODELPS_PORT"); v && *v) c.port = parse_int("port", v);
  if (const char* v = std::getenv("MODELPS_WORKERS"); v && *v) {
    c.worker_count = parse_int("worker_count", v);
  }
  validate(c);
}

}  // namespace modelps::service
