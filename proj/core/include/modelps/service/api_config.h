#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace modelps::service {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_dir = "store";
  int worker_count = 1;
  double validate_budget_s = 10.0;
  // Per-trial budget when Genie trains candidates for real.
  double trial_budget_s = 5.0;
  std::optional<std::filesystem::path> genie_rules_path;
  std::optional<std::filesystem::path> surface_path;
  // "auto" (real trainer for executable graphs) or "simulated".
  std::string genie_evaluator = "auto";
  bool seed_demo = true;
  std::uint64_t seed = 0;
};

void validate(const ApiConfig& config);
nlohmann::ordered_json to_json(const ApiConfig& config);
// Unknown keys are rejected.
ApiConfig api_config_from_json(const nlohmann::json& j);
ApiConfig load_api_config(const std::filesystem::path& path);
// MODELPS_STORE, MODELPS_PORT, MODELPS_WORKERS.
void apply_env_overrides(ApiConfig& config);

}  // namespace modelps::service
