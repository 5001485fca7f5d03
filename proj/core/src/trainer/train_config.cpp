#include "modelps/trainer/train_config.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "modelps/error.h"
#include "modelps/util.h"

namespace modelps::trainer {
namespace {

using nlohmann::ordered_json;

constexpr std::array<std::string_view, 19> kFields = {
    "tl_method",  "base_model_id", "dataset_id",     "source_dataset_id", "graph",
    "aug",        "aug_preset",    "lr",             "momentum",          "epochs",
    "batch_size", "frozen_layers", "kd_temperature", "kd_alpha",          "mmd_weight",
    "mmd_gamma",  "boosting_rounds", "seed",         "teacher_model_id"};

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::kInvalidConfig, "invalid config " + path + ": " + reason,
              {{"path", path}, {"reason", reason}});
}

template <typename T>
T read(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    invalid(std::string("/") + key, "wrong type");
  }
}

}  // namespace

std::string_view to_string(TlMethod method) {
  switch (method) {
    case TlMethod::kFineTune: return "fine_tune";
    case TlMethod::kKnowledgeDistill: return "knowledge_distill";
    case TlMethod::kTradaboost: return "tradaboost";
    case TlMethod::kMmdAdapt: return "mmd_adapt";
    case TlMethod::kFromScratch: return "from_scratch";
  }
  return "fine_tune";
}

TlMethod tl_method_from_string(std::string_view name) {
  for (TlMethod m : {TlMethod::kFineTune, TlMethod::kKnowledgeDistill, TlMethod::kTradaboost,
                     TlMethod::kMmdAdapt, TlMethod::kFromScratch}) {
    if (to_string(m) == name) return m;
  }
  invalid("/tl_method", "unknown method '" + std::string(name) + "'");
}

std::span<const std::string_view> train_config_fields() { return kFields; }

ordered_json to_json(const TrainConfig& c) {
  ordered_json j = {{"tl_method", std::string(to_string(c.tl_method))},
                    {"base_model_id", c.base_model_id},
                    {"dataset_id", c.dataset_id}};
  if (c.source_dataset_id) j["source_dataset_id"] = *c.source_dataset_id;
  if (c.graph) j["graph"] = graph::to_json(*c.graph);
  j["aug"] = features::to_json(c.aug);
  if (c.aug_preset) j["aug_preset"] = *c.aug_preset;
  j["lr"] = c.lr;
  j["momentum"] = c.momentum;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["frozen_layers"] = c.frozen_layers;
  j["kd_temperature"] = c.kd_temperature;
  j["kd_alpha"] = c.kd_alpha;
  j["mmd_weight"] = c.mmd_weight;
  j["mmd_gamma"] = c.mmd_gamma;
  j["boosting_rounds"] = c.boosting_rounds;
  j["seed"] = c.seed;
  return j;
}

TrainConfig merge_partial(TrainConfig c, const nlohmann::json& j) {
  if (!j.is_object()) invalid("/", "expected object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
      invalid("/" + key, "unknown field");
    }
  }
  if (j.contains("tl_method")) {
    c.tl_method = tl_method_from_string(read<std::string>(j, "tl_method"));
  }
  if (j.contains("base_model_id")) c.base_model_id = read<std::string>(j, "base_model_id");
  if (j.contains("teacher_model_id")) c.base_model_id = read<std::string>(j, "teacher_model_id");
  if (j.contains("dataset_id")) c.dataset_id = read<std::string>(j, "dataset_id");
  if (j.contains("source_dataset_id")) {
    if (j["source_dataset_id"].is_null()) {
      c.source_dataset_id.reset();
    } else {
      c.source_dataset_id = read<std::string>(j, "source_dataset_id");
    }
  }
  if (j.contains("graph") && !j["graph"].is_null()) {
    try {
      c.graph = graph::graph_from_json(j["graph"], "/graph");
    } catch (const Error& e) {
      invalid(e.details().value("path", "/graph"), e.details().value("reason", e.what()));
    }
  }
  if (j.contains("aug_preset") && !j["aug_preset"].is_null()) {
    c.aug_preset = read<std::string>(j, "aug_preset");
    try {
      c.aug = features::augmentation_preset(*c.aug_preset);
    } catch (const Error& e) {
      invalid("/aug_preset", e.what());
    }
  }
  if (j.contains("aug")) {
    try {
      c.aug = features::augmentation_from_json(j["aug"]);
    } catch (const Error& e) {
      invalid(e.details().value("path", "/aug"), e.what());
    }
  }
  if (j.contains("lr")) c.lr = read<double>(j, "lr");
  if (j.contains("momentum")) c.momentum = read<double>(j, "momentum");
  if (j.contains("epochs")) c.epochs = read<int>(j, "epochs");
  if (j.contains("batch_size")) c.batch_size = read<int>(j, "batch_size");
  if (j.contains("frozen_layers")) c.frozen_layers = read<int>(j, "frozen_layers");
  if (j.contains("kd_temperature")) c.kd_temperature = read<double>(j, "kd_temperature");
  if (j.contains("kd_alpha")) c.kd_alpha = read<double>(j, "kd_alpha");
  if (j.contains("mmd_weight")) c.mmd_weight = read<double>(j, "mmd_weight");
  if (j.contains("mmd_gamma")) c.mmd_gamma = read<double>(j, "mmd_gamma");
  if (j.contains("boosting_rounds")) c.boosting_rounds = read<int>(j, "boosting_rounds");
  if (j.contains("seed")) c.seed = read<std::uint64_t>(j, "seed");
  return c;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) invalid("/", "expected object");
  if (!j.contains("dataset_id")) invalid("/dataset_id", "missing required field");
  TrainConfig c = merge_partial(TrainConfig{}, j);
  validate(c);
  return c;
}

void validate(const TrainConfig& c) {
  if (c.dataset_id.empty()) invalid("/dataset_id", "must be non-empty");
  if (c.base_model_id.empty() && !c.graph) {
    invalid("/base_model_id", "a base model or an explicit graph is required");
  }
  if (!std::isfinite(c.lr) || c.lr <= 0.0) invalid("/lr", "must be > 0");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) invalid("/momentum", "must lie in [0,1)");
  if (c.epochs < 1) invalid("/epochs", "must be >= 1");
  if (c.batch_size < 1) invalid("/batch_size", "must be >= 1");
  if (c.frozen_layers < 0) invalid("/frozen_layers", "must be >= 0");
  if (!(c.kd_temperature > 0.0) || !std::isfinite(c.kd_temperature)) {
    invalid("/kd_temperature", "must be > 0");
  }
  if (!(c.kd_alpha >= 0.0 && c.kd_alpha <= 1.0)) invalid("/kd_alpha", "must lie in [0,1]");
  if (!(c.mmd_weight >= 0.0) || !std::isfinite(c.mmd_weight)) {
    invalid("/mmd_weight", "must be >= 0");
  }
  if (!std::isfinite(c.mmd_gamma)) invalid("/mmd_gamma", "must be finite");
  if (c.boosting_rounds < 1) invalid("/boosting_rounds", "must be >= 1");
  try {
    features::validate(c.aug);
  } catch (const Error& e) {
    invalid(e.details().value("path", "/aug"), e.what());
  }
  if (c.tl_method == TlMethod::kKnowledgeDistill && c.base_model_id.empty()) {
    invalid("/base_model_id", "knowledge distillation needs a teacher model");
  }
}

std::string config_hash(const TrainConfig& c) { return sha256_hex(to_json(c).dump()); }

ordered_json to_json(const ValidationReport& r) {
  return {{"accuracy", r.accuracy},
          {"train_time_s", r.train_time_s},
          {"inference_latency_ms", r.inference_latency_ms},
          {"params", r.params},
          {"epochs_completed", r.epochs_completed},
          {"config", to_json(r.config)},
          {"evaluator", r.evaluator == EvaluatorKind::kReal ? "real" : "simulated"}};
}

ValidationReport report_from_json(const nlohmann::json& j) {
  ValidationReport r;
  r.accuracy = j.at("accuracy").get<double>();
  r.train_time_s = j.at("train_time_s").get<double>();
  r.inference_latency_ms = j.at("inference_latency_ms").get<double>();
  r.params = j.at("params").get<std::int64_t>();
  r.epochs_completed = j.at("epochs_completed").get<int>();
  r.config = merge_partial(TrainConfig{}, j.at("config"));
  r.evaluator = j.at("evaluator").get<std::string>() == "simulated" ? EvaluatorKind::kSimulated
                                                                    : EvaluatorKind::kReal;
  return r;
}

}  // namespace modelps::trainer
