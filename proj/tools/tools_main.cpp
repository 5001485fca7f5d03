// Command line front end. Every subcommand prints JSON on stdout; errors go
// to stderr as {"error", "message", "details"}.
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "modelps/error.h"
#include "modelps/service/http_server.h"
#include "modelps/service/service.h"
#include "modelps/util.h"

namespace {

using modelps::Error;
using modelps::ErrorCode;
using nlohmann::json;
namespace svc = modelps::service;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kInvalidArgument, "cannot read '" + path + "'", {{"path", path}});
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "malformed JSON in '" + path + "': " + e.what(),
                {{"path", path}, {"byte", e.byte}});
  }
}

svc::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model repository, trainer and recommendation service"};
  app.require_subcommand(1);
  std::string config_path;
  std::string store;
  int workers = 0;
  app.add_option("--config", config_path, "service config JSON");
  app.add_option("--store", store, "store directory (overrides config)");
  app.add_option("--workers", workers, "worker count (overrides config)");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string host;
  int port = -1;
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  auto* publish = app.add_subcommand("publish", "publish a model");
  std::string graph_path, weights_path, meta_path, name, task, author;
  publish->add_option("graph", graph_path)->required();
  publish->add_option("weights", weights_path)->required();
  publish->add_option("--meta", meta_path)->required();
  publish->add_option("--name", name);
  publish->add_option("--task", task);
  publish->add_option("--author", author);

  auto* list_models = app.add_subcommand("list-models", "list or filter models");
  std::string q_task, q_name, q_sort;
  double q_min_acc = -1, q_max_lat = -1;
  list_models->add_option("--task", q_task);
  list_models->add_option("--name", q_name);
  list_models->add_option("--min-accuracy", q_min_acc);
  list_models->add_option("--max-latency-ms", q_max_lat);
  list_models->add_option("--sort", q_sort);

  auto* lineage = app.add_subcommand("lineage", "ancestors of a model, root first");
  std::string model_id;
  lineage->add_option("model_id", model_id)->required();

  auto* save_draft = app.add_subcommand("save-draft", "save an editing draft");
  std::string draft_path;
  save_draft->add_option("draft", draft_path)->required();

  auto* validate = app.add_subcommand("validate", "time-boxed validation");
  std::string cfg_path;
  double budget = -1;
  validate->add_option("config", cfg_path)->required();
  validate->add_option("--budget", budget);

  auto* train = app.add_subcommand("train", "run a training job to completion");
  std::string train_cfg;
  double train_timeout = 3600;
  train->add_option("config", train_cfg)->required();
  train->add_option("--timeout", train_timeout);

  auto* job = app.add_subcommand("job", "control a job");
  std::string job_id, job_action;
  std::string device;
  job->add_option("id", job_id)->required();
  job->add_option("action", job_action)
      ->required()
      ->check(CLI::IsMember({"pause", "resume", "terminate", "status", "to_device"}));
  job->add_option("--device", device);

  auto* genie = app.add_subcommand("genie", "recommend training configurations");
  std::string request_path;
  genie->add_option("request", request_path)->required();

  auto* datasets = app.add_subcommand("datasets", "dataset catalogue");
  datasets->require_subcommand(1);
  datasets->add_subcommand("list");
  auto* reg = datasets->add_subcommand("register");
  std::string dataset_path;
  reg->add_option("spec", dataset_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    svc::ApiConfig cfg = config_path.empty() ? svc::ApiConfig{} : svc::load_api_config(config_path);
    svc::apply_env_overrides(cfg);
    if (!store.empty()) cfg.store_dir = store;
    if (workers > 0) cfg.worker_count = workers;
    if (!host.empty()) cfg.host = host;
    if (port >= 0) cfg.port = port;

    json out;
    if (*serve) {
      svc::Service service(cfg);
      svc::HttpServer server(service);
      const int bound = server.bind(cfg.host, cfg.port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << json{{"listening", cfg.host + ":" + std::to_string(bound)}}.dump() << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }

    svc::Service service(cfg);
    if (*publish) {
      json body = {{"graph", read_json(graph_path)}, {"metadata", read_json(meta_path)}};
      json meta = body["metadata"];
      body["name"] = name.empty() ? meta.value("name", "") : name;
      body["task"] = task.empty() ? meta.value("task", "") : task;
      body["author"] = author.empty() ? meta.value("author", "") : author;
      body["metadata"].erase("name");
      body["metadata"].erase("task");
      body["metadata"].erase("author");
      body["weights_base64"] = modelps::base64_encode(modelps::read_file_bytes(weights_path));
      out = service.publish(body);
    } else if (*list_models) {
      json q = json::object();
      if (!q_task.empty()) q["task"] = q_task;
      if (!q_name.empty()) q["name"] = q_name;
      if (q_min_acc >= 0) q["min_accuracy"] = q_min_acc;
      if (q_max_lat >= 0) q["max_latency_ms"] = q_max_lat;
      if (!q_sort.empty()) q["sort"] = q_sort;
      out = service.list_models(q);
    } else if (*lineage) {
      out = service.lineage(model_id);
    } else if (*save_draft) {
      out = service.save_draft(read_json(draft_path));
    } else if (*validate) {
      json body = read_json(cfg_path);
      if (!body.contains("config") && !body.contains("draft_id")) body = {{"config", body}};
      if (budget >= 0) body["budget_s"] = budget;
      out = service.validate(body);
    } else if (*train) {
      json started = service.start_job(read_json(train_cfg));
      const std::string id = started["job_id"];
      service.wait_job(id, train_timeout);
      out = service.get_job(id);
    } else if (*job) {
      if (job_action == "status") {
        out = service.get_job(job_id);
      } else {
        json body = json::object();
        if (!device.empty()) body["device"] = device;
        out = service.job_action(job_id, job_action, body);
        if (job_action == "resume") {
          // Resumed work belongs to this process; stay until it settles.
          service.wait_job(job_id, train_timeout);
          out = service.get_job(job_id);
        }
      }
    } else if (*genie) {
      out = service.genie(read_json(request_path), true).first;
    } else if (*datasets) {
      if (datasets->got_subcommand("list")) {
        out = service.list_datasets();
      } else {
        out = service.register_dataset(read_json(dataset_path));
      }
    }
    std::cout << out.dump(2) << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << e.to_json().dump() << std::endl;
    return modelps::is_user_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << Error(ErrorCode::kInternal, e.what()).to_json().dump() << std::endl;
    return 2;
  }
}
