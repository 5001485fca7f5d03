#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "modelps/error.h"
#include "modelps/graph/draft.h"
#include "modelps/service/http_server.h"
#include "modelps/service/service.h"
#include "support/support.h"

namespace modelps::service {
namespace {

using nlohmann::json;

ApiConfig test_config(const testing::TempDir& dir) {
  ApiConfig c;
  c.store_dir = dir.path() / "store";
  c.validate_budget_s = 2.0;
  c.trial_budget_s = 0.5;
  c.genie_evaluator = "simulated";
  return c;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

json train_body(const std::string& base, int epochs) {
  return {{"tl_method", "fine_tune"}, {"base_model_id", base}, {"dataset_id", "blobs-target"},
          {"epochs", epochs}, {"frozen_layers", 1}, {"lr", 0.05}};
}

TEST(Service, BootSeedsOnceAndIsIdempotent) {
  testing::TempDir dir;
  std::string hash;
  {
    Service svc(test_config(dir));
    EXPECT_EQ(svc.demo_models().size(), 4u);
    EXPECT_EQ(svc.list_models(json::object()).size(), 4u);
    EXPECT_EQ(svc.history().size(), 3u);
    EXPECT_GE(svc.list_datasets().size(), 7u);
    for (const char* sub : {"blobs", "datasets", "jobs", "checkpoints"}) {
      EXPECT_TRUE(std::filesystem::is_directory(dir.path() / "store" / sub)) << sub;
    }
    hash = svc.state_hash();
  }
  Service again(test_config(dir));
  EXPECT_EQ(again.list_models(json::object()).size(), 4u);
  EXPECT_EQ(again.history().size(), 3u);
  EXPECT_EQ(again.state_hash(), hash);
}

TEST(Service, UnseededStoreStillHasDatasets) {
  testing::TempDir dir;
  auto cfg = test_config(dir);
  cfg.seed_demo = false;
  Service svc(cfg);
  EXPECT_TRUE(svc.list_models(json::object()).empty());
  EXPECT_GE(svc.list_datasets().size(), 7u);
}

TEST(Service, PublishErrorsLeaveStoreUntouched) {
  testing::TempDir dir;
  Service svc(test_config(dir));
  const auto base = svc.get_model(svc.demo_models()[0]);
  const auto before = svc.state_hash();

  json body = {{"name", "x"}, {"task", "tabular_classification"}, {"graph", base["graph"]}};
  EXPECT_EQ(code_of([&] { svc.publish(body); }), ErrorCode::kMissingMetadata);
  json bad_graph = body;
  bad_graph["metadata"] = base["metadata"];
  bad_graph["graph"]["edges"].push_back({"prob", "fc1"});
  EXPECT_EQ(code_of([&] { svc.publish(bad_graph); }), ErrorCode::kInvalidGraph);
  json bad_blob = body;
  bad_blob["metadata"] = base["metadata"];
  bad_blob["weights_base64"] = "AAAA";
  EXPECT_NE(code_of([&] { svc.publish(bad_blob); }), ErrorCode::kInternal);
  EXPECT_EQ(code_of([&] { svc.get_model("nope"); }), ErrorCode::kUnknownModel);
  EXPECT_EQ(code_of([&] { svc.start_job(json{{"base_model_id", "nope"}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([&] { svc.validate(json{{"config", {{"lr", -1}}}}); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(svc.state_hash(), before);

  json ok = body;
  ok["metadata"] = base["metadata"];
  ok["metadata"]["parent_model_id"] = base["model_id"];
  const auto rec = svc.publish(ok);
  EXPECT_EQ(svc.get_model(rec["model_id"]), rec);
  const auto chain = svc.lineage(rec["model_id"]);
  ASSERT_EQ(chain.size(), 2u);
  EXPECT_EQ(chain[0]["model_id"], base["model_id"]);
  EXPECT_NE(svc.state_hash(), before);
}

TEST(Service, DraftOptimisticLock) {
  testing::TempDir dir;
  Service svc(test_config(dir));
  const auto base = svc.get_model(svc.demo_models()[0]);
  json draft = {{"schema_version", std::string(graph::kDraftSchemaVersion)},
                {"base_model_id", base["model_id"]},
                {"revision", 0},
                {"author", "ana"},
                {"graph", base["graph"]},
                {"pending_config", json{{"epochs", 2}}}};
  const auto first = svc.save_draft({{"draft", draft}});
  const std::string id = first["draft_id"];
  EXPECT_EQ(first["draft"]["revision"], 1);
  EXPECT_TRUE(first["shapes"].is_object() || first["shapes"].is_array());

  auto edit = first["draft"];
  const auto a = svc.save_draft({{"draft", edit}, {"draft_id", id}, {"owner", "ana"}});
  EXPECT_EQ(a["draft"]["revision"], 2);
  const auto before = svc.state_hash();
  EXPECT_EQ(code_of([&] { svc.save_draft({{"draft", edit}, {"draft_id", id}, {"owner", "bo"}}); }),
            ErrorCode::kStaleRevision);
  EXPECT_EQ(svc.state_hash(), before);
  EXPECT_EQ(svc.get_draft(id)["draft"]["revision"], 2);
  EXPECT_EQ(code_of([&] { svc.get_draft("missing"); }), ErrorCode::kUnknownDraft);
}

TEST(Service, TrainingAutoPublishesWithLineage) {
  testing::TempDir dir;
  Service svc(test_config(dir));
  const std::string base = svc.demo_models()[0];
  const auto job = svc.start_job(train_body(base, 2));
  const std::string id = job["job_id"];
  ASSERT_TRUE(svc.wait_job(id, 60));
  const auto done = svc.get_job(id);
  ASSERT_EQ(done["state"], "Completed") << done.dump();
  const std::string published = done["published_model_id"];
  const auto model = svc.get_model(published);
  EXPECT_EQ(model["metadata"]["parent_model_id"], base);
  EXPECT_EQ(model["author"], "job:" + id);
  const auto chain = svc.lineage(published);
  ASSERT_EQ(chain.size(), 2u);
  EXPECT_EQ(chain[0]["model_id"], base);
  EXPECT_EQ(chain[1]["model_id"], published);
  for (const auto& n : model["graph"]["nodes"]) EXPECT_FALSE(n["frozen"].get<bool>());
  EXPECT_EQ(svc.history().snapshot().back().source, "job");

  // A restarted service serves the job from its persisted document.
  Service again(test_config(dir));
  EXPECT_EQ(again.get_job(id)["state"], "Completed");
  EXPECT_EQ(code_of([&] { again.job_action(id, "pause", json::object()); }),
            ErrorCode::kIllegalTransition);
}

TEST(Service, DraftDrivenValidation) {
  testing::TempDir dir;
  Service svc(test_config(dir));
  const auto base = svc.get_model(svc.demo_models()[0]);
  json draft = {{"schema_version", std::string(graph::kDraftSchemaVersion)},
                {"base_model_id", base["model_id"]},
                {"revision", 0},
                {"author", "ana"},
                {"graph", base["graph"]},
                {"pending_config", json{{"epochs", 2}, {"frozen_layers", 1}}}};
  const std::string id = svc.save_draft(draft)["draft_id"];
  const auto before = svc.history().size();
  const auto report = svc.validate(
      {{"draft_id", id}, {"config", {{"dataset_id", "blobs-target"}}}, {"budget_s", 1.0}});
  EXPECT_EQ(report["evaluator"], "real");
  EXPECT_EQ(report["config"]["frozen_layers"], 1);
  EXPECT_EQ(svc.history().size(), before + 1);
  EXPECT_EQ(code_of([&] { svc.validate({{"draft_id", id}}); }), ErrorCode::kInvalidConfig);
}

TEST(Service, WorkerPoolQueuesBeyondCapacity) {
  testing::TempDir dir;
  auto cfg = test_config(dir);
  cfg.worker_count = 2;
  Service svc(cfg);
  const std::string base = svc.demo_models()[0];
  std::vector<std::string> ids;
  for (int i = 0; i < 3; ++i) ids.push_back(svc.start_job(train_body(base, 5000))["job_id"]);
  auto state = [&](const std::string& id) { return svc.get_job(id)["state"].get<std::string>(); };
  for (int spin = 0; spin < 500 && (state(ids[0]) != "Running" || state(ids[1]) != "Running");
       ++spin) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  EXPECT_EQ(state(ids[0]), "Running");
  EXPECT_EQ(state(ids[1]), "Running");
  EXPECT_EQ(state(ids[2]), "Queued");
  for (const auto& id : ids) svc.job_action(id, "terminate", json::object());
  for (const auto& id : ids) {
    ASSERT_TRUE(svc.wait_job(id, 30));
    EXPECT_EQ(state(id), "Terminated");
  }
}

TEST(Service, GenieTicketsAreReadOnly) {
  testing::TempDir dir;
  Service svc(test_config(dir));
  json req = {{"task", "tabular_classification"}, {"deployment", "cloud"},
              {"dataset_id", "blobs-target"}, {"explore_budget", 9}, {"top_k", 5},
              {"constraints", {{{"metric", "accuracy"}, {"op", ">="}, {"value", 0.5}}}},
              {"targets", {{{"metric", "latency_ms"}, {"direction", "minimize"}}}}};
  auto [ticket, final] = svc.genie(req, false);
  ASSERT_FALSE(final) << ticket.dump();
  const std::string id = ticket["job_id"];
  EXPECT_EQ(ticket["kind"], "genie");
  EXPECT_EQ(code_of([&] { svc.job_action(id, "pause", json::object()); }),
            ErrorCode::kIllegalTransition);
  ASSERT_TRUE(svc.wait_job(id, 60));
  const auto done = svc.get_job(id);
  ASSERT_EQ(done["state"], "Completed") << done.dump();
  EXPECT_TRUE(done["result"]["explored"].get<bool>());
  EXPECT_FALSE(done["result"]["results"].empty());

  req["dataset_id"] = "nope";
  EXPECT_EQ(code_of([&] { svc.genie(req, false); }), ErrorCode::kUnknownDataset);
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    svc_ = std::make_unique<Service>(test_config(dir_));
    server_ = std::make_unique<HttpServer>(*svc_);
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(120, 0);
  }
  void TearDown() override {
    server_->stop();
    thread_.join();
  }
  json post(const std::string& path, const json& body, int* status) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) return json();
    *status = res->status;
    return json::parse(res->body);
  }
  json get(const std::string& path, int* status) {
    auto res = client_->Get(path);
    if (!res) return json();
    *status = res->status;
    return json::parse(res->body);
  }

  testing::TempDir dir_;
  std::unique_ptr<Service> svc_;
  std::unique_ptr<HttpServer> server_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpTest, ModelsAndErrorMapping) {
  int status = 0;
  const auto models = get("/models", &status);
  EXPECT_EQ(status, 200);
  ASSERT_EQ(models.size(), 4u);
  EXPECT_EQ(get("/models?task=text_classification", &status).size(), 1u);
  EXPECT_EQ(get("/models?min_accuracy=2", &status).size(), 0u);

  auto err = get("/models/nope", &status);
  EXPECT_EQ(status, 404);
  EXPECT_EQ(err["error"], "UnknownModel");
  EXPECT_EQ(get("/jobs/nope", &status)["error"], "UnknownJob");
  EXPECT_EQ(status, 404);
  EXPECT_EQ(get("/drafts/nope", &status)["error"], "UnknownDraft");
  EXPECT_EQ(status, 404);

  err = post("/validate", {{"config", {{"lr", 0}}}}, &status);
  EXPECT_EQ(status, 400);
  EXPECT_EQ(err["error"], "InvalidConfig");
  auto res = client_->Post("/models", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  const std::string base = models[0]["model_id"];
  const auto lineage = get("/models/" + base + "/lineage", &status);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(lineage.size(), 1u);
}

TEST_F(HttpTest, DraftConflictIs409) {
  int status = 0;
  const auto base = get("/models/" + svc_->demo_models()[0], &status);
  json draft = {{"schema_version", std::string(graph::kDraftSchemaVersion)},
                {"base_model_id", base["model_id"]},
                {"revision", 0},
                {"author", "ana"},
                {"graph", base["graph"]},
                {"pending_config", json::object()}};
  const auto saved = post("/drafts", {{"draft", draft}}, &status);
  ASSERT_EQ(status, 200) << saved.dump();
  const std::string id = saved["draft_id"];
  post("/drafts", {{"draft", saved["draft"]}, {"draft_id", id}}, &status);
  EXPECT_EQ(status, 200);
  const auto conflict = post("/drafts", {{"draft", saved["draft"]}, {"draft_id", id}}, &status);
  EXPECT_EQ(status, 409);
  EXPECT_EQ(conflict["error"], "StaleRevision");
  EXPECT_EQ(get("/drafts/" + id, &status)["draft"]["revision"], 2);
}

TEST_F(HttpTest, JobLifecycle) {
  int status = 0;
  const std::string base = svc_->demo_models()[0];
  const auto job = post("/jobs", train_body(base, 5000), &status);
  EXPECT_EQ(status, 202);
  const std::string id = job["job_id"];
  post("/jobs/" + id + "/pause", json::object(), &status);
  EXPECT_EQ(status, 200);
  ASSERT_TRUE(svc_->wait_job(id, 30));
  EXPECT_EQ(get("/jobs/" + id, &status)["state"], "Paused");
  post("/jobs/" + id + "/terminate", json::object(), &status);
  EXPECT_EQ(status, 200);
  const auto again = post("/jobs/" + id + "/resume", json::object(), &status);
  EXPECT_EQ(status, 409);
  EXPECT_EQ(again["error"], "IllegalTransition");

  const auto quick = post("/jobs", train_body(base, 1), &status);
  const auto done = get("/jobs/" + quick["job_id"].get<std::string>() + "?wait=60", &status);
  EXPECT_EQ(done["state"], "Completed");
  EXPECT_FALSE(done["published_model_id"].is_null());
}

TEST_F(HttpTest, GenieAndDatasets) {
  int status = 0;
  json req = {{"task", "tabular_classification"}, {"dataset_id", "blobs-target"},
              {"explore_budget", 9},
              {"constraints", {{{"metric", "accuracy"}, {"op", ">="}, {"value", 0.5}}}},
              {"targets", {{{"metric", "accuracy"}, {"direction", "maximize"}}}}};
  const auto ticket = post("/genie", req, &status);
  EXPECT_EQ(status, 202) << ticket.dump();
  const auto done = get("/jobs/" + ticket["job_id"].get<std::string>() + "?wait=60", &status);
  EXPECT_EQ(done["state"], "Completed");
  const auto sync = post("/genie?sync=1", req, &status);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(sync["tl_method"], "fine_tune");

  json rows = json::array(), labels = json::array();
  for (int i = 0; i < 20; ++i) {
    rows.push_back({i % 2, i % 3});
    labels.push_back(i % 2);
  }
  const auto ds = post("/datasets",
                       {{"dataset_id", "tiny"}, {"name", "tiny"},
                        {"samples", {{"features", rows}, {"labels", labels}}}},
                       &status);
  EXPECT_EQ(status, 201) << ds.dump();
  EXPECT_EQ(get("/datasets", &status).size(), svc_->list_datasets().size());
  const auto preview =
      post("/datasets/blobs-target/preview", {{"aug_preset", "noise-0.05"}, {"k", 3}}, &status);
  EXPECT_EQ(status, 200) << preview.dump();
  EXPECT_EQ(preview["pairs"].size(), 3u);
  post("/datasets/nope/preview", json::object(), &status);
  EXPECT_EQ(status, 404);
}

}  // namespace
}  // namespace modelps::service
