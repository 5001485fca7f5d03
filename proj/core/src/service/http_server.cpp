#include "modelps/service/http_server.h"

#include <httplib.h>

#include "modelps/error.h"

namespace modelps::service {
using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownModel:
    case ErrorCode::kUnknownDraft:
    case ErrorCode::kUnknownDataset:
    case ErrorCode::kUnknownJob:
    case ErrorCode::kUnknownNode:
      return 404;
    case ErrorCode::kStaleRevision:
    case ErrorCode::kIllegalTransition:
      return 409;
    default:
      return is_user_error(code) ? 400 : 500;
  }
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed JSON body: ") + e.what(),
                {{"path", "/"}, {"byte", e.byte}});
  }
}

// Query strings carry text; numbers and booleans are recovered by parsing.
json query_json(const httplib::Request& req) {
  json q = json::object();
  for (const auto& [k, v] : req.params) {
    if (k == "task" || k == "name" || k == "parent_model_id" || k == "sort") {
      q[k] = v;
      continue;
    }
    try {
      q[k] = json::parse(v);
    } catch (const json::parse_error&) {
      q[k] = v;
    }
  }
  return q;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      reply(res, http_status(e.code()), e.to_json());
    } catch (const std::exception& e) {
      reply(res, 500, Error(ErrorCode::kInternal, e.what()).to_json());
    }
  };
}

}  // namespace

HttpServer::HttpServer(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::routes() {
  auto& s = *server_;
  Service& svc = service_;

  s.Post("/models", guarded([&svc](const auto& req, auto& res) {
    reply(res, 201, svc.publish(parse_body(req)));
  }));
  s.Get("/models", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.list_models(query_json(req)));
  }));
  s.Get(R"(/models/([^/]+)/lineage)", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.lineage(req.matches[1]));
  }));
  s.Get(R"(/models/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.get_model(req.matches[1]));
  }));

  s.Post("/drafts", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.save_draft(parse_body(req)));
  }));
  s.Get(R"(/drafts/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.get_draft(req.matches[1]));
  }));

  s.Post("/validate", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.validate(parse_body(req)));
  }));

  s.Post("/jobs", guarded([&svc](const auto& req, auto& res) {
    reply(res, 202, svc.start_job(parse_body(req)));
  }));
  s.Post(R"(/jobs/([^/]+)/(pause|resume|terminate|to_device))",
         guarded([&svc](const auto& req, auto& res) {
           reply(res, 200, svc.job_action(req.matches[1], req.matches[2], parse_body(req)));
         }));
  s.Get(R"(/jobs/([^/]+))", guarded([&svc](const auto& req, auto& res) {
    const std::string id = req.matches[1];
    if (req.has_param("wait")) svc.wait_job(id, std::stod(req.get_param_value("wait")));
    reply(res, 200, svc.get_job(id));
  }));

  s.Get("/datasets", guarded([&svc](const auto&, auto& res) {
    reply(res, 200, svc.list_datasets());
  }));
  s.Post("/datasets", guarded([&svc](const auto& req, auto& res) {
    reply(res, 201, svc.register_dataset(parse_body(req)));
  }));
  s.Post(R"(/datasets/([^/]+)/preview)", guarded([&svc](const auto& req, auto& res) {
    reply(res, 200, svc.preview(req.matches[1], parse_body(req)));
  }));

  s.Post("/genie", guarded([&svc](const auto& req, auto& res) {
    const bool sync = req.has_param("sync") && req.get_param_value("sync") != "false";
    auto [body, final] = svc.genie(parse_body(req), sync);
    reply(res, final ? 200 : 202, body);
  }));
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host.c_str());
  } else {
    port_ = server_->bind_to_port(host.c_str(), port) ? port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::kPortInUse, "cannot bind " + host + ":" + std::to_string(port),
                {{"host", host}, {"port", port}});
  }
  return port_;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace modelps::service
