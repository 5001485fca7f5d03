#pragma once

#include <memory>
#include <string>

#include "modelps/error.h"
#include "modelps/service/service.h"

namespace httplib {
class Server;
}

namespace modelps::service {

// HTTP status for an error code: 404 for unknown ids, 409 for conflicts,
// 400 for other user errors and 500 otherwise.
int http_status(ErrorCode code);

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Binds host:port (port 0 picks a free one). Throws PortInUse.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  int port() const { return port_; }

 private:
  void routes();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
};

}  // namespace modelps::service
