#include "ace/http_api.hpp"

#include <httplib.h>

namespace ace {

struct HttpServer::Impl {
  CoachService &service;
  httplib::Server server;
  explicit Impl(CoachService &s) : service(s) {}
};

HttpServer::HttpServer(CoachService &service) : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request &req, httplib::Response &res) {
    const auto out = dispatch(impl_->service, req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

} // namespace ace
