#pragma once

// cpp-httplib binding for service::Service.

#include <memory>
#include <string>

#include <httplib.h>

#include "graphsearch/service.hpp"

namespace graphsearch::service {

inline std::unique_ptr<httplib::Server> make_http_server(Service& service) {
  auto server = std::make_unique<httplib::Server>();
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.params.emplace(k, v);
    r.body = req.body;
    auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server->Get(R"(/.*)", forward);
  server->Post(R"(/.*)", forward);
  server->Put(R"(/.*)", forward);
  server->Delete(R"(/.*)", forward);
  return server;
}

}  // namespace graphsearch::service
