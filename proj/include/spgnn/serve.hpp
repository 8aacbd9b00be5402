#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "spgnn/trainer.hpp"

namespace httplib {
class Server;
}

namespace spgnn {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_payload_bytes = 8 * 1024 * 1024;
  int default_k = 3;
};

/// Read-only inference service over an immutable checkpoint.
///   POST /recommend?k=N  body: PPM image bytes -> RecommendResult JSON
///   GET  /healthz        -> model metadata JSON
/// The checkpoint must outlive the server.
std::unique_ptr<httplib::Server> make_server(const Checkpoint& checkpoint,
                                             const ServeOptions& options);

/// Blocking CLI entry point; returns once the listener stops.
int run_server(const Checkpoint& checkpoint, const ServeOptions& options);

}  // namespace spgnn
