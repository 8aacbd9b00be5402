#include "spgnn/serve.hpp"

#include <cstdio>
#include <iostream>

#include <httplib.h>
#include <json.hpp>

#include "spgnn/errors.hpp"
#include "spgnn/recommend.hpp"

namespace spgnn {

using nlohmann::json;

namespace {

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

void write_error(httplib::Response& res, int status, const Error& e) {
  res.status = status;
  res.set_content(json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump(),
                  "application/json");
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(const Checkpoint& checkpoint,
                                             const ServeOptions& options) {
  auto server = std::make_unique<httplib::Server>();
  server->set_payload_max_length(options.max_payload_bytes);

  server->Get("/healthz", [&checkpoint](const httplib::Request&, httplib::Response& res) {
    json body{
        {"status", "ok"},
        {"apis", checkpoint.vocab_names},
        {"feature_dim", checkpoint.model.feature_dim},
        {"embedding_dim", checkpoint.model.embedding_dim},
        {"input", {checkpoint.model.input_height, checkpoint.model.input_width}},
        {"epoch", checkpoint.epoch},
        {"fingerprint", fingerprint_hex(checkpoint.fingerprint)},
    };
    res.set_content(body.dump(), "application/json");
  });

  const int default_k = options.default_k;
  server->Post("/recommend", [&checkpoint, default_k](const httplib::Request& req,
                                                      httplib::Response& res) {
    int k = default_k;
    if (req.has_param("k")) {
      try {
        k = std::stoi(req.get_param_value("k"));
      } catch (const std::exception&) {
        write_error(res, 400, Error(ErrorCode::BadK, "k must be an integer"));
        return;
      }
    }
    try {
      const Image image = decode_ppm(req.body);
      const RecommendResult result = recommend(checkpoint, image, k);
      res.set_content(result.to_json_string(), "application/json");
    } catch (const Error& e) {
      write_error(res, 400, e);
    }
  });

  return server;
}

int run_server(const Checkpoint& checkpoint, const ServeOptions& options) {
  auto server = make_server(checkpoint, options);
  std::cerr << "serving on " << options.host << ":" << options.port << " (apis="
            << checkpoint.vocab_names.size() << ", fingerprint="
            << fingerprint_hex(checkpoint.fingerprint) << ")\n";
  const bool ok = server->listen(options.host, options.port);
  return ok ? 0 : 1;
}

}  // namespace spgnn
