#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weakseg/pseudolabel.hpp"

namespace weakseg::service {

struct ServiceOptions {
  std::size_t max_body_bytes = 8u * 1024u * 1024u;
  /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin = "*";
  GrowConfig defaults;
};

struct Response {
  int status = 200;
  std::string body;  ///< JSON document
};

/// POST /v1/preview. Request: {"image": base64 PNG/PGM, "labels": weak-label
/// document (object or string), "config": partial grow config, "reference":
/// optional base64 mask}. Response: {"mask": base64 PNG, "height", "width",
/// "empty", "dice"?, "timings_ms"}. Client mistakes map to 400 (or 413 for
/// oversized bodies), constraint outlines that cross themselves to 422.
Response handle_preview(std::string_view body, const ServiceOptions& options);

/// GET /v1/health: {"status", "version", "defaults"}.
Response handle_health(const ServiceOptions& options);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Accepts an optional "data:...;base64," prefix and embedded whitespace.
/// Throws InvalidParameter on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// HTTP/1.1 front end for the handlers above. Each request is handled in
/// isolation; the server keeps no state between requests.
class PreviewServer {
 public:
  explicit PreviewServer(ServiceOptions options = {});
  ~PreviewServer();
  PreviewServer(const PreviewServer&) = delete;
  PreviewServer& operator=(const PreviewServer&) = delete;

  /// Blocks until stop() is called. Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_to_any_port(const std::string& host);
  /// Serves on a port obtained from bind_to_any_port; blocks.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace weakseg::service
