#include "weakseg/service.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "weakseg/config.hpp"
#include "weakseg/error.hpp"
#include "weakseg/eval.hpp"
#include "weakseg/image_io.hpp"
#include "weakseg/version.hpp"
#include "weakseg/weaklabel.hpp"

namespace weakseg::service {

namespace {

using ojson = nlohmann::ordered_json;

// Per-region Dice only looks at the region's annotation box grown by this.
constexpr int kRegionBoxMargin = 8;

Response error_response(int status, std::string_view field, const std::string& message, int region = -1) {
  ojson doc;
  doc["error"] = message;
  doc["field"] = field;
  if (region >= 0) doc["region"] = region;
  return {status, doc.dump()};
}

BinaryMask restrict_to(const BinaryMask& mask, const Box& box) {
  BinaryMask out(mask.dims());
  for (int r = box.row_min; r <= box.row_max; ++r)
    for (int c = box.col_min; c <= box.col_max; ++c)
      if (mask.get(r, c)) out.set(r, c);
  return out;
}

GrayImage decode_field(const nlohmann::json& doc, const char* field) {
  const auto& value = doc.at(field);
  if (!value.is_string()) throw InvalidParameter(std::string("\"") + field + "\" must be a base64 string");
  const auto bytes = base64_decode(value.get<std::string>());
  try {
    return decode_image(bytes);
  } catch (const IoError& e) {
    throw InvalidParameter(std::string(field) + ": " + e.what());
  }
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  if (bytes.empty()) return out;
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.starts_with("data:")) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw InvalidParameter("malformed data URL");
    text.remove_prefix(comma + 1);
  }
  std::string clean;
  clean.reserve(text.size());
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) clean.push_back(ch);
  if (clean.size() % 4 != 0) throw InvalidParameter("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  if (clean.empty()) return out;
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw InvalidParameter("invalid base64 data");
  std::size_t padding = 0;
  if (clean.back() == '=') ++padding;
  if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

Response handle_health(const ServiceOptions& options) {
  ojson doc;
  doc["status"] = "ok";
  doc["version"] = version();
  doc["defaults"] = to_json(options.defaults);
  return {200, doc.dump()};
}

Response handle_preview(std::string_view body, const ServiceOptions& options) {
  if (body.size() > options.max_body_bytes) {
    return error_response(413, "body", "request body exceeds " + std::to_string(options.max_body_bytes) + " bytes");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body.begin(), body.end());
  } catch (const nlohmann::json::parse_error& e) {
    return error_response(400, "body", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) return error_response(400, "body", "request must be a JSON object");
  for (const char* required : {"image", "labels"}) {
    if (!doc.contains(required)) return error_response(400, required, std::string("missing \"") + required + "\"");
  }

  GrayImage image;
  try {
    image = decode_field(doc, "image");
  } catch (const Error& e) {
    return error_response(400, "image", e.what());
  }

  WeakLabelSet labels;
  try {
    const auto& l = doc.at("labels");
    labels = l.is_string() ? parse_weak_labels(std::string_view(l.get_ref<const std::string&>())) : parse_weak_labels(l);
  } catch (const LabelError& e) {
    return error_response(400, "labels", e.what(), e.region_index());
  }
  if (labels.dims != image.dims()) {
    return error_response(400, "labels",
                          "labels are for " + std::to_string(labels.dims.height) + "x" +
                              std::to_string(labels.dims.width) + " but the image is " +
                              std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }

  GrowConfig cfg;
  try {
    cfg = merge_config(options.defaults, doc.contains("config") ? doc.at("config") : nlohmann::json());
  } catch (const InvalidParameter& e) {
    return error_response(400, "config", e.what());
  }

  std::optional<BinaryMask> reference;
  if (doc.contains("reference") && !doc.at("reference").is_null()) {
    try {
      reference = image_to_mask(decode_field(doc, "reference"));
    } catch (const Error& e) {
      return error_response(400, "reference", e.what());
    }
    if (reference->dims() != image.dims()) return error_response(400, "reference", "reference size differs from image");
  }

  PseudoLabelResult result;
  try {
    result = generate_pseudo_label(image, labels, cfg);
  } catch (const ConstraintGeometryError& e) {
    return error_response(422, "labels", e.what(), e.region_index());
  } catch (const LabelError& e) {
    return error_response(400, "labels", e.what(), e.region_index());
  } catch (const InvalidParameter& e) {
    return error_response(400, "config", e.what());
  }

  ojson out;
  out["mask"] = base64_encode(encode_png(mask_to_image(result.mask)));
  out["height"] = image.height();
  out["width"] = image.width();
  out["empty"] = result.empty;
  if (reference) {
    ojson d;
    d["overall"] = dice(result.mask, *reference);
    d["regions"] = ojson::array();
    for (std::size_t i = 0; i < labels.regions.size(); ++i) {
      const Box box = bounding_box(labels.regions[i], kRegionBoxMargin, image.dims());
      const BinaryMask mine = restrict_to(close(result.region_masks[i], cfg.close_kernel, cfg.close_iterations), box);
      ojson r;
      r["kind"] = std::string(to_string(labels.regions[i].kind));
      r["dice"] = dice(mine, restrict_to(*reference, box));
      d["regions"].push_back(std::move(r));
    }
    out["dice"] = std::move(d);
  }
  const auto& t = result.timings;
  out["timings_ms"] = {{"smooth", t.smooth_ms},   {"backbone", t.backbone_ms}, {"fill", t.fill_ms},
                       {"constraint", t.constraint_ms}, {"grow", t.grow_ms}, {"close", t.close_ms},
                       {"total", t.total_ms}};
  return {200, out.dump()};
}

struct PreviewServer::Impl {
  ServiceOptions options;
  httplib::Server server;
};

PreviewServer::PreviewServer(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& srv = impl_->server;
  const ServiceOptions& opts = impl_->options;

  srv.set_payload_max_length(opts.max_body_bytes);
  if (!opts.cors_origin.empty()) {
    srv.set_default_headers({{"Access-Control-Allow-Origin", opts.cors_origin},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
  }
  srv.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.Get("/v1/health", [&opts](const httplib::Request&, httplib::Response& res) {
    const Response r = handle_health(opts);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  srv.Post("/v1/preview", [&opts](const httplib::Request& req, httplib::Response& res) {
    Response r;
    try {
      r = handle_preview(req.body, opts);
    } catch (const std::exception& e) {
      r = error_response(500, "server", e.what());
    }
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
}

PreviewServer::~PreviewServer() { stop(); }

bool PreviewServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int PreviewServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool PreviewServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void PreviewServer::stop() {
  if (impl_) impl_->server.stop();
}

void PreviewServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace weakseg::service
