// weakseg command-line tool: generate, evaluate, ablate, phantom, serve.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "weakseg/config.hpp"
#include "weakseg/error.hpp"
#include "weakseg/eval.hpp"
#include "weakseg/image_io.hpp"
#include "weakseg/parallel.hpp"
#include "weakseg/phantom.hpp"
#include "weakseg/pseudolabel.hpp"
#include "weakseg/service.hpp"
#include "weakseg/version.hpp"

namespace fs = std::filesystem;
using namespace weakseg;

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

/// Grow-config flags shared by several subcommands. Values start at the
/// defaults so --help shows them; only flags actually given override the
/// config file.
struct GrowFlags {
  std::string config_path;
  double epsilon = GrowConfig{}.epsilon;
  int smooth_kernel = GrowConfig{}.smooth_kernel;
  int close_kernel = GrowConfig{}.close_kernel;
  double bezier_offset = GrowConfig{}.bezier_offset;
  int connectivity = GrowConfig{}.connectivity;
  std::string stages = "all";

  CLI::Option* o_epsilon = nullptr;
  CLI::Option* o_smooth = nullptr;
  CLI::Option* o_close = nullptr;
  CLI::Option* o_offset = nullptr;
  CLI::Option* o_conn = nullptr;
  CLI::Option* o_stages = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path,
                    "JSON config file with fields epsilon, smooth_kernel, close_kernel, close_iterations, "
                    "bezier_offset, connectivity, midpoint, include_line_in_backbone, stages.*")
        ->check(CLI::ExistingFile);
    o_epsilon = app->add_option("--epsilon", epsilon, "Growth intensity tolerance")->capture_default_str();
    o_smooth = app->add_option("--smooth-kernel", smooth_kernel, "Mean-smoothing kernel (odd)")->capture_default_str();
    o_close = app->add_option("--close-kernel", close_kernel, "Closing kernel (odd)")->capture_default_str();
    o_offset = app->add_option("--bezier-offset", bezier_offset, "Bezier control-point offset in pixels")
                   ->capture_default_str();
    o_conn = app->add_option("--connectivity", connectivity, "Growth connectivity")
                 ->check(CLI::IsMember({4, 8}))
                 ->capture_default_str();
    o_stages = app->add_option("--stages", stages,
                               "Pipeline stages: all, none, or a comma list of backbone,fill,edge_limit")
                   ->capture_default_str();
  }

  GrowConfig resolve() const {
    GrowConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    if (o_epsilon->count()) cfg.epsilon = epsilon;
    if (o_smooth->count()) cfg.smooth_kernel = smooth_kernel;
    if (o_close->count()) cfg.close_kernel = close_kernel;
    if (o_offset->count()) cfg.bezier_offset = bezier_offset;
    if (o_conn->count()) cfg.connectivity = connectivity;
    if (o_stages->count()) cfg.stages = parse_stages(stages);
    cfg.validate();
    std::cerr << "config: " << to_json(cfg).dump() << "\n";
    return cfg;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

int run_generate(const std::string& manifest_path, const std::string& out_dir, const GrowFlags& flags, int jobs) {
  const GrowConfig cfg = flags.resolve();
  const auto manifest = load_manifest(manifest_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> errors(manifest.size());
  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    const auto& entry = manifest[i];
    try {
      const Slice slice = load_slice(entry);
      const auto result = generate_pseudo_label(slice.image, slice.labels, cfg);
      write_mask(fs::path(out_dir) / (entry.image.stem().string() + "_pseudo.png"), result.mask);
      if (result.empty) std::fprintf(stderr, "warning: %s: empty pseudo-label\n", entry.image.c_str());
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  });
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::size_t failed = 0;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      std::cerr << "error: " << manifest[i].image.string() << ": " << errors[i] << "\n";
    }
  }
  std::printf("generated %zu/%zu slices in %.1f ms\n", manifest.size() - failed, manifest.size(), ms);
  return failed ? kExitPartial : 0;
}

int run_evaluate(const std::string& manifest_path, const std::string& report_path, const GrowFlags& flags, int jobs,
                 bool jaccard_style) {
  const GrowConfig cfg = flags.resolve();
  const auto manifest = load_manifest(manifest_path);
  const bool any_truth =
      std::any_of(manifest.begin(), manifest.end(), [](const ManifestEntry& e) { return e.ground_truth.has_value(); });
  if (!any_truth) {
    std::cerr << "error: manifest " << manifest_path << " has no ground_truth entries; nothing to evaluate\n";
    return kExitFatal;
  }
  const auto report =
      evaluate_dataset(manifest, cfg, jobs, jaccard_style ? DiceVariant::LiteralUnion : DiceVariant::Standard);
  std::cout << to_text(report);
  if (!report_path.empty()) write_text(report_path, to_json(report).dump(2) + "\n");
  return report.failed ? kExitPartial : 0;
}

int run_ablate(const std::string& manifest_path, const std::string& report_path, const GrowFlags& flags, int jobs,
               bool jaccard_style) {
  const GrowConfig cfg = flags.resolve();
  const auto manifest = load_manifest(manifest_path);
  const bool any_truth =
      std::any_of(manifest.begin(), manifest.end(), [](const ManifestEntry& e) { return e.ground_truth.has_value(); });
  if (!any_truth) {
    std::cerr << "error: manifest " << manifest_path << " has no ground_truth entries; nothing to ablate\n";
    return kExitFatal;
  }
  const auto report = ablate(manifest, cfg, jobs, jaccard_style ? DiceVariant::LiteralUnion : DiceVariant::Standard);
  std::cout << to_text(report);
  if (!report_path.empty()) write_text(report_path, to_json(report).dump(2) + "\n");
  return report.failed ? kExitPartial : 0;
}

int run_phantom(int count, std::uint64_t seed, const std::string& out_dir, double sigma, const std::string& kind) {
  if (count < 1) throw InvalidParameter("--count must be positive");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  int horns = count;
  int bodies = 0;
  if (kind == "body") {
    horns = 0;
    bodies = count;
  } else if (kind == "mixed") {
    horns = (count + 1) / 2;
    bodies = count / 2;
  }
  const auto suite = make_phantom_suite(horns, bodies, seed, sigma);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "phantom_%03zu", i);
    const std::string image = std::string(stem) + ".png";
    const std::string labels = std::string(stem) + ".json";
    const std::string truth = std::string(stem) + "_truth.png";
    WeakLabelSet weak = suite[i].labels;
    weak.image = image;
    write_image(fs::path(out_dir) / image, suite[i].image);
    write_mask(fs::path(out_dir) / truth, suite[i].truth);
    write_text(fs::path(out_dir) / labels, serialize_weak_labels(weak));
    entries.push_back({image, labels, fs::path(truth)});
  }
  write_manifest(fs::path(out_dir) / "manifest.json", entries);
  std::printf("wrote %zu phantoms to %s\n", suite.size(), out_dir.c_str());
  return 0;
}

int run_serve(const std::string& host, int port, const GrowFlags& flags, const std::string& cors) {
  service::ServiceOptions options;
  options.defaults = flags.resolve();
  options.cors_origin = cors;
  service::PreviewServer server(options);
  std::cerr << "weakseg " << version() << " serving on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return kExitFatal;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-label synthesis from point/line weak labels"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string manifest;
  std::string out;
  int jobs = 1;
  bool jaccard_style = false;

  GrowFlags gen_flags;
  auto* gen = app.add_subcommand("generate", "Write a pseudo-label mask per manifest slice");
  gen->add_option("--manifest", manifest, "Dataset manifest (JSON array of {image, labels, ground_truth?})")
      ->required();
  gen->add_option("--out", out, "Output directory for <image-stem>_pseudo.png masks")->required();
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  gen_flags.attach(gen);

  GrowFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "Dice of pseudo-labels against manifest ground truth");
  evaluate->add_option("--manifest", manifest, "Dataset manifest")->required();
  evaluate->add_option("--out", out, "Optional JSON report file");
  evaluate->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_flag("--jaccard-style", jaccard_style, "Use the literal 2|X∩Y|/|X∪Y| denominator");
  eval_flags.attach(evaluate);

  GrowFlags ablate_flags;
  auto* abl = app.add_subcommand("ablate", "Mean Dice under the four cumulative pipeline stage sets");
  abl->add_option("--manifest", manifest, "Dataset manifest")->required();
  abl->add_option("--out", out, "Optional JSON report file");
  abl->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  abl->add_flag("--jaccard-style", jaccard_style, "Use the literal 2|X∩Y|/|X∪Y| denominator");
  ablate_flags.attach(abl);

  int count = 10;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::string kind = "mixed";
  auto* phantom = app.add_subcommand("phantom", "Write synthetic slices, truth masks, weak labels and a manifest");
  phantom->add_option("--count", count, "Number of phantoms")->capture_default_str();
  phantom->add_option("--seed", seed, "Random seed")->required();
  phantom->add_option("--out", out, "Output directory")->required();
  phantom->add_option("--sigma", sigma, "Gaussian noise standard deviation")->capture_default_str();
  phantom->add_option("--kind", kind, "horn, body or mixed")
      ->check(CLI::IsMember({"horn", "body", "mixed"}))
      ->capture_default_str();

  GrowFlags serve_flags;
  int port = 8731;
  std::string host = "127.0.0.1";
  std::string cors = "*";
  auto* serve = app.add_subcommand("serve", "HTTP preview service (POST /v1/preview, GET /v1/health)");
  serve->add_option("--port", port, "Listen port")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value; empty disables CORS")
      ->capture_default_str();
  serve_flags.attach(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_generate(manifest, out, gen_flags, jobs);
    if (evaluate->parsed()) return run_evaluate(manifest, out, eval_flags, jobs, jaccard_style);
    if (abl->parsed()) return run_ablate(manifest, out, ablate_flags, jobs, jaccard_style);
    if (phantom->parsed()) return run_phantom(count, seed, out, sigma, kind);
    if (serve->parsed()) return run_serve(host, port, serve_flags, cors);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return 0;
}
