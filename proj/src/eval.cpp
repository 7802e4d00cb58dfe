#include "weakseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "weakseg/error.hpp"
#include "weakseg/image_io.hpp"
#include "weakseg/parallel.hpp"

namespace weakseg {

namespace fs = std::filesystem;

double dice(const BinaryMask& x, const BinaryMask& y, DiceVariant variant) {
  if (x.dims() != y.dims()) throw ContractError("dice: mask dimensions differ");
  std::size_t both = 0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  const auto a = x.bits();
  const auto b = y.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    nx += a[i];
    ny += b[i];
    both += a[i] & b[i];
  }
  const std::size_t denom = variant == DiceVariant::Standard ? nx + ny : nx + ny - both;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(denom);
}

ProbabilityMap::ProbabilityMap(int height, int width, std::vector<double> values)
    : dims_{height, width}, values_(std::move(values)) {
  if (height < 1 || width < 1) throw InvalidParameter("probability map dimensions must be positive");
  if (values_.size() != dims_.area()) throw InvalidParameter("probability map size does not match dimensions");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter("probabilities must lie in [0, 1]");
  }
}

ProbabilityMap ProbabilityMap::from_mask(const BinaryMask& mask) {
  std::vector<double> values(mask.bits().begin(), mask.bits().end());
  return ProbabilityMap(mask.height(), mask.width(), std::move(values));
}

double bce_dice_loss(const ProbabilityMap& prediction, const BinaryMask& target, LossOptions options) {
  if (prediction.dims() != target.dims()) throw ContractError("bce_dice_loss: dimensions differ");
  const auto p = prediction.values();
  const auto y = target.bits();
  double bce = 0.0;
  double overlap = 0.0;
  double sum_y = 0.0;
  double sum_p = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double yi = y[i];
    if (yi != 0.0) bce -= std::log(std::max(p[i], options.clip));
    if (options.full_bce && yi == 0.0) bce -= std::log(std::max(1.0 - p[i], options.clip));
    overlap += yi * p[i];
    sum_y += yi;
    sum_p += p[i];
  }
  bce = 0.5 * bce / static_cast<double>(p.size());
  const double denom = sum_y + sum_p;
  const double soft_dice = denom > 0.0 ? 2.0 * overlap / denom : 0.0;
  return bce + 1.0 - soft_dice;
}

double bce_dice_loss(std::span<const LossSample> batch, LossOptions options) {
  if (batch.empty()) throw InvalidParameter("bce_dice_loss: empty batch");
  double total = 0.0;
  for (const auto& s : batch) total += bce_dice_loss(s.prediction, s.target, options);
  return total / static_cast<double>(batch.size());
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw IoError("manifest " + path.string() + " must be a JSON array");
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    auto field = [&](const char* key) -> std::optional<std::string> {
      if (!rec.is_object()) return std::nullopt;
      auto it = rec.find(key);
      if (it == rec.end() || it->is_null()) return std::nullopt;
      if (!it->is_string()) throw IoError("manifest entry " + std::to_string(i) + ": \"" + key + "\" must be a string");
      return it->get<std::string>();
    };
    auto image = field("image");
    auto labels = field("labels");
    if (!image || !labels) {
      throw IoError("manifest entry " + std::to_string(i) + " needs \"image\" and \"labels\"");
    }
    ManifestEntry e{resolve(*image), resolve(*labels), std::nullopt};
    if (auto gt = field("ground_truth")) e.ground_truth = resolve(*gt);
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    nlohmann::ordered_json rec;
    rec["image"] = e.image.generic_string();
    rec["labels"] = e.labels.generic_string();
    if (e.ground_truth) rec["ground_truth"] = e.ground_truth->generic_string();
    doc.push_back(std::move(rec));
  }
  const std::string text = doc.dump(2) + "\n";
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Slice load_slice(const ManifestEntry& entry) {
  Slice s;
  s.name = entry.image.filename().string();
  s.image = read_image(entry.image);
  const auto text = read_file(entry.labels);
  s.labels = parse_weak_labels(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
  if (entry.ground_truth) s.truth = read_mask(*entry.ground_truth);
  return s;
}

namespace {

SliceScore score_slice(const Slice& slice, const GrowConfig& cfg, DiceVariant variant) {
  SliceScore score;
  score.name = slice.name;
  if (!slice.truth) {
    score.status = SliceStatus::Skipped;
    score.message = "no ground truth";
    return score;
  }
  try {
    if (slice.truth->dims() != slice.image.dims()) throw ContractError("ground truth size differs from image");
    const auto result = generate_pseudo_label(slice.image, slice.labels, cfg);
    score.dice = dice(result.mask, *slice.truth, variant);
  } catch (const std::exception& e) {
    score.status = SliceStatus::Failed;
    score.message = e.what();
  }
  return score;
}

DatasetReport assemble(std::vector<SliceScore> scores) {
  DatasetReport report;
  double sum = 0.0;
  for (const auto& s : scores) {
    switch (s.status) {
      case SliceStatus::Ok:
        sum += s.dice;
        ++report.evaluated;
        break;
      case SliceStatus::Skipped:
        ++report.skipped;
        break;
      case SliceStatus::Failed:
        ++report.failed;
        break;
    }
  }
  if (report.evaluated > 0) report.mean_dice = sum / static_cast<double>(report.evaluated);
  report.slices = std::move(scores);
  return report;
}

// Loaded slice or the reason it could not be loaded.
struct Loaded {
  std::optional<Slice> slice;
  SliceScore failure;
};

std::vector<Loaded> load_all(std::span<const ManifestEntry> manifest, int jobs) {
  std::vector<Loaded> out(manifest.size());
  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    try {
      out[i].slice = load_slice(manifest[i]);
    } catch (const std::exception& e) {
      out[i].failure = {manifest[i].image.filename().string(), SliceStatus::Failed, 0.0, e.what()};
    }
  });
  return out;
}

std::vector<SliceScore> score_all(const std::vector<Loaded>& loaded, const GrowConfig& cfg, int jobs,
                                  DiceVariant variant) {
  std::vector<SliceScore> scores(loaded.size());
  parallel_for(loaded.size(), jobs, [&](std::size_t i) {
    scores[i] = loaded[i].slice ? score_slice(*loaded[i].slice, cfg, variant) : loaded[i].failure;
  });
  return scores;
}

std::vector<Loaded> wrap(std::span<const Slice> slices) {
  std::vector<Loaded> out(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) out[i].slice = slices[i];
  return out;
}

AblationReport ablate_loaded(const std::vector<Loaded>& loaded, const GrowConfig& cfg, int jobs,
                             DiceVariant variant) {
  AblationReport report;
  for (const auto& stage : ablation_stages()) {
    GrowConfig stage_cfg = cfg;
    stage_cfg.stages = stage.stages;
    const DatasetReport ds = assemble(score_all(loaded, stage_cfg, jobs, variant));
    AblationRow row{stage.key, stage.label, stage.stages, ds.mean_dice, {}, ds.evaluated};
    for (const auto& s : ds.slices)
      if (s.status == SliceStatus::Ok) row.per_slice.push_back(s.dice);
    if (report.rows.empty()) {
      report.skipped = ds.skipped;
      for (const auto& s : ds.slices)
        if (s.status != SliceStatus::Ok) report.problems.push_back(s);
    }
    report.failed = std::max(report.failed, ds.failed);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string format_dice(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

const char* status_name(SliceStatus s) {
  switch (s) {
    case SliceStatus::Ok:
      return "ok";
    case SliceStatus::Skipped:
      return "skipped";
    case SliceStatus::Failed:
      return "failed";
  }
  return "failed";
}

}  // namespace

DatasetReport evaluate_slices(std::span<const Slice> slices, const GrowConfig& cfg, int jobs, DiceVariant variant) {
  return assemble(score_all(wrap(slices), cfg, jobs, variant));
}

DatasetReport evaluate_dataset(std::span<const ManifestEntry> manifest, const GrowConfig& cfg, int jobs,
                               DiceVariant variant) {
  return assemble(score_all(load_all(manifest, jobs), cfg, jobs, variant));
}

const std::array<AblationStage, 4>& ablation_stages() {
  static const std::array<AblationStage, 4> stages{{
      {"center_point_growth", "Center point growth", {false, false, false}},
      {"backbone_growth", "Backbone growth", {true, false, false}},
      {"difficult_area_filling", "Backbone growth + Difficult area filling", {true, true, false}},
      {"edge_limiting", "Backbone growth + Difficult area filling + Edge limiting", {true, true, true}},
  }};
  return stages;
}

AblationReport ablate_slices(std::span<const Slice> slices, const GrowConfig& cfg, int jobs, DiceVariant variant) {
  return ablate_loaded(wrap(slices), cfg, jobs, variant);
}

AblationReport ablate(std::span<const ManifestEntry> manifest, const GrowConfig& cfg, int jobs,
                      DiceVariant variant) {
  return ablate_loaded(load_all(manifest, jobs), cfg, jobs, variant);
}

nlohmann::ordered_json to_json(const DatasetReport& report) {
  nlohmann::ordered_json doc;
  doc["mean_dice"] = report.mean_dice ? nlohmann::ordered_json(*report.mean_dice) : nlohmann::ordered_json();
  doc["evaluated"] = report.evaluated;
  doc["skipped"] = report.skipped;
  doc["failed"] = report.failed;
  doc["slices"] = nlohmann::ordered_json::array();
  for (const auto& s : report.slices) {
    nlohmann::ordered_json rec;
    rec["name"] = s.name;
    rec["status"] = status_name(s.status);
    if (s.status == SliceStatus::Ok) rec["dice"] = s.dice;
    if (!s.message.empty()) rec["message"] = s.message;
    doc["slices"].push_back(std::move(rec));
  }
  return doc;
}

nlohmann::ordered_json to_json(const AblationReport& report) {
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json rec;
    rec["key"] = row.key;
    rec["method"] = row.label;
    rec["mean_dice"] = row.mean_dice ? nlohmann::ordered_json(*row.mean_dice) : nlohmann::ordered_json();
    rec["slice_count"] = row.slice_count;
    rec["per_slice"] = row.per_slice;
    doc["rows"].push_back(std::move(rec));
  }
  doc["skipped"] = report.skipped;
  doc["failed"] = report.failed;
  return doc;
}

std::string to_text(const DatasetReport& report) {
  std::size_t width = 5;
  for (const auto& s : report.slices) width = std::max(width, s.name.size());
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %-8s  %s\n", static_cast<int>(width), "slice", "status", "dice");
  out << line;
  for (const auto& s : report.slices) {
    std::snprintf(line, sizeof line, "%-*s  %-8s  %s", static_cast<int>(width), s.name.c_str(),
                  status_name(s.status),
                  s.status == SliceStatus::Ok ? format_dice(s.dice).c_str() : s.message.c_str());
    out << line << "\n";
  }
  out << "mean dice " << format_dice(report.mean_dice) << " over " << report.evaluated << " slices ("
      << report.skipped << " skipped, " << report.failed << " failed)\n";
  return out.str();
}

std::string to_text(const AblationReport& report) {
  std::size_t width = 6;
  for (const auto& row : report.rows) width = std::max(width, row.label.size());
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %8s  %6s\n", static_cast<int>(width), "method", "dice", "slices");
  out << line;
  for (const auto& row : report.rows) {
    std::snprintf(line, sizeof line, "%-*s  %8s  %6zu\n", static_cast<int>(width), row.label.c_str(),
                  format_dice(row.mean_dice).c_str(), row.slice_count);
    out << line;
  }
  if (report.skipped || report.failed) {
    out << report.skipped << " skipped, " << report.failed << " failed\n";
  }
  return out.str();
}

}  // namespace weakseg
