#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weakseg/imaging.hpp"
#include "weakseg/pseudolabel.hpp"
#include "weakseg/weaklabel.hpp"

namespace weakseg {

enum class DiceVariant {
  Standard,      ///< 2|X∩Y| / (|X|+|Y|)
  LiteralUnion,  ///< 2|X∩Y| / |X∪Y|, can exceed 1; kept for auditing
};

/// Overlap of two masks. Two empty masks score 1. Throws ContractError on a
/// dimension mismatch.
double dice(const BinaryMask& x, const BinaryMask& y, DiceVariant variant = DiceVariant::Standard);

/// Per-pixel foreground probabilities in [0, 1].
class ProbabilityMap {
 public:
  ProbabilityMap(int height, int width, std::vector<double> values);
  static ProbabilityMap from_mask(const BinaryMask& mask);

  Dims dims() const noexcept { return dims_; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Dims dims_;
  std::vector<double> values_;
};

struct LossOptions {
  /// Adds the (1 - y) log(1 - p) half of binary cross-entropy.
  bool full_bce = false;
  /// Lower clip applied to the argument of every logarithm.
  double clip = 1e-7;
};

struct LossSample {
  ProbabilityMap prediction;
  BinaryMask target;
};

/// Mean over pixels of -1/2 y log p, plus 1 - 2 Σ(y p) / (Σy + Σp).
double bce_dice_loss(const ProbabilityMap& prediction, const BinaryMask& target, LossOptions options = {});
/// Mean of the per-sample loss over a batch.
double bce_dice_loss(std::span<const LossSample> batch, LossOptions options = {});

/// One manifest record; relative paths are resolved against the manifest's
/// directory by load_manifest.
struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> ground_truth;
};

/// Reads a JSON array of {"image", "labels", "ground_truth"?} records.
/// Throws IoError when the file is unreadable or malformed.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
/// Inverse of load_manifest for entries that are relative to the manifest dir.
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// An in-memory slice ready for the pipeline.
struct Slice {
  std::string name;
  GrayImage image;
  WeakLabelSet labels;
  std::optional<BinaryMask> truth;
};

/// Loads the image, labels and (if listed) ground truth of one entry.
Slice load_slice(const ManifestEntry& entry);

enum class SliceStatus { Ok, Skipped, Failed };

struct SliceScore {
  std::string name;
  SliceStatus status = SliceStatus::Ok;
  double dice = 0.0;
  std::string message;
};

struct DatasetReport {
  std::vector<SliceScore> slices;  ///< input order
  std::optional<double> mean_dice;  ///< empty when nothing was evaluated
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

DatasetReport evaluate_slices(std::span<const Slice> slices, const GrowConfig& cfg, int jobs = 1,
                              DiceVariant variant = DiceVariant::Standard);
DatasetReport evaluate_dataset(std::span<const ManifestEntry> manifest, const GrowConfig& cfg, int jobs = 1,
                               DiceVariant variant = DiceVariant::Standard);

struct AblationStage {
  const char* key;
  const char* label;
  StageFlags stages;
};

/// The four cumulative stage sets, in report order.
const std::array<AblationStage, 4>& ablation_stages();

struct AblationRow {
  std::string key;
  std::string label;
  StageFlags stages;
  std::optional<double> mean_dice;
  std::vector<double> per_slice;
  std::size_t slice_count = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::vector<SliceScore> problems;  ///< skipped and failed slices
};

/// Runs the pipeline under each ablation stage set; other fields of `cfg`
/// are kept. The last row uses exactly the evaluate_dataset code path.
AblationReport ablate_slices(std::span<const Slice> slices, const GrowConfig& cfg, int jobs = 1,
                             DiceVariant variant = DiceVariant::Standard);
AblationReport ablate(std::span<const ManifestEntry> manifest, const GrowConfig& cfg, int jobs = 1,
                      DiceVariant variant = DiceVariant::Standard);

nlohmann::ordered_json to_json(const DatasetReport& report);
nlohmann::ordered_json to_json(const AblationReport& report);
std::string to_text(const DatasetReport& report);
std::string to_text(const AblationReport& report);

}  // namespace weakseg
