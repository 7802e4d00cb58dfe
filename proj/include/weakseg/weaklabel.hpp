#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "weakseg/imaging.hpp"

namespace weakseg {

enum class RegionKind { AnteriorHorn, PosteriorHorn, Body };

std::string_view to_string(RegionKind kind) noexcept;
std::optional<RegionKind> region_kind_from_string(std::string_view name) noexcept;

/// How the "middle" of an annotated line is picked.
enum class MidpointMode {
  Index,      ///< vertex at index (n - 1) / 2
  ArcLength,  ///< point at half the polyline length, rounded half-up
};

struct Polyline {
  std::vector<PixelPoint> points;

  const PixelPoint& first() const { return points.front(); }
  const PixelPoint& last() const { return points.back(); }
  PixelPoint midpoint(MidpointMode mode = MidpointMode::Index) const;
  /// Raster of every segment of the line, consecutive duplicates removed.
  std::vector<PixelPoint> raster() const;

  friend bool operator==(const Polyline&, const Polyline&) = default;
};

/// One annotated meniscus region.
///
/// Horns carry one point (the inner corner) and one line (the outer edge).
/// The body carries two points, upper then lower boundary point at its
/// center, and two lines, posterior-side then anterior-side edge, each drawn
/// from its upper endpoint to its lower endpoint.
struct RegionAnnotation {
  RegionKind kind = RegionKind::AnteriorHorn;
  std::vector<PixelPoint> points;
  std::vector<Polyline> lines;

  bool is_horn() const noexcept { return kind != RegionKind::Body; }

  friend bool operator==(const RegionAnnotation&, const RegionAnnotation&) = default;
};

struct WeakLabelSet {
  std::string image;
  Dims dims;
  std::vector<RegionAnnotation> regions;

  friend bool operator==(const WeakLabelSet&, const WeakLabelSet&) = default;
};

/// Parses and fully validates a weak-label document. Throws LabelError.
WeakLabelSet parse_weak_labels(std::string_view document);
WeakLabelSet parse_weak_labels(const nlohmann::json& document);

/// Throws LabelError describing the first violated invariant.
void validate(const WeakLabelSet& labels);

/// Canonical document: fixed key order, two-space indentation.
std::string serialize_weak_labels(const WeakLabelSet& labels);
nlohmann::ordered_json to_json(const WeakLabelSet& labels);

/// Inclusive pixel rectangle.
struct Box {
  int row_min = 0;
  int row_max = 0;
  int col_min = 0;
  int col_max = 0;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Tight box over every point and line vertex of `region`, grown by `margin`
/// on each side and clamped to `clamp_to` when given.
Box bounding_box(const RegionAnnotation& region, int margin = 0,
                 std::optional<Dims> clamp_to = std::nullopt);

}  // namespace weakseg
