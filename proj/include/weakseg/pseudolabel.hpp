#pragma once

#include <vector>

#include "weakseg/imaging.hpp"
#include "weakseg/weaklabel.hpp"

namespace weakseg {

/// Cumulative pipeline stages. All off means growing from the center points
/// alone against their own mean intensity.
struct StageFlags {
  bool use_backbone = true;
  bool use_fill = true;
  bool use_edge_limit = true;

  friend bool operator==(const StageFlags&, const StageFlags&) = default;
};

struct GrowConfig {
  double epsilon = 30.0;       ///< intensity tolerance of the growth test
  int smooth_kernel = 3;       ///< mean filter side length
  int close_kernel = 3;        ///< closing structuring element side length
  int close_iterations = 1;
  double bezier_offset = 3.0;  ///< control point distance from the chord midpoint
  int connectivity = 8;        ///< 4 or 8
  StageFlags stages;
  MidpointMode midpoint = MidpointMode::Index;
  bool include_line_in_backbone = false;

  /// Throws InvalidParameter on out-of-range fields.
  void validate() const;

  friend bool operator==(const GrowConfig&, const GrowConfig&) = default;
};

/// Seed skeleton of one region and the mean smoothed intensity over it.
struct Backbone {
  std::vector<PixelPoint> pixels;  ///< sorted, unique
  double mean_intensity = 0.0;
};

struct ConstraintRegion {
  BinaryMask allowed;
};

/// One center point for a horn, two for the body (one per line, in line
/// order). Rounded half-up and clamped to `clamp_to` when given.
std::vector<PixelPoint> center_points(const RegionAnnotation& region,
                                      MidpointMode midpoint = MidpointMode::Index,
                                      std::optional<Dims> clamp_to = std::nullopt);

/// Pixels of the backbone without intensity: each line's first and last
/// vertex joined to its center, and for the body the two centers joined.
std::vector<PixelPoint> backbone_pixels(const RegionAnnotation& region,
                                        const std::vector<PixelPoint>& centers,
                                        bool include_line = false);

Backbone build_backbone(const RegionAnnotation& region, const std::vector<PixelPoint>& centers,
                        const GrayImage& smoothed, bool include_line = false);

/// Seeds made of the center points only.
Backbone center_seeds(const std::vector<PixelPoint>& centers, const GrayImage& smoothed);

/// Union over lines of the polygon [line vertices..., center].
BinaryMask fill_difficult_area(const RegionAnnotation& region, const std::vector<PixelPoint>& centers,
                               Dims dims);

/// Allowed-growth mask. Horns are bounded by the annotated line and two
/// quadratic Bezier arcs standing in for the chords from the line ends to the
/// corner point, bulging away from the center point. The body is bounded by
/// both lines and the polylines joining their upper ends through the upper
/// point and their lower ends through the lower point. The filled outline is
/// dilated by one pixel and joined with the backbone and difficult-area
/// geometry. Throws ConstraintGeometryError when the outline crosses itself.
ConstraintRegion build_constraint(const RegionAnnotation& region,
                                  const std::vector<PixelPoint>& centers, const GrowConfig& cfg,
                                  Dims dims, int region_index = -1);

/// Reachability fixpoint from backbone and pregrown pixels. A pixel joins when
/// it is allowed and its smoothed intensity is within epsilon of the backbone
/// mean; seeds and pregrown pixels join unconditionally.
BinaryMask region_grow(const GrayImage& smoothed, const Backbone& backbone,
                       const BinaryMask& pregrown, const ConstraintRegion& constraint,
                       const GrowConfig& cfg);

struct StageTimings {
  double smooth_ms = 0.0;
  double backbone_ms = 0.0;
  double fill_ms = 0.0;
  double constraint_ms = 0.0;
  double grow_ms = 0.0;
  double close_ms = 0.0;
  double total_ms = 0.0;
};

struct PseudoLabelResult {
  BinaryMask mask;                       ///< closed union over regions
  std::vector<BinaryMask> region_masks;  ///< per region, before closing
  StageTimings timings;
  bool empty = false;                    ///< set when the final mask has no pixels
};

/// Full pipeline for one slice. Labels must match the image dimensions.
PseudoLabelResult generate_pseudo_label(const GrayImage& img, const WeakLabelSet& labels,
                                        const GrowConfig& cfg);

}  // namespace weakseg
