#include "weakseg/pseudolabel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <string>

#include "weakseg/error.hpp"

namespace weakseg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

PixelPoint clamp_point(PixelPoint p, std::optional<Dims> dims) {
  if (!dims) return p;
  return {std::clamp(p.row, 0, dims->height - 1), std::clamp(p.col, 0, dims->width - 1)};
}

void append(std::vector<PixelPoint>& out, const std::vector<PixelPoint>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

void sort_unique(std::vector<PixelPoint>& pixels) {
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
}

long long orient(PixelPoint a, PixelPoint b, PixelPoint c) {
  const long long v = static_cast<long long>(b.row - a.row) * (c.col - a.col) -
                      static_cast<long long>(b.col - a.col) * (c.row - a.row);
  return (v > 0) - (v < 0);
}

bool on_segment(PixelPoint a, PixelPoint b, PixelPoint p) {
  return std::min(a.row, b.row) <= p.row && p.row <= std::max(a.row, b.row) &&
         std::min(a.col, b.col) <= p.col && p.col <= std::max(a.col, b.col);
}

bool segments_touch(PixelPoint a, PixelPoint b, PixelPoint c, PixelPoint d) {
  const long long o1 = orient(a, b, c);
  const long long o2 = orient(a, b, d);
  const long long o3 = orient(c, d, a);
  const long long o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

/// True when two edges of the closed outline that share no vertex meet.
bool self_intersects(const std::vector<PixelPoint>& outline) {
  const std::size_t n = outline.size();
  if (n < 4) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_touch(outline[i], outline[(i + 1) % n], outline[j], outline[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

/// Bezier arc from `a` to `b` whose control point sits `offset` pixels off the
/// chord midpoint, on the side facing away from `away_from`.
std::vector<PixelPoint> bulged_arc(PixelPoint a, PixelPoint b, Vec2 away_from, Vec2 fallback,
                                   double offset) {
  const double dr = b.row - a.row;
  const double dc = b.col - a.col;
  const double len = std::hypot(dr, dc);
  if (len == 0.0 || offset == 0.0) return rasterize_segment(a, b);
  const Vec2 mid{(a.row + b.row) / 2.0, (a.col + b.col) / 2.0};
  Vec2 normal{dc / len, -dr / len};
  double side = normal.row * (mid.row - away_from.row) + normal.col * (mid.col - away_from.col);
  if (std::abs(side) < 1e-9) {
    side = normal.row * (mid.row - fallback.row) + normal.col * (mid.col - fallback.col);
  }
  if (side < 0.0) normal = {-normal.row, -normal.col};
  const Vec2 control{mid.row + offset * normal.row, mid.col + offset * normal.col};
  return rasterize_bezier(a, control, b);
}

Vec2 centroid(const std::vector<PixelPoint>& pts) {
  Vec2 c;
  for (const auto& p : pts) {
    c.row += p.row;
    c.col += p.col;
  }
  c.row /= static_cast<double>(pts.size());
  c.col /= static_cast<double>(pts.size());
  return c;
}

std::vector<PixelPoint> horn_outline(const RegionAnnotation& region) {
  std::vector<PixelPoint> outline = region.lines[0].points;
  outline.push_back(region.points[0]);
  return outline;
}

std::vector<PixelPoint> body_outline(const RegionAnnotation& region) {
  const auto& posterior = region.lines[0].points;
  const auto& anterior = region.lines[1].points;
  std::vector<PixelPoint> outline(posterior.begin(), posterior.end());
  outline.push_back(region.points[1]);
  outline.insert(outline.end(), anterior.rbegin(), anterior.rend());
  outline.push_back(region.points[0]);
  return outline;
}

double mean_over(const GrayImage& img, const std::vector<PixelPoint>& pixels) {
  double sum = 0.0;
  for (const auto& p : pixels) sum += img.at(p);
  return sum / static_cast<double>(pixels.size());
}

}  // namespace

void GrowConfig::validate() const {
  if (!(epsilon >= 0.0)) throw InvalidParameter("epsilon must be non-negative");
  for (auto [name, k] : {std::pair{"smooth_kernel", smooth_kernel}, std::pair{"close_kernel", close_kernel}}) {
    if (k < 1 || k % 2 == 0) {
      throw InvalidParameter(std::string(name) + " must be odd and positive, got " + std::to_string(k));
    }
  }
  if (close_iterations < 0) throw InvalidParameter("close_iterations must be non-negative");
  if (!(bezier_offset >= 0.0)) throw InvalidParameter("bezier_offset must be non-negative");
  if (connectivity != 4 && connectivity != 8) {
    throw InvalidParameter("connectivity must be 4 or 8, got " + std::to_string(connectivity));
  }
}

std::vector<PixelPoint> center_points(const RegionAnnotation& region, MidpointMode midpoint,
                                      std::optional<Dims> clamp_to) {
  std::vector<PixelPoint> centers;
  if (region.is_horn()) {
    const PixelPoint mid = region.lines.at(0).midpoint(midpoint);
    const PixelPoint p = region.points.at(0);
    centers.push_back({static_cast<int>(round_half_up(mid.row + p.row, 2)),
                       static_cast<int>(round_half_up(mid.col + p.col, 2))});
  } else {
    const PixelPoint up = region.points.at(0);
    const PixelPoint down = region.points.at(1);
    for (const auto& line : region.lines) {
      // (mid + (up + down) / 2) / 2, kept exact until the final rounding.
      const PixelPoint mid = line.midpoint(midpoint);
      centers.push_back({static_cast<int>(round_half_up(2LL * mid.row + up.row + down.row, 4)),
                         static_cast<int>(round_half_up(2LL * mid.col + up.col + down.col, 4))});
    }
  }
  for (auto& c : centers) c = clamp_point(c, clamp_to);
  return centers;
}

std::vector<PixelPoint> backbone_pixels(const RegionAnnotation& region,
                                        const std::vector<PixelPoint>& centers, bool include_line) {
  if (centers.size() != region.lines.size()) {
    throw ContractError("backbone: expected one center per line");
  }
  std::vector<PixelPoint> pixels;
  for (std::size_t i = 0; i < region.lines.size(); ++i) {
    const auto& line = region.lines[i];
    append(pixels, rasterize_segment(line.first(), centers[i]));
    append(pixels, rasterize_segment(line.last(), centers[i]));
    if (include_line) append(pixels, line.raster());
  }
  if (centers.size() == 2) append(pixels, rasterize_segment(centers[0], centers[1]));
  sort_unique(pixels);
  return pixels;
}

Backbone build_backbone(const RegionAnnotation& region, const std::vector<PixelPoint>& centers,
                        const GrayImage& smoothed, bool include_line) {
  Backbone bb;
  bb.pixels = backbone_pixels(region, centers, include_line);
  std::erase_if(bb.pixels, [&](PixelPoint p) { return !smoothed.dims().contains(p); });
  if (bb.pixels.empty()) throw Error("backbone is empty");
  bb.mean_intensity = mean_over(smoothed, bb.pixels);
  return bb;
}

Backbone center_seeds(const std::vector<PixelPoint>& centers, const GrayImage& smoothed) {
  Backbone bb;
  bb.pixels = centers;
  std::erase_if(bb.pixels, [&](PixelPoint p) { return !smoothed.dims().contains(p); });
  sort_unique(bb.pixels);
  if (bb.pixels.empty()) throw Error("no center point inside the image");
  bb.mean_intensity = mean_over(smoothed, bb.pixels);
  return bb;
}

BinaryMask fill_difficult_area(const RegionAnnotation& region, const std::vector<PixelPoint>& centers,
                               Dims dims) {
  if (centers.size() != region.lines.size()) {
    throw ContractError("fill: expected one center per line");
  }
  BinaryMask out(dims);
  for (std::size_t i = 0; i < region.lines.size(); ++i) {
    std::vector<PixelPoint> polygon = region.lines[i].points;
    polygon.push_back(centers[i]);
    out |= fill_polygon(polygon, dims);
  }
  return out;
}

ConstraintRegion build_constraint(const RegionAnnotation& region,
                                  const std::vector<PixelPoint>& centers, const GrowConfig& cfg,
                                  Dims dims, int region_index) {
  const std::vector<PixelPoint> outline =
      region.is_horn() ? horn_outline(region) : body_outline(region);
  if (self_intersects(outline)) {
    throw ConstraintGeometryError(
        region_index, "region " + std::to_string(region_index) + " (" +
                          std::string(to_string(region.kind)) + "): constraint outline crosses itself");
  }

  BinaryMask filled = fill_polygon(outline, dims);
  if (region.is_horn() && cfg.bezier_offset > 0.0) {
    const auto& line = region.lines[0];
    const PixelPoint corner = region.points[0];
    const Vec2 center{static_cast<double>(centers[0].row), static_cast<double>(centers[0].col)};
    const Vec2 fallback = centroid(outline);

    std::vector<PixelPoint> curved = line.points;
    auto to_corner = bulged_arc(line.last(), corner, center, fallback, cfg.bezier_offset);
    curved.insert(curved.end(), to_corner.begin() + 1, to_corner.end());
    auto from_corner = bulged_arc(corner, line.first(), center, fallback, cfg.bezier_offset);
    if (from_corner.size() > 2) curved.insert(curved.end(), from_corner.begin() + 1, from_corner.end() - 1);
    if (curved.size() >= 3) filled |= fill_polygon(curved, dims);
  }

  BinaryMask allowed = dilate(filled, 3);
  paint(allowed, backbone_pixels(region, centers, cfg.include_line_in_backbone));
  paint(allowed, centers);
  allowed |= fill_difficult_area(region, centers, dims);
  return {std::move(allowed)};
}

BinaryMask region_grow(const GrayImage& smoothed, const Backbone& backbone,
                       const BinaryMask& pregrown, const ConstraintRegion& constraint,
                       const GrowConfig& cfg) {
  const Dims dims = smoothed.dims();
  if (pregrown.dims() != dims || constraint.allowed.dims() != dims) {
    throw ContractError("region_grow: mask dimensions differ from the image");
  }
  if (cfg.connectivity != 4 && cfg.connectivity != 8) {
    throw InvalidParameter("connectivity must be 4 or 8");
  }
  if (!pregrown.is_subset_of(constraint.allowed)) {
    throw ContractError("region_grow: pregrown pixels lie outside the constraint");
  }

  BinaryMask grown(dims);
  std::deque<PixelPoint> queue;
  for (const auto& p : backbone.pixels) {
    if (!dims.contains(p) || !constraint.allowed.get(p)) {
      throw ContractError("region_grow: backbone pixel outside the constraint");
    }
    if (!grown.get(p)) {
      grown.set(p);
      queue.push_back(p);
    }
  }
  for (int r = 0; r < dims.height; ++r) {
    for (int c = 0; c < dims.width; ++c) {
      if (pregrown.get(r, c) && !grown.get(r, c)) {
        grown.set(r, c);
        queue.push_back({r, c});
      }
    }
  }

  static constexpr PixelPoint kOffsets[8] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1},
                                             {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  const int neighbours = cfg.connectivity;
  const double mean = backbone.mean_intensity;
  while (!queue.empty()) {
    const PixelPoint p = queue.front();
    queue.pop_front();
    for (int k = 0; k < neighbours; ++k) {
      const PixelPoint q{p.row + kOffsets[k].row, p.col + kOffsets[k].col};
      if (!dims.contains(q) || grown.get(q) || !constraint.allowed.get(q)) continue;
      if (std::abs(static_cast<double>(smoothed.at(q)) - mean) > cfg.epsilon) continue;
      grown.set(q);
      queue.push_back(q);
    }
  }
  return grown;
}

PseudoLabelResult generate_pseudo_label(const GrayImage& img, const WeakLabelSet& labels,
                                        const GrowConfig& cfg) {
  cfg.validate();
  if (labels.dims != img.dims()) {
    throw ContractError("labels are for a " + std::to_string(labels.dims.height) + "x" +
                        std::to_string(labels.dims.width) + " image, got " +
                        std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  validate(labels);

  const auto start = Clock::now();
  PseudoLabelResult result;
  auto t = Clock::now();
  const GrayImage smoothed = mean_smooth(img, cfg.smooth_kernel);
  result.timings.smooth_ms = elapsed_ms(t);

  const Dims dims = img.dims();
  BinaryMask combined(dims);
  for (std::size_t i = 0; i < labels.regions.size(); ++i) {
    const auto& region = labels.regions[i];

    t = Clock::now();
    const auto centers = center_points(region, cfg.midpoint, dims);
    const Backbone seeds = cfg.stages.use_backbone
                               ? build_backbone(region, centers, smoothed, cfg.include_line_in_backbone)
                               : center_seeds(centers, smoothed);
    result.timings.backbone_ms += elapsed_ms(t);

    t = Clock::now();
    const BinaryMask pregrown = cfg.stages.use_fill ? fill_difficult_area(region, centers, dims) : BinaryMask(dims);
    result.timings.fill_ms += elapsed_ms(t);

    t = Clock::now();
    const ConstraintRegion constraint = cfg.stages.use_edge_limit
                                            ? build_constraint(region, centers, cfg, dims, static_cast<int>(i))
                                            : ConstraintRegion{BinaryMask(dims, true)};
    result.timings.constraint_ms += elapsed_ms(t);

    t = Clock::now();
    BinaryMask grown = region_grow(smoothed, seeds, pregrown, constraint, cfg);
    result.timings.grow_ms += elapsed_ms(t);

    combined |= grown;
    result.region_masks.push_back(std::move(grown));
  }

  t = Clock::now();
  result.mask = close(combined, cfg.close_kernel, cfg.close_iterations);
  result.timings.close_ms = elapsed_ms(t);
  result.empty = !result.mask.any();
  result.timings.total_ms = elapsed_ms(start);
  return result;
}

}  // namespace weakseg
