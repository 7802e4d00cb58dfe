#pragma once

// Brute-force reference implementations. They are written independently of
// the library code and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <set>
#include <vector>

#include "weakseg/imaging.hpp"
#include "weakseg/pseudolabel.hpp"

namespace oracle {

using weakseg::BinaryMask;
using weakseg::Dims;
using weakseg::GrayImage;
using weakseg::PixelPoint;

inline std::set<PixelPoint> as_set(const std::vector<PixelPoint>& pixels) {
  return {pixels.begin(), pixels.end()};
}

inline std::set<PixelPoint> as_set(const BinaryMask& mask) {
  std::set<PixelPoint> out;
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      if (mask.get(r, c)) out.insert({r, c});
  return out;
}

/// Exact minor-axis position of the continuous segment at one major-axis step.
struct SegmentColumn {
  int major;
  double exact_minor;
};

inline std::vector<SegmentColumn> segment_columns(PixelPoint a, PixelPoint b, bool& row_major) {
  const int dr = b.row - a.row;
  const int dc = b.col - a.col;
  row_major = std::abs(dr) >= std::abs(dc);
  std::vector<SegmentColumn> out;
  if (row_major) {
    if (dr == 0) return {{a.row, static_cast<double>(a.col)}};
    const int step = dr > 0 ? 1 : -1;
    for (int r = a.row;; r += step) {
      out.push_back({r, a.col + static_cast<double>(dc) * (r - a.row) / dr});
      if (r == b.row) break;
    }
  } else {
    const int step = dc > 0 ? 1 : -1;
    for (int c = a.col;; c += step) {
      out.push_back({c, a.row + static_cast<double>(dr) * (c - a.col) / dc});
      if (c == b.col) break;
    }
  }
  return out;
}

/// Checks that `pixels` holds exactly one pixel per major-axis step and each
/// lies within half a pixel of the true segment.
inline bool matches_segment(PixelPoint a, PixelPoint b, const std::vector<PixelPoint>& pixels) {
  bool row_major = true;
  const auto cols = segment_columns(a, b, row_major);
  const auto got = as_set(pixels);
  if (got.size() != cols.size()) return false;
  for (const auto& col : cols) {
    bool found = false;
    for (const auto& p : got) {
      const int major = row_major ? p.row : p.col;
      const int minor = row_major ? p.col : p.row;
      if (major == col.major && std::abs(minor - col.exact_minor) <= 0.5 + 1e-12) found = true;
    }
    if (!found) return false;
  }
  return true;
}

/// Closed point-in-polygon: on-edge pixels count as inside.
inline bool inside_closed(const std::vector<PixelPoint>& poly, PixelPoint p) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PixelPoint a = poly[i];
    const PixelPoint b = poly[(i + 1) % n];
    const long long cross = static_cast<long long>(b.row - a.row) * (p.col - a.col) -
                            static_cast<long long>(b.col - a.col) * (p.row - a.row);
    if (cross == 0 && p.row >= std::min(a.row, b.row) && p.row <= std::max(a.row, b.row) &&
        p.col >= std::min(a.col, b.col) && p.col <= std::max(a.col, b.col)) {
      return true;
    }
  }
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const PixelPoint a = poly[i];
    const PixelPoint b = poly[j];
    if ((a.row > p.row) != (b.row > p.row)) {
      const double x = a.col + static_cast<double>(p.row - a.row) * (b.col - a.col) / (b.row - a.row);
      if (p.col < x) in = !in;
    }
  }
  return in;
}

/// Per-pixel polygon test joined with the library's outline raster, which is
/// what a filled polygon must look like.
inline BinaryMask fill(const std::vector<PixelPoint>& poly, Dims dims) {
  BinaryMask out(dims);
  for (int r = 0; r < dims.height; ++r)
    for (int c = 0; c < dims.width; ++c)
      if (inside_closed(poly, {r, c})) out.set(r, c);
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (const auto& p : weakseg::rasterize_segment(poly[i], poly[(i + 1) % poly.size()])) out.set_clipped(p);
  return out;
}

/// Square-window dilation with an explicit value for pixels beyond the border.
inline BinaryMask dilate(const BinaryMask& m, int kernel, bool outside = false) {
  const int h = kernel / 2;
  BinaryMask out(m.dims());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      bool any = false;
      for (int dr = -h; dr <= h; ++dr)
        for (int dc = -h; dc <= h; ++dc) {
          const PixelPoint q{r + dr, c + dc};
          any = any || (m.dims().contains(q) ? m.get(q) : outside);
        }
      out.set(r, c, any);
    }
  return out;
}

inline BinaryMask erode(const BinaryMask& m, int kernel) {
  const int h = kernel / 2;
  BinaryMask out(m.dims());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) {
      bool all = true;
      for (int dr = -h; dr <= h; ++dr)
        for (int dc = -h; dc <= h; ++dc) {
          const PixelPoint q{r + dr, c + dc};
          all = all && m.dims().contains(q) && m.get(q);
        }
      out.set(r, c, all);
    }
  return out;
}

/// Plain BFS with an explicit visited set.
inline BinaryMask grow(const GrayImage& img, const std::vector<PixelPoint>& seeds, double mean,
                       const BinaryMask& pregrown, const BinaryMask& allowed, double epsilon,
                       int connectivity) {
  std::set<PixelPoint> accepted(seeds.begin(), seeds.end());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      if (pregrown.get(r, c)) accepted.insert({r, c});
  std::deque<PixelPoint> queue(accepted.begin(), accepted.end());
  std::set<PixelPoint> visited = accepted;
  while (!queue.empty()) {
    const PixelPoint p = queue.front();
    queue.pop_front();
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        if (connectivity == 4 && dr != 0 && dc != 0) continue;
        const PixelPoint q{p.row + dr, p.col + dc};
        if (!img.dims().contains(q) || visited.count(q)) continue;
        if (!allowed.get(q)) continue;
        if (std::abs(img.at(q) - mean) > epsilon) continue;
        visited.insert(q);
        accepted.insert(q);
        queue.push_back(q);
      }
  }
  BinaryMask out(img.dims());
  for (const auto& p : accepted) out.set(p);
  return out;
}

/// One random growth problem on a small image: blocky intensities so that
/// regions of similar value exist, a random allowed mask, and seeds and
/// pregrown pixels drawn inside it.
struct GrowCase {
  GrayImage image;
  weakseg::Backbone backbone;
  BinaryMask pregrown;
  weakseg::ConstraintRegion constraint;
  double epsilon = 0.0;
};

inline GrowCase random_grow_case(std::mt19937_64& rng, int size = 32) {
  std::uniform_int_distribution<int> level(0, 255);
  std::uniform_int_distribution<int> jitter(-12, 12);
  std::uniform_int_distribution<int> coord(0, size - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double epsilons[] = {0.0, 10.0, 30.0, 60.0};

  GrowCase gc;
  const int block = 4 + static_cast<int>(unit(rng) * 5);
  std::vector<int> levels(static_cast<std::size_t>((size / block + 1) * (size / block + 1)));
  for (auto& l : levels) l = level(rng);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(size) * size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const int base = levels[static_cast<std::size_t>((r / block) * (size / block + 1) + c / block)];
      px[static_cast<std::size_t>(r) * size + c] = static_cast<std::uint8_t>(std::clamp(base + jitter(rng), 0, 255));
    }
  gc.image = GrayImage(size, size, std::move(px));

  const double density = 0.6 + 0.4 * unit(rng);
  BinaryMask allowed(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) allowed.set(r, c, unit(rng) < density);

  const int seeds = 1 + static_cast<int>(unit(rng) * 4);
  double sum = 0.0;
  for (int i = 0; i < seeds; ++i) {
    const PixelPoint p{coord(rng), coord(rng)};
    allowed.set(p);
    gc.backbone.pixels.push_back(p);
  }
  std::sort(gc.backbone.pixels.begin(), gc.backbone.pixels.end());
  gc.backbone.pixels.erase(std::unique(gc.backbone.pixels.begin(), gc.backbone.pixels.end()),
                           gc.backbone.pixels.end());
  for (const auto& p : gc.backbone.pixels) sum += gc.image.at(p);
  gc.backbone.mean_intensity = sum / static_cast<double>(gc.backbone.pixels.size());

  gc.pregrown = BinaryMask(size, size);
  const int pre = static_cast<int>(unit(rng) * 6);
  for (int i = 0; i < pre; ++i) {
    const PixelPoint p{coord(rng), coord(rng)};
    if (allowed.get(p)) gc.pregrown.set(p);
  }
  gc.constraint.allowed = std::move(allowed);
  gc.epsilon = epsilons[static_cast<std::size_t>(unit(rng) * 4) % 4];
  return gc;
}

}  // namespace oracle
