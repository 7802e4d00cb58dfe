#include "weakseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "weakseg/error.hpp"

namespace weakseg {

namespace {

using Polygon = std::vector<Vec2>;

constexpr double kRimWidth = 3.0;
constexpr double kTearWidth = 2.0;

Vec2 operator+(Vec2 a, Vec2 b) { return {a.row + b.row, a.col + b.col}; }
Vec2 operator-(Vec2 a, Vec2 b) { return {a.row - b.row, a.col - b.col}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.row, s * a.col}; }
double dot(Vec2 a, Vec2 b) { return a.row * b.row + a.col * b.col; }

bool inside(const Polygon& poly, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.row > p.row) != (b.row > p.row)) {
      const double x = a.col + (p.row - a.row) * (b.col - a.col) / (b.row - a.row);
      if (p.col < x) in = !in;
    }
  }
  return in;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  const Vec2 d = p - (a + t * ab);
  return std::sqrt(dot(d, d));
}

double polyline_distance(Vec2 p, const Polygon& line) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i) best = std::min(best, segment_distance(p, line[i - 1], line[i]));
  return best;
}

PixelPoint snap(Vec2 v, Dims dims) {
  return {std::clamp(round_half_up(v.row), 0, dims.height - 1), std::clamp(round_half_up(v.col), 0, dims.width - 1)};
}

std::vector<double> box_blur(const std::vector<double>& in, Dims dims, int radius) {
  if (radius <= 0) return in;
  const int h = dims.height;
  const int w = dims.width;
  std::vector<double> tmp(in.size());
  std::vector<double> out(in.size());
  const double n = 2.0 * radius + 1.0;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += in[static_cast<std::size_t>(r) * w + std::clamp(c + d, 0, w - 1)];
      tmp[static_cast<std::size_t>(r) * w + c] = s / n;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) s += tmp[static_cast<std::size_t>(std::clamp(r + d, 0, h - 1)) * w + c];
      out[static_cast<std::size_t>(r) * w + c] = s / n;
    }
  return out;
}

/// Geometry shared by both phantom kinds, in image coordinates.
struct Layout {
  Polygon outline;                 // truth boundary
  std::vector<Polygon> rims;       // outer edges that get the rim band
  Vec2 tear_origin;                // tear band: tear_lo <= dot(p - origin, axis) < tear_hi
  Vec2 tear_axis;
  double tear_lo = 0.0;
  double tear_hi = 0.0;
  bool tear_symmetric = false;     // also mirror the band to negative projections
  Vec2 blob_center;
  double blob_radius = 0.0;
  Vec2 bridge_from;
  RegionAnnotation region;
};

Polygon sample_arc(int count, auto&& at) {
  Polygon out;
  for (int i = 0; i <= count; ++i) out.push_back(at(-1.0 + 2.0 * i / count));
  return out;
}

Layout horn_layout(const PhantomParams& p, std::mt19937_64& rng, Dims dims) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const double depth = uni(30.0, 42.0);
  const double half_width = uni(14.0, 20.0);
  const double bulge = uni(3.0, 6.0);
  const double theta = uni(-20.0, 20.0) * std::numbers::pi / 180.0;
  const double dir = p.kind == RegionKind::AnteriorHorn ? -1.0 : 1.0;
  const Vec2 center{dims.height / 2.0 + uni(-12.0, 12.0), dims.width / 2.0 + uni(-12.0, 12.0)};

  const Vec2 u{std::sin(theta), dir * std::cos(theta)};
  const Vec2 v{dir * std::cos(theta), -std::sin(theta)};
  const Vec2 corner = center - (depth / 2.0) * u;
  auto arc = [&](double s) { return corner + (depth + bulge * (1.0 - s * s)) * u + (s * half_width) * v; };

  Layout L;
  L.outline.push_back(corner);
  const Polygon edge = sample_arc(64, arc);
  L.outline.insert(L.outline.end(), edge.begin(), edge.end());
  L.rims.push_back(edge);

  L.tear_origin = corner;
  L.tear_axis = u;
  L.tear_lo = (3.0 * depth + bulge) / 4.0;
  L.tear_hi = L.tear_lo + kTearWidth;

  // Blob off the inner edge running from the corner to arc(-1).
  const Vec2 inner_mid = 0.5 * (corner + arc(-1.0));
  const Vec2 e = arc(-1.0) - corner;
  Vec2 n{e.col, -e.row};
  n = (1.0 / std::sqrt(dot(n, n))) * n;
  if (dot(n, inner_mid - center) < 0.0) n = -1.0 * n;
  L.blob_center = inner_mid + 13.0 * n;
  L.blob_radius = 6.0;
  L.bridge_from = inner_mid;

  L.region.kind = p.kind;
  L.region.points.push_back(snap(corner, dims));
  Polyline line;
  for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) line.points.push_back(snap(arc(s), dims));
  L.region.lines.push_back(std::move(line));
  return L;
}

Layout body_layout(std::mt19937_64& rng, Dims dims) {
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const double half_width = uni(22.0, 30.0);
  const double side_half_height = uni(15.0, 22.0);
  const double center_half_height = uni(5.0, 8.0);
  const double bulge = uni(2.0, 4.0);
  const double phi = uni(-8.0, 8.0) * std::numbers::pi / 180.0;
  const Vec2 center{dims.height / 2.0 + uni(-12.0, 12.0), dims.width / 2.0 + uni(-12.0, 12.0)};

  // Local frame: y down the body's height, x across it.
  const Vec2 ey{std::cos(phi), std::sin(phi)};
  const Vec2 ex{-std::sin(phi), std::cos(phi)};
  auto at = [&](double y, double x) { return center + y * ey + x * ex; };
  auto side = [&](double sign, double s) {
    return at(s * side_half_height, sign * (half_width + bulge * (1.0 - s * s)));
  };
  auto left = [&](double s) { return side(-1.0, s); };
  auto right = [&](double s) { return side(1.0, s); };
  const Vec2 upper = at(-center_half_height, 0.0);
  const Vec2 lower = at(center_half_height, 0.0);

  Layout L;
  const Polygon left_edge = sample_arc(48, left);
  const Polygon right_edge = sample_arc(48, right);
  L.outline = left_edge;
  L.outline.push_back(lower);
  L.outline.insert(L.outline.end(), right_edge.rbegin(), right_edge.rend());
  L.outline.push_back(upper);
  L.rims = {left_edge, right_edge};

  L.tear_origin = center;
  L.tear_axis = ex;
  L.tear_lo = (3.0 * half_width + bulge) / 4.0 - kTearWidth / 2.0;
  L.tear_hi = L.tear_lo + kTearWidth;
  L.tear_symmetric = true;

  L.blob_center = at(-center_half_height - 12.0, 0.0);
  L.blob_radius = 5.0;
  L.bridge_from = upper;

  L.region.kind = RegionKind::Body;
  L.region.points = {snap(upper, dims), snap(lower, dims)};
  for (double sign : {-1.0, 1.0}) {
    Polyline line;
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) line.points.push_back(snap(side(sign, s), dims));
    L.region.lines.push_back(std::move(line));
  }
  return L;
}

void check(const PhantomParams& p) {
  auto intensity = [](int v) { return v >= 0 && v <= 255; };
  if (p.height < 96 || p.width < 96) throw InvalidParameter("phantom images need at least 96 pixels per side");
  if (!intensity(p.foreground) || !intensity(p.background)) {
    throw InvalidParameter("phantom intensities must lie in [0, 255]");
  }
  if (p.foreground == p.background) throw InvalidParameter("foreground and background intensities are equal");
  if (!(p.noise_sigma >= 0.0)) throw InvalidParameter("noise sigma must be non-negative");
  if (p.blur_radius < 0) throw InvalidParameter("blur radius must be non-negative");
}

}  // namespace

Phantom make_phantom(const PhantomParams& params) {
  check(params);
  const Dims dims{params.height, params.width};
  std::mt19937_64 rng(params.seed);
  const Layout L = params.kind == RegionKind::Body ? body_layout(rng, dims) : horn_layout(params, rng, dims);

  BinaryMask truth(dims);
  std::vector<double> level(dims.area(), static_cast<double>(params.background));
  const Vec2 bridge_to = L.blob_center;
  for (int r = 0; r < dims.height; ++r) {
    for (int c = 0; c < dims.width; ++c) {
      const Vec2 p{static_cast<double>(r), static_cast<double>(c)};
      double& v = level[static_cast<std::size_t>(r) * dims.width + c];
      if (inside(L.outline, p)) {
        truth.set(r, c);
        v = params.foreground;
        if (params.rim_contrast != 0) {
          for (const auto& rim : L.rims)
            if (polyline_distance(p, rim) <= kRimWidth) v = params.foreground + params.rim_contrast;
        }
        if (params.tear_contrast != 0) {
          double proj = dot(p - L.tear_origin, L.tear_axis);
          if (L.tear_symmetric) proj = std::abs(proj);
          if (proj >= L.tear_lo && proj < L.tear_hi) v = params.foreground + params.tear_contrast;
        }
      } else if (params.distractor) {
        const Vec2 d = p - L.blob_center;
        if (std::sqrt(dot(d, d)) <= L.blob_radius || segment_distance(p, L.bridge_from, bridge_to) <= 1.5) {
          v = params.foreground;
        }
      }
    }
  }

  level = box_blur(level, dims, params.blur_radius);
  std::vector<std::uint8_t> pixels(level.size());
  std::normal_distribution<double> noise(0.0, params.noise_sigma > 0.0 ? params.noise_sigma : 1.0);
  for (std::size_t i = 0; i < level.size(); ++i) {
    double v = level[i];
    if (params.noise_sigma > 0.0) v += noise(rng);
    pixels[i] = static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0, 255));
  }

  Phantom out;
  out.image = GrayImage(dims.height, dims.width, std::move(pixels));
  out.truth = std::move(truth);
  out.labels.dims = dims;
  out.labels.regions.push_back(L.region);
  out.params = params;
  return out;
}

std::vector<Phantom> make_phantom_suite(int horns, int bodies, std::uint64_t seed, double noise_sigma) {
  std::vector<Phantom> out;
  const int total = horns + bodies;
  for (int i = 0; i < total; ++i) {
    PhantomParams p;
    p.seed = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i);
    p.noise_sigma = noise_sigma;
    if (i < horns) {
      p.kind = i % 2 == 0 ? RegionKind::AnteriorHorn : RegionKind::PosteriorHorn;
    } else {
      p.kind = RegionKind::Body;
    }
    out.push_back(make_phantom(p));
  }
  return out;
}

Slice to_slice(const Phantom& phantom, std::string name) {
  return Slice{std::move(name), phantom.image, phantom.labels, phantom.truth};
}

}  // namespace weakseg
