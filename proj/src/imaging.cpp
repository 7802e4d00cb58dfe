#include "weakseg/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "weakseg/error.hpp"

namespace weakseg {

namespace {

void check_dims(int height, int width) {
  if (height < 1 || width < 1) {
    throw InvalidParameter("image dimensions must be positive, got " + std::to_string(height) +
                           "x" + std::to_string(width));
  }
}

void check_kernel(int kernel, const char* op) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw InvalidParameter(std::string(op) + ": kernel must be odd and positive, got " +
                           std::to_string(kernel));
  }
}

void check_same_dims(Dims a, Dims b) {
  if (a != b) throw ContractError("mask dimensions differ");
}

// Running window OR/AND along one axis. `all` selects erosion semantics where
// any out-of-range sample clears the output.
BinaryMask sweep(const BinaryMask& in, int radius, bool horizontal, bool all) {
  const int h = in.height();
  const int w = in.width();
  BinaryMask out(h, w);
  const int outer = horizontal ? h : w;
  const int inner = horizontal ? w : h;
  auto sample = [&](int o, int i) { return horizontal ? in.get(o, i) : in.get(i, o); };
  for (int o = 0; o < outer; ++o) {
    // Count set pixels inside the window [i - radius, i + radius] clipped to range.
    int count = 0;
    for (int i = 0; i <= std::min(radius, inner - 1); ++i) count += sample(o, i) ? 1 : 0;
    for (int i = 0; i < inner; ++i) {
      const int lo = i - radius;
      const int hi = i + radius;
      bool value;
      if (all) {
        value = lo >= 0 && hi < inner && count == 2 * radius + 1;
      } else {
        value = count > 0;
      }
      if (value) {
        if (horizontal) {
          out.set(o, i);
        } else {
          out.set(i, o);
        }
      }
      if (lo >= 0 && sample(o, lo)) --count;
      if (hi + 1 < inner && sample(o, hi + 1)) ++count;
    }
  }
  return out;
}

BinaryMask pad(const BinaryMask& mask, int border) {
  BinaryMask out(mask.height() + 2 * border, mask.width() + 2 * border);
  for (int r = 0; r < mask.height(); ++r)
    for (int c = 0; c < mask.width(); ++c)
      if (mask.get(r, c)) out.set(r + border, c + border);
  return out;
}

BinaryMask crop(const BinaryMask& mask, int border, Dims dims) {
  BinaryMask out(dims);
  for (int r = 0; r < dims.height; ++r)
    for (int c = 0; c < dims.width; ++c)
      if (mask.get(r + border, c + border)) out.set(r, c);
  return out;
}

std::vector<PixelPoint> dedupe_consecutive(std::vector<PixelPoint> pixels) {
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  return pixels;
}

long long cross(PixelPoint o, PixelPoint a, PixelPoint b) {
  return static_cast<long long>(a.row - o.row) * (b.col - o.col) -
         static_cast<long long>(a.col - o.col) * (b.row - o.row);
}

}  // namespace

int round_half_up(double value) { return static_cast<int>(std::floor(value + 0.5)); }

GrayImage::GrayImage(int height, int width, std::uint8_t fill) : dims_{height, width} {
  check_dims(height, width);
  pixels_.assign(dims_.area(), fill);
}

GrayImage::GrayImage(int height, int width, std::vector<std::uint8_t> pixels)
    : dims_{height, width}, pixels_(std::move(pixels)) {
  check_dims(height, width);
  if (pixels_.size() != dims_.area()) {
    throw InvalidParameter("pixel buffer holds " + std::to_string(pixels_.size()) +
                           " values, expected " + std::to_string(dims_.area()));
  }
}

BinaryMask::BinaryMask(int height, int width, bool fill) : dims_{height, width} {
  check_dims(height, width);
  bits_.assign(dims_.area(), fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
  check_same_dims(dims_, other.dims_);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

BinaryMask& BinaryMask::operator&=(const BinaryMask& other) {
  check_same_dims(dims_, other.dims_);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

bool BinaryMask::is_subset_of(const BinaryMask& other) const {
  check_same_dims(dims_, other.dims_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] && !other.bits_[i]) return false;
  return true;
}

BinaryMask operator|(BinaryMask a, const BinaryMask& b) { return a |= b; }
BinaryMask operator&(BinaryMask a, const BinaryMask& b) { return a &= b; }

GrayImage mean_smooth(const GrayImage& img, int kernel) {
  check_kernel(kernel, "mean_smooth");
  const int h = img.height();
  const int w = img.width();
  if (kernel > std::min(h, w)) {
    throw InvalidParameter("mean_smooth: kernel " + std::to_string(kernel) +
                           " exceeds image side " + std::to_string(std::min(h, w)));
  }
  if (kernel == 1) return img;
  const int r = kernel / 2;

  // Horizontal sums with replicated edges, then vertical sums of those.
  std::vector<int> rows(static_cast<std::size_t>(h) * w, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int s = 0;
      for (int dx = -r; dx <= r; ++dx) s += img.at(y, std::clamp(x + dx, 0, w - 1));
      rows[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  const long long n = static_cast<long long>(kernel) * kernel;
  GrayImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      long long s = 0;
      for (int dy = -r; dy <= r; ++dy) {
        s += rows[static_cast<std::size_t>(std::clamp(y + dy, 0, h - 1)) * w + x];
      }
      out.set(y, x, static_cast<std::uint8_t>(round_half_up(s, n)));
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int kernel) {
  check_kernel(kernel, "dilate");
  if (kernel == 1) return mask;
  const int r = kernel / 2;
  return sweep(sweep(mask, r, true, false), r, false, false);
}

BinaryMask erode(const BinaryMask& mask, int kernel) {
  check_kernel(kernel, "erode");
  if (kernel == 1) return mask;
  const int r = kernel / 2;
  return sweep(sweep(mask, r, true, true), r, false, true);
}

BinaryMask close(const BinaryMask& mask, int kernel, int iterations) {
  check_kernel(kernel, "close");
  if (iterations < 0) throw InvalidParameter("close: iterations must be non-negative");
  if (kernel == 1 || iterations == 0) return mask;
  const int border = (kernel / 2) * iterations;
  BinaryMask work = pad(mask, border);
  for (int i = 0; i < iterations; ++i) work = dilate(work, kernel);
  for (int i = 0; i < iterations; ++i) work = erode(work, kernel);
  return crop(work, border, mask.dims());
}

std::vector<PixelPoint> rasterize_segment(PixelPoint a, PixelPoint b) {
  const bool swapped = b < a;
  if (swapped) std::swap(a, b);
  const long long dr = b.row - a.row;
  const long long dc = b.col - a.col;
  const long long steps = std::max(std::llabs(dr), std::llabs(dc));
  std::vector<PixelPoint> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  if (steps == 0) {
    out.push_back(a);
    return out;
  }
  for (long long i = 0; i <= steps; ++i) {
    out.push_back({a.row + static_cast<int>(round_half_up(i * dr, steps)),
                   a.col + static_cast<int>(round_half_up(i * dc, steps))});
  }
  if (swapped) std::reverse(out.begin(), out.end());
  return out;
}

std::vector<PixelPoint> rasterize_bezier(PixelPoint p0, Vec2 p1, PixelPoint p2) {
  const double len = std::hypot(p1.row - p0.row, p1.col - p0.col) +
                     std::hypot(p2.row - p1.row, p2.col - p1.col);
  // Speed of B is bounded by twice the control-polygon length, so this step
  // count moves at most half a pixel per sample.
  const int steps = std::max(2, static_cast<int>(std::ceil(4.0 * len)));
  std::vector<PixelPoint> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const double a = (1.0 - t) * (1.0 - t);
    const double b = 2.0 * t * (1.0 - t);
    const double c = t * t;
    out.push_back({round_half_up(a * p0.row + b * p1.row + c * p2.row),
                   round_half_up(a * p0.col + b * p1.col + c * p2.col)});
  }
  out.front() = p0;
  out.back() = p2;
  return dedupe_consecutive(std::move(out));
}

std::vector<PixelPoint> rasterize_bezier(PixelPoint p0, PixelPoint p1, PixelPoint p2) {
  const bool collinear = cross(p0, p1, p2) == 0;
  const bool inside = p1.row >= std::min(p0.row, p2.row) && p1.row <= std::max(p0.row, p2.row) &&
                      p1.col >= std::min(p0.col, p2.col) && p1.col <= std::max(p0.col, p2.col);
  // A control point on the chord traces the chord itself.
  if (collinear && inside) return rasterize_segment(p0, p2);
  return rasterize_bezier(p0, Vec2{static_cast<double>(p1.row), static_cast<double>(p1.col)}, p2);
}

void paint(BinaryMask& mask, std::span<const PixelPoint> pixels) {
  for (const auto& p : pixels) mask.set_clipped(p);
}

BinaryMask fill_polygon(std::span<const PixelPoint> vertices, Dims dims) {
  if (vertices.size() < 3) {
    throw InvalidParameter("fill_polygon: need at least 3 vertices, got " +
                           std::to_string(vertices.size()));
  }
  BinaryMask out(dims);
  const std::size_t n = vertices.size();

  for (std::size_t i = 0; i < n; ++i) {
    paint(out, rasterize_segment(vertices[i], vertices[(i + 1) % n]));
  }

  int row_min = vertices[0].row;
  int row_max = vertices[0].row;
  for (const auto& v : vertices) {
    row_min = std::min(row_min, v.row);
    row_max = std::max(row_max, v.row);
  }
  row_min = std::max(row_min, 0);
  row_max = std::min(row_max, dims.height - 1);

  // Crossing x positions are kept as exact fractions num/den with den > 0.
  struct Crossing {
    long long num;
    long long den;
  };
  std::vector<Crossing> xs;
  for (int y = row_min; y <= row_max; ++y) {
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      PixelPoint top = vertices[i];
      PixelPoint bottom = vertices[(i + 1) % n];
      if (top.row == bottom.row) continue;
      if (bottom.row < top.row) std::swap(top, bottom);
      if (y < top.row || y >= bottom.row) continue;
      const long long den = bottom.row - top.row;
      xs.push_back({static_cast<long long>(top.col) * den +
                        static_cast<long long>(y - top.row) * (bottom.col - top.col),
                    den});
    }
    std::sort(xs.begin(), xs.end(), [](const Crossing& a, const Crossing& b) {
      return a.num * b.den < b.num * a.den;
    });
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const long long left = -floor_div(-xs[k].num, xs[k].den);  // ceil
      const long long right = floor_div(xs[k + 1].num, xs[k + 1].den);
      const long long lo = std::max<long long>(left, 0);
      const long long hi = std::min<long long>(right, dims.width - 1);
      for (long long x = lo; x <= hi; ++x) out.set(y, static_cast<int>(x));
    }
  }
  return out;
}

}  // namespace weakseg
