#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace weakseg {

/// Integer pixel coordinate; origin top-left, row grows downward.
struct PixelPoint {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const PixelPoint&, const PixelPoint&) = default;
};

/// Real-valued position in the same (row, col) frame as PixelPoint.
struct Vec2 {
  double row = 0.0;
  double col = 0.0;
};

struct Dims {
  int height = 0;
  int width = 0;

  bool contains(PixelPoint p) const noexcept {
    return p.row >= 0 && p.col >= 0 && p.row < height && p.col < width;
  }
  std::size_t area() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// 8-bit single-channel slice, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int height, int width, std::uint8_t fill = 0);
  GrayImage(int height, int width, std::vector<std::uint8_t> pixels);

  int height() const noexcept { return dims_.height; }
  int width() const noexcept { return dims_.width; }
  Dims dims() const noexcept { return dims_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int row, int col) const { return pixels_[index(row, col)]; }
  std::uint8_t at(PixelPoint p) const { return at(p.row, p.col); }
  void set(int row, int col, std::uint8_t value) { pixels_[index(row, col)] = value; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(col);
  }

  Dims dims_{};
  std::vector<std::uint8_t> pixels_;
};

/// Binary mask, row-major, one byte per pixel holding 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, bool fill = false);
  explicit BinaryMask(Dims dims, bool fill = false) : BinaryMask(dims.height, dims.width, fill) {}

  int height() const noexcept { return dims_.height; }
  int width() const noexcept { return dims_.width; }
  Dims dims() const noexcept { return dims_; }

  bool get(int row, int col) const { return bits_[index(row, col)] != 0; }
  bool get(PixelPoint p) const { return get(p.row, p.col); }
  void set(int row, int col, bool value = true) { bits_[index(row, col)] = value ? 1 : 0; }
  void set(PixelPoint p, bool value = true) { set(p.row, p.col, value); }
  /// Sets `p` when it lies inside the mask, ignores it otherwise.
  void set_clipped(PixelPoint p) {
    if (dims_.contains(p)) set(p);
  }

  std::size_t count() const noexcept;
  bool any() const noexcept { return count() != 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  BinaryMask& operator|=(const BinaryMask& other);
  BinaryMask& operator&=(const BinaryMask& other);
  BinaryMask complement() const;
  bool is_subset_of(const BinaryMask& other) const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(dims_.width) +
           static_cast<std::size_t>(col);
  }

  Dims dims_{};
  std::vector<std::uint8_t> bits_;
};

BinaryMask operator|(BinaryMask a, const BinaryMask& b);
BinaryMask operator&(BinaryMask a, const BinaryMask& b);

/// Box filter over a kernel x kernel window with edge replication. Sums are
/// exact integers and the mean is rounded half-up.
GrayImage mean_smooth(const GrayImage& img, int kernel);

/// Square-window dilation; pixels outside the mask count as unset.
BinaryMask dilate(const BinaryMask& mask, int kernel);
/// Square-window erosion; pixels outside the mask count as unset, so the
/// border ring of a full mask is cleared.
BinaryMask erode(const BinaryMask& mask, int kernel);
/// `iterations` dilations followed by as many erosions, computed on a canvas
/// padded far enough that shapes touching the border are not eaten.
BinaryMask close(const BinaryMask& mask, int kernel, int iterations = 1);

/// 8-connected digital segment from `a` to `b`, both endpoints included.
/// The pixel at major-axis step i is the exact line position rounded
/// half-up, evaluated from the lexicographically smaller endpoint so that
/// reversing the arguments only reverses the list.
std::vector<PixelPoint> rasterize_segment(PixelPoint a, PixelPoint b);

/// Quadratic Bezier (1-t)^2 P0 + 2t(1-t) P1 + t^2 P2, sampled densely and
/// rounded half-up, consecutive duplicates removed. Starts at p0, ends at p2,
/// consecutive pixels are 8-adjacent.
std::vector<PixelPoint> rasterize_bezier(PixelPoint p0, PixelPoint p1, PixelPoint p2);
std::vector<PixelPoint> rasterize_bezier(PixelPoint p0, Vec2 p1, PixelPoint p2);

/// Even-odd scanline fill of the closed polygon plus its rasterized outline.
/// Pixels outside `dims` are dropped. Collinear vertex lists fill to their
/// outline. Throws InvalidParameter for fewer than 3 vertices.
BinaryMask fill_polygon(std::span<const PixelPoint> vertices, Dims dims);

/// Sets every pixel of `pixels` that lies inside `mask`.
void paint(BinaryMask& mask, std::span<const PixelPoint> pixels);

/// Returns floor(num / den) for den > 0.
constexpr long long floor_div(long long num, long long den) {
  long long q = num / den;
  if ((num % den != 0) && (num < 0)) --q;
  return q;
}

/// Returns num / den rounded half-up, for den > 0.
constexpr long long round_half_up(long long num, long long den) {
  return floor_div(2 * num + den, 2 * den);
}

int round_half_up(double value);

}  // namespace weakseg
