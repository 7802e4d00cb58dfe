#pragma once

#include <cstdint>
#include <vector>

#include "weakseg/eval.hpp"
#include "weakseg/imaging.hpp"
#include "weakseg/weaklabel.hpp"

namespace weakseg {

/// Synthetic slice description. Shape, size, pose and position are drawn from
/// `seed`; everything else is explicit.
struct PhantomParams {
  RegionKind kind = RegionKind::AnteriorHorn;
  int foreground = 60;
  int background = 160;
  double noise_sigma = 0.0;
  int blur_radius = 1;       ///< box blur half-width applied before noise
  std::uint64_t seed = 0;
  int height = 224;
  int width = 224;
  /// Brighter band along the annotated outer edge(s).
  int rim_contrast = 45;
  /// Bright two-pixel band crossing the region between the center point and
  /// the outer edge.
  int tear_contrast = 90;
  /// Dark blob outside the region joined to it by a thin bridge.
  bool distractor = true;
};

/// Horns are triangles with a convex outer edge; the body is a symmetric
/// double triangle narrowing toward its center.
struct Phantom {
  GrayImage image;
  BinaryMask truth;
  WeakLabelSet labels;
  PhantomParams params;
};

/// Throws InvalidParameter for images smaller than 96 pixels per side,
/// intensities outside [0, 255], equal foreground and background, or negative
/// noise / blur.
Phantom make_phantom(const PhantomParams& params);

/// `horns` horn phantoms (alternating anterior / posterior) followed by
/// `bodies` body phantoms. Phantom i is seeded from `seed` and i.
std::vector<Phantom> make_phantom_suite(int horns, int bodies, std::uint64_t seed, double noise_sigma = 0.0);

Slice to_slice(const Phantom& phantom, std::string name);

}  // namespace weakseg
