#pragma once

#include <cstdint>
#include <vector>

#include "edgegeo/common.hpp"
#include "edgegeo/geometry.hpp"

namespace edgegeo {

/// Row-major intensity image, 1 or 3 channels, values in [0, 1].
struct ImageF {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  ImageF() = default;
  ImageF(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c) { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  double at(int x, int y, int c) const { return data[(static_cast<size_t>(y) * width + x) * channels + c]; }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

/// Per-pixel scalar field (also used for gradient maps).
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t size() const { return data.size(); }
};

/// Depth in meters; every entry must stay positive and finite.
struct DepthMap : ScalarMap {
  using ScalarMap::ScalarMap;
  void validate() const;
};

/// Edge strength, produced through a sigmoid, so entries live in (0, 1).
struct EdgeMap : ScalarMap {
  using ScalarMap::ScalarMap;
};

/// Row-major unit 3-vectors.
struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 per pixel

  NormalMap() = default;
  NormalMap(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0) {}

  Vec3 at(int x, int y) const {
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, const Vec3& n) {
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    data[i] = n.x();
    data[i + 1] = n.y();
    data[i + 2] = n.z();
  }
};

struct BinaryMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  BinaryMap() = default;
  BinaryMap(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  size_t count() const;
};

/// Level 0 is full resolution; each level halves width and height (floor).
template <class T>
struct Pyramid {
  std::vector<T> levels;
  const T& operator[](int l) const { return levels[l]; }
  int size() const { return static_cast<int>(levels.size()); }
};

struct SampleGrad {
  double value = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

/// 4-neighbor bilinear blend with clamp-to-edge, plus the exact analytic
/// partials of that blend. Where a coordinate is clamped the map is constant
/// along it and the partial is zero. Validity is the caller's concern.
SampleGrad bilinear_sample(const ImageF& img, int channel, double u, double v);

/// Integer cell index used by the sampler at (u, v); part of the kink
/// signature for finite-difference checks (partials jump across cells).
void bilinear_cell(const ImageF& img, double u, double v, int& cx, int& cy);

/// 2x2 box average. Output dims floor(w/2) x floor(h/2); throws below 2x2.
ImageF downsample(const ImageF& img);
ScalarMap downsample(const ScalarMap& m);
DepthMap downsample(const DepthMap& m);
EdgeMap downsample(const EdgeMap& m);
NormalMap downsample(const NormalMap& m);  // renormalized to unit length

/// Adjoint of scalar 2x2 box downsampling: spreads grad/4 to the four taps.
/// Rows/columns dropped by floor halving receive zero.
void downsample_adjoint_accum(const ScalarMap& grad_out, ScalarMap& grad_in);

template <class T>
Pyramid<T> build_pyramid(const T& level0, int levels) {
  if (levels < 1) throw validation_error("pyramid needs at least one level");
  Pyramid<T> p;
  p.levels.push_back(level0);
  for (int l = 1; l < levels; ++l) p.levels.push_back(downsample(p.levels.back()));
  return p;
}

/// Mean over channels.
ScalarMap luminance(const ImageF& img);

/// Central differences in the interior, one-sided at the borders.
/// 3-channel input is converted through luminance first.
void image_gradients(const ImageF& img, ScalarMap& gx, ScalarMap& gy);

}  // namespace edgegeo
