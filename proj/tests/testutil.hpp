#pragma once

// Shared generators for randomized tests. Everything is seeded explicitly;
// no global RNG state.

#include <random>

#include "edgegeo/asap.hpp"
#include "edgegeo/image.hpp"
#include "edgegeo/optimizer.hpp"

namespace testutil {

using namespace edgegeo;

inline ImageF random_image(int w, int h, int channels, std::mt19937_64& rng) {
  ImageF img(w, h, channels);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.data) v = u(rng);
  return img;
}

// Low-frequency positive depth: bilinear blend of a coarse random lattice.
inline DepthMap smooth_depth(int w, int h, std::mt19937_64& rng, double base = 4.0,
                             double amplitude = 1.5) {
  const int gw = 4, gh = 3;
  std::vector<double> lattice(gw * gh);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : lattice) v = base + amplitude * u(rng);
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = x / double(w - 1) * (gw - 1);
      const double gy = y / double(h - 1) * (gh - 1);
      const int ix = std::min(int(gx), gw - 2), iy = std::min(int(gy), gh - 2);
      const double a = gx - ix, b = gy - iy;
      d.at(x, y) = (1 - a) * (1 - b) * lattice[iy * gw + ix] + a * (1 - b) * lattice[iy * gw + ix + 1] +
                   (1 - a) * b * lattice[(iy + 1) * gw + ix] + a * b * lattice[(iy + 1) * gw + ix + 1];
    }
  }
  return d;
}

inline ScalarMap random_logits(int w, int h, std::mt19937_64& rng, double lo = -3.0, double hi = 1.0) {
  ScalarMap m(w, h);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : m.data) v = u(rng);
  return m;
}

inline EdgeMap random_edges(int w, int h, std::mt19937_64& rng) {
  return sigmoid_map(random_logits(w, h, rng, -4.0, 4.0));
}

inline NormalMap random_unit_normals(int w, int h, std::mt19937_64& rng) {
  NormalMap n(w, h);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Vec3 v(g(rng), g(rng), g(rng));
      while (v.norm() < 1e-6) v = Vec3(g(rng), g(rng), g(rng));
      v.normalize();
      if (v.z() > 0) v = -v;
      if (v.z() == 0) v.z() = -1e-3, v.normalize();
      n.set(x, y, v);
    }
  return n;
}

inline Vec6 random_small_twist(std::mt19937_64& rng, double rot = 0.02, double trans = 0.15) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec6 t;
  for (int i = 0; i < 3; ++i) t[i] = rot * u(rng);
  for (int i = 3; i < 6; ++i) t[i] = trans * u(rng);
  return t;
}

inline Intrinsics test_intrinsics(int w, int h) {
  Intrinsics K;
  K.fx = K.fy = 0.75 * w;
  K.cx = (w - 1) * 0.5;
  K.cy = (h - 1) * 0.5;
  return K;
}

// Depth map of the plane n . x = offset (camera at origin); requires the
// plane to face the camera across the whole image.
inline DepthMap plane_depth(int w, int h, const Intrinsics& K, const Vec3& n, double offset) {
  DepthMap d(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double den = n.dot(K.ray(x, y));
      d.at(x, y) = offset / den;
    }
  return d;
}

}  // namespace testutil
