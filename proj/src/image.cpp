#include "edgegeo/image.hpp"

#include <algorithm>
#include <cmath>

namespace edgegeo {

void DepthMap::validate() const {
  for (double d : data) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw validation_error("depth map contains a non-positive or non-finite entry");
    }
  }
}

size_t BinaryMap::count() const {
  size_t n = 0;
  for (auto b : data) n += (b != 0);
  return n;
}

SampleGrad bilinear_sample(const ImageF& img, int channel, double u, double v) {
  const int w = img.width, h = img.height;
  const double uc = std::clamp(u, 0.0, static_cast<double>(w - 1));
  const double vc = std::clamp(v, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(std::floor(uc)), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(std::floor(vc)), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double a = uc - x0;
  const double b = vc - y0;

  const double i00 = img.at(x0, y0, channel);
  const double i10 = img.at(x1, y0, channel);
  const double i01 = img.at(x0, y1, channel);
  const double i11 = img.at(x1, y1, channel);

  SampleGrad s;
  s.value = (1.0 - a) * (1.0 - b) * i00 + a * (1.0 - b) * i10 + (1.0 - a) * b * i01 + a * b * i11;
  // Outside the image the clamped blend is constant; on the closed boundary
  // the one-sided (in-cell) derivative applies.
  const bool u_live = u >= 0.0 && u <= w - 1;
  const bool v_live = v >= 0.0 && v <= h - 1;
  s.du = u_live ? (1.0 - b) * (i10 - i00) + b * (i11 - i01) : 0.0;
  s.dv = v_live ? (1.0 - a) * (i01 - i00) + a * (i11 - i10) : 0.0;
  return s;
}

void bilinear_cell(const ImageF& img, double u, double v, int& cx, int& cy) {
  const int w = img.width, h = img.height;
  const double uc = std::clamp(u, 0.0, static_cast<double>(w - 1));
  const double vc = std::clamp(v, 0.0, static_cast<double>(h - 1));
  cx = std::min(static_cast<int>(std::floor(uc)), std::max(w - 2, 0));
  cy = std::min(static_cast<int>(std::floor(vc)), std::max(h - 2, 0));
}

namespace {

void check_downsamplable(int w, int h) {
  if (w < 2 || h < 2) throw validation_error("downsample needs width and height >= 2");
}

}  // namespace

ImageF downsample(const ImageF& img) {
  check_downsamplable(img.width, img.height);
  ImageF out(img.width / 2, img.height / 2, img.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        out.at(x, y, c) = 0.25 * (img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) +
                                  img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c));
      }
    }
  }
  return out;
}

ScalarMap downsample(const ScalarMap& m) {
  check_downsamplable(m.width, m.height);
  ScalarMap out(m.width / 2, m.height / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = 0.25 * (m.at(2 * x, 2 * y) + m.at(2 * x + 1, 2 * y) + m.at(2 * x, 2 * y + 1) +
                             m.at(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

DepthMap downsample(const DepthMap& m) {
  DepthMap out;
  static_cast<ScalarMap&>(out) = downsample(static_cast<const ScalarMap&>(m));
  return out;
}

EdgeMap downsample(const EdgeMap& m) {
  EdgeMap out;
  static_cast<ScalarMap&>(out) = downsample(static_cast<const ScalarMap&>(m));
  return out;
}

NormalMap downsample(const NormalMap& m) {
  check_downsamplable(m.width, m.height);
  NormalMap out(m.width / 2, m.height / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      Vec3 n = m.at(2 * x, 2 * y) + m.at(2 * x + 1, 2 * y) + m.at(2 * x, 2 * y + 1) +
               m.at(2 * x + 1, 2 * y + 1);
      const double len = n.norm();
      out.set(x, y, len > 1e-12 ? Vec3(n / len) : Vec3(0, 0, -1));
    }
  }
  return out;
}

void downsample_adjoint_accum(const ScalarMap& grad_out, ScalarMap& grad_in) {
  for (int y = 0; y < grad_out.height; ++y) {
    for (int x = 0; x < grad_out.width; ++x) {
      const double g = 0.25 * grad_out.at(x, y);
      grad_in.at(2 * x, 2 * y) += g;
      grad_in.at(2 * x + 1, 2 * y) += g;
      grad_in.at(2 * x, 2 * y + 1) += g;
      grad_in.at(2 * x + 1, 2 * y + 1) += g;
    }
  }
}

ScalarMap luminance(const ImageF& img) {
  ScalarMap out(img.width, img.height);
  const double inv = 1.0 / img.channels;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double s = 0.0;
      for (int c = 0; c < img.channels; ++c) s += img.at(x, y, c);
      out.at(x, y) = s * inv;
    }
  }
  return out;
}

void image_gradients(const ImageF& img, ScalarMap& gx, ScalarMap& gy) {
  const ScalarMap lum = luminance(img);
  const int w = img.width, h = img.height;
  gx = ScalarMap(w, h);
  gy = ScalarMap(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (w > 1) {
        if (x == 0)
          gx.at(x, y) = lum.at(1, y) - lum.at(0, y);
        else if (x == w - 1)
          gx.at(x, y) = lum.at(w - 1, y) - lum.at(w - 2, y);
        else
          gx.at(x, y) = 0.5 * (lum.at(x + 1, y) - lum.at(x - 1, y));
      }
      if (h > 1) {
        if (y == 0)
          gy.at(x, y) = lum.at(x, 1) - lum.at(x, 0);
        else if (y == h - 1)
          gy.at(x, y) = lum.at(x, h - 1) - lum.at(x, h - 2);
        else
          gy.at(x, y) = 0.5 * (lum.at(x, y + 1) - lum.at(x, y - 1));
      }
    }
  }
}

}  // namespace edgegeo
