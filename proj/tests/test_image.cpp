#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "edgegeo/image.hpp"
#include "edgegeo/image_io.hpp"
#include "testutil.hpp"

using namespace edgegeo;

TEST_CASE("bilinear sample at integer pixels returns stored values") {
  std::mt19937_64 rng(1);
  const ImageF img = testutil::random_image(7, 5, 1, rng);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      const SampleGrad s = bilinear_sample(img, 0, x, y);
      CHECK(s.value == doctest::Approx(img.at(x, y, 0)).epsilon(1e-15));
    }
  // one-sided partials at an interior integer pixel
  const SampleGrad s = bilinear_sample(img, 0, 3, 2);
  CHECK(s.du == doctest::Approx(img.at(4, 2, 0) - img.at(3, 2, 0)));
  CHECK(s.dv == doctest::Approx(img.at(3, 3, 0) - img.at(3, 2, 0)));
}

TEST_CASE("bilinear sample on a constant image") {
  ImageF img(6, 4, 1, 0.37);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 7.0);
  for (int i = 0; i < 100; ++i) {
    const SampleGrad s = bilinear_sample(img, 0, u(rng), u(rng));
    CHECK(s.value == doctest::Approx(0.37).epsilon(1e-15));
    CHECK(s.du == 0.0);
    CHECK(s.dv == 0.0);
  }
}

TEST_CASE("bilinear partials match central finite differences off the grid") {
  std::mt19937_64 rng(3);
  const ImageF img = testutil::random_image(9, 7, 3, rng);
  std::uniform_real_distribution<double> pu(0.3, 7.6), pv(0.3, 5.6);
  const double h = 1e-4;
  for (int i = 0; i < 300; ++i) {
    double u = pu(rng), v = pv(rng);
    // keep away from integer grid lines where the blend has kinks
    if (std::abs(u - std::round(u)) < 3 * h) u += 10 * h;
    if (std::abs(v - std::round(v)) < 3 * h) v += 10 * h;
    const int c = i % 3;
    const SampleGrad s = bilinear_sample(img, c, u, v);
    const double fdu =
        (bilinear_sample(img, c, u + h, v).value - bilinear_sample(img, c, u - h, v).value) / (2 * h);
    const double fdv =
        (bilinear_sample(img, c, u, v + h).value - bilinear_sample(img, c, u, v - h).value) / (2 * h);
    CHECK(std::abs(s.du - fdu) <= 1e-5 * std::max({1.0, std::abs(s.du), std::abs(fdu)}));
    CHECK(std::abs(s.dv - fdv) <= 1e-5 * std::max({1.0, std::abs(s.dv), std::abs(fdv)}));
  }
}

TEST_CASE("bilinear sample is continuous across cell boundaries") {
  std::mt19937_64 rng(4);
  const ImageF img = testutil::random_image(8, 8, 1, rng);
  for (int x = 1; x < 7; ++x) {
    for (double v : {0.25, 3.7, 6.9}) {
      const double left = bilinear_sample(img, 0, x - 1e-13, v).value;
      const double right = bilinear_sample(img, 0, x + 1e-13, v).value;
      CHECK(std::abs(left - right) < 1e-12);
    }
  }
}

TEST_CASE("downsample basics") {
  DepthMap d(2, 2);
  d.at(0, 0) = 1;
  d.at(1, 0) = 2;
  d.at(0, 1) = 3;
  d.at(1, 1) = 4;
  const DepthMap half = downsample(d);
  CHECK(half.width == 1);
  CHECK(half.height == 1);
  CHECK(half.at(0, 0) == doctest::Approx(2.5).epsilon(1e-15));

  ImageF constant(6, 4, 3, 0.25);
  const ImageF down = downsample(constant);
  for (double v : down.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

  DepthMap tiny(1, 5, 1.0);
  CHECK_THROWS_AS(downsample(tiny), validation_error);
}

TEST_CASE("downsampling never increases gradient energy") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageF img = testutil::random_image(16, 12, 1, rng);
    auto energy = [](const ImageF& im) {
      ScalarMap gx, gy;
      image_gradients(im, gx, gy);
      double e = 0;
      for (size_t i = 0; i < gx.data.size(); ++i) e += gx.data[i] * gx.data[i] + gy.data[i] * gy.data[i];
      return e / gx.data.size();
    };
    CHECK(energy(downsample(img)) <= energy(img) + 1e-12);
  }
}

TEST_CASE("pyramid dimensions halve with floor") {
  std::mt19937_64 rng(6);
  const DepthMap d = testutil::smooth_depth(37, 21, rng);
  const auto pyr = build_pyramid(d, 3);
  CHECK(pyr[0].width == 37);
  CHECK(pyr[1].width == 18);
  CHECK(pyr[2].width == 9);
  CHECK(pyr[1].height == 10);
  CHECK(pyr[2].height == 5);
  for (int l = 0; l < 3; ++l)
    for (double v : pyr[l].data) CHECK(v > 0.0);
}

TEST_CASE("normal map downsampling renormalizes") {
  std::mt19937_64 rng(7);
  const NormalMap n = testutil::random_unit_normals(8, 6, rng);
  const NormalMap half = downsample(n);
  for (int y = 0; y < half.height; ++y)
    for (int x = 0; x < half.width; ++x) CHECK(half.at(x, y).norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("image gradients: constant and ramp") {
  ImageF constant(8, 6, 1, 0.5);
  ScalarMap gx, gy;
  image_gradients(constant, gx, gy);
  for (double v : gx.data) CHECK(v == 0.0);
  for (double v : gy.data) CHECK(v == 0.0);

  const int W = 10;
  ImageF ramp(W, 6, 1);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < W; ++x) ramp.at(x, y, 0) = double(x) / W;
  image_gradients(ramp, gx, gy);
  for (int y = 0; y < 6; ++y)
    for (int x = 1; x < W - 1; ++x) {
      CHECK(gx.at(x, y) == doctest::Approx(1.0 / W).epsilon(1e-12));
      CHECK(gy.at(x, y) == doctest::Approx(0.0));
    }
}

TEST_CASE("image gradients match a direct stencil recomputation") {
  std::mt19937_64 rng(8);
  const ImageF img = testutil::random_image(11, 9, 3, rng);
  ScalarMap gx, gy;
  image_gradients(img, gx, gy);
  const ScalarMap lum = luminance(img);
  for (int y = 0; y < 9; ++y) {
    for (int x = 1; x < 10; ++x)
      CHECK(gx.at(x, y) == doctest::Approx(0.5 * (lum.at(x + 1, y) - lum.at(x - 1, y))).epsilon(1e-12));
    CHECK(gx.at(0, y) == doctest::Approx(lum.at(1, y) - lum.at(0, y)).epsilon(1e-12));
    CHECK(gx.at(10, y) == doctest::Approx(lum.at(10, y) - lum.at(9, y)).epsilon(1e-12));
  }
}

TEST_CASE("PFM round trip is exact at float precision") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "edgegeo_pfm_test";
  fs::create_directories(dir);
  std::mt19937_64 rng(9);

  DepthMap d(5, 4);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  for (double& v : d.data) v = static_cast<double>(static_cast<float>(u(rng)));
  const std::string p = (dir / "depth.pfm").string();
  write_pfm(p, d);
  const ScalarMap back = read_pfm_scalar(p);
  REQUIRE(back.width == 5);
  REQUIRE(back.height == 4);
  for (size_t i = 0; i < d.data.size(); ++i) CHECK(back.data[i] == d.data[i]);

  // byte-identical when rewritten
  const std::string p2 = (dir / "depth2.pfm").string();
  ScalarMap again = back;
  write_pfm(p2, again);
  std::ifstream f1(p, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);

  const NormalMap n = testutil::random_unit_normals(6, 3, rng);
  const std::string np = (dir / "normal.pfm").string();
  NormalMap nf = n;
  for (double& v : nf.data) v = static_cast<double>(static_cast<float>(v));
  write_pfm(np, nf);
  const NormalMap nback = read_pfm_normal(np);
  for (size_t i = 0; i < nf.data.size(); ++i) CHECK(nback.data[i] == nf.data[i]);
}

TEST_CASE("PPM and PGM round trips") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "edgegeo_pnm_test";
  fs::create_directories(dir);
  std::mt19937_64 rng(10);

  ImageF img = testutil::random_image(7, 5, 3, rng);
  for (double& v : img.data) v = std::lround(v * 255.0) / 255.0;  // representable
  const std::string p = (dir / "img.ppm").string();
  write_ppm(p, img);
  const ImageF back = read_ppm(p);
  for (size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));

  BinaryMap bm(9, 4);
  for (size_t i = 0; i < bm.data.size(); ++i) bm.data[i] = (i * 7 % 3) == 0;
  const std::string bp = (dir / "edges.pgm").string();
  write_pgm8_binary(bp, bm);
  const BinaryMap bback = read_pgm8_binary(bp);
  CHECK(bback.data == bm.data);

  std::vector<std::uint16_t> labels(6 * 4);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint16_t>(i * 1021 % 65536);
  const std::string lp = (dir / "labels.pgm").string();
  write_pgm16(lp, 6, 4, labels);
  int lw = 0, lh = 0;
  const auto lback = read_pgm16(lp, lw, lh);
  CHECK(lw == 6);
  CHECK(lh == 4);
  CHECK(lback == labels);
}

TEST_CASE("malformed files report byte offsets") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "edgegeo_bad_test";
  fs::create_directories(dir);
  const std::string p = (dir / "bad.pfm").string();
  {
    std::ofstream f(p, std::ios::binary);
    f << "Pf\n4 4\n-1.0\nshort";
  }
  CHECK_THROWS_AS(read_pfm_scalar(p), io_error);
  try {
    read_pfm_scalar(p);
  } catch (const io_error& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
  CHECK_THROWS_AS(read_ppm("/nonexistent/file.ppm"), io_error);
}
