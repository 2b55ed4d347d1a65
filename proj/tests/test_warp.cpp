#include <doctest.h>

#include <random>

#include "edgegeo/optimizer.hpp"
#include "edgegeo/warp.hpp"
#include "ref/reference.hpp"
#include "testutil.hpp"

using namespace edgegeo;

TEST_CASE("identity warp reproduces the source") {
  std::mt19937_64 rng(21);
  const ImageF img = testutil::random_image(16, 12, 3, rng);
  const DepthMap depth = testutil::smooth_depth(16, 12, rng);
  const Intrinsics K = testutil::test_intrinsics(16, 12);

  const WarpResult r = warp(img, depth, PoseSE3::identity(), K);
  for (size_t i = 0; i < img.data.size(); ++i)
    CHECK(r.synthesized.data[i] == doctest::Approx(img.data[i]).epsilon(1e-12));
  CHECK(r.valid_mask.count() == img.pixel_count());
}

TEST_CASE("fly-out mask matches the per-pixel brute force exactly") {
  std::mt19937_64 rng(22);
  const Intrinsics K = testutil::test_intrinsics(16, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const DepthMap depth = testutil::smooth_depth(16, 12, rng);
    const Vec6 twist = testutil::random_small_twist(rng, 0.05, 0.6);
    const PoseSE3 T = PoseSE3::exp(twist);
    const BinaryMap got = fly_out_mask(depth, T, K, 16, 12);
    const BinaryMap want = ref::fly_out_mask(depth, T, K, 16, 12);
    CHECK(got.data == want.data);
  }
  // identity pose keeps everything valid
  const DepthMap depth = testutil::smooth_depth(16, 12, rng);
  CHECK(fly_out_mask(depth, PoseSE3::identity(), K, 16, 12).count() == depth.size());
}

TEST_CASE("large lateral translation flies everything out") {
  const Intrinsics K = testutil::test_intrinsics(16, 12);
  DepthMap depth(16, 12, 5.0);
  Vec6 t = Vec6::Zero();
  t[3] = 500.0;  // far beyond the field of view at depth 5
  CHECK(fly_out_mask(depth, PoseSE3::exp(t), K, 16, 12).count() == 0);
}

TEST_CASE("forward motion invalidates a border ring, counted per pixel") {
  const Intrinsics K = testutil::test_intrinsics(32, 24);
  DepthMap depth(32, 24, 5.0);
  Vec6 t = Vec6::Zero();
  t[5] = -0.3;  // source camera sits ahead: the scene expands and spills out
  const BinaryMap got = fly_out_mask(depth, PoseSE3::exp(t), K, 32, 24);
  const BinaryMap want = ref::fly_out_mask(depth, PoseSE3::exp(t), K, 32, 24);
  CHECK(got.data == want.data);
  CHECK(got.count() < got.data.size());  // some ring flew out
  // interior stays valid
  CHECK(got.at(16, 12) == 1);
}

TEST_CASE("mask monotonicity under a larger source rectangle") {
  std::mt19937_64 rng(23);
  const Intrinsics K = testutil::test_intrinsics(16, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const DepthMap depth = testutil::smooth_depth(16, 12, rng);
    const PoseSE3 T = PoseSE3::exp(testutil::random_small_twist(rng, 0.05, 0.5));
    const BinaryMap small = fly_out_mask(depth, T, K, 16, 12);
    const BinaryMap big = fly_out_mask(depth, T, K, 21, 15);
    for (size_t i = 0; i < small.data.size(); ++i)
      if (small.data[i]) CHECK(big.data[i]);
  }
}

TEST_CASE("photometric loss on identical frames with identity pose is zero") {
  std::mt19937_64 rng(24);
  const ImageF img = testutil::random_image(16, 12, 3, rng);
  const DepthMap depth = testutil::smooth_depth(16, 12, rng);
  const Intrinsics K = testutil::test_intrinsics(16, 12);

  const PhotometricLoss pl = photometric_loss(img, {{&img, Vec6::Zero()}}, depth, K);
  CHECK(pl.value == doctest::Approx(0.0).epsilon(1e-12));
  for (double g : pl.grad_logdepth.data) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pl.grad_twist[0].norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pl.pixel_count == img.pixel_count());
}

TEST_CASE("degenerate 1x1 input is rejected") {
  ImageF img(1, 1, 1, 0.5);
  DepthMap depth(1, 1, 2.0);
  const Intrinsics K{10, 10, 0, 0};
  CHECK_THROWS_AS(photometric_loss(img, {{&img, Vec6::Zero()}}, depth, K), validation_error);
  CHECK_THROWS_AS(photometric_loss(img, {}, depth, K), validation_error);
}

TEST_CASE("photometric value matches the serial reference") {
  std::mt19937_64 rng(25);
  const Intrinsics K = testutil::test_intrinsics(16, 12);
  for (int trial = 0; trial < 20; ++trial) {
    const ImageF target = testutil::random_image(16, 12, 3, rng);
    const ImageF s1 = testutil::random_image(16, 12, 3, rng);
    const ImageF s2 = testutil::random_image(16, 12, 3, rng);
    const DepthMap depth = testutil::smooth_depth(16, 12, rng);
    const std::vector<SourceView> sources = {{&s1, testutil::random_small_twist(rng)},
                                             {&s2, testutil::random_small_twist(rng)}};
    const PhotometricLoss pl = photometric_loss(target, sources, depth, K);
    CHECK(pl.value == doctest::Approx(ref::photometric_value(target, sources, depth, K)).epsilon(1e-12));
  }
}

TEST_CASE("photometric loss is invariant under consistent channel relabeling") {
  std::mt19937_64 rng(26);
  const Intrinsics K = testutil::test_intrinsics(16, 12);
  const ImageF target = testutil::random_image(16, 12, 3, rng);
  const ImageF source = testutil::random_image(16, 12, 3, rng);
  const DepthMap depth = testutil::smooth_depth(16, 12, rng);
  const Vec6 twist = testutil::random_small_twist(rng);

  auto permute = [](const ImageF& img) {
    ImageF out = img;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        out.at(x, y, 0) = img.at(x, y, 2);
        out.at(x, y, 1) = img.at(x, y, 0);
        out.at(x, y, 2) = img.at(x, y, 1);
      }
    return out;
  };
  const ImageF tp = permute(target), sp = permute(source);
  const double a = photometric_loss(target, {{&source, twist}}, depth, K).value;
  const double b = photometric_loss(tp, {{&sp, twist}}, depth, K).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("photometric gradients match central finite differences") {
  std::mt19937_64 rng(27);
  const Intrinsics K = testutil::test_intrinsics(16, 12);
  std::size_t checked_d = 0, checked_t = 0;

  for (int trial = 0; trial < 20; ++trial) {
    const ImageF target = testutil::random_image(16, 12, 3, rng);
    const ImageF s1 = testutil::random_image(16, 12, 3, rng);
    const ImageF s2 = testutil::random_image(16, 12, 3, rng);
    const DepthMap depth0 = testutil::smooth_depth(16, 12, rng);

    ScalarMap log_depth(16, 12);
    for (size_t i = 0; i < log_depth.data.size(); ++i) log_depth.data[i] = std::log(depth0.data[i]);
    std::vector<double> twists(12);
    const Vec6 t1 = testutil::random_small_twist(rng), t2 = testutil::random_small_twist(rng);
    for (int k = 0; k < 6; ++k) {
      twists[k] = t1[k];
      twists[6 + k] = t2[k];
    }

    auto eval = [&](KinkSignature* sig) {
      const DepthMap d = exp_map(log_depth);
      const std::vector<SourceView> sources = {{&s1, Eigen::Map<const Vec6>(twists.data())},
                                               {&s2, Eigen::Map<const Vec6>(twists.data() + 6)}};
      return photometric_loss(target, sources, d, K, sig).value;
    };

    const DepthMap d = exp_map(log_depth);
    const std::vector<SourceView> sources = {{&s1, Eigen::Map<const Vec6>(twists.data())},
                                             {&s2, Eigen::Map<const Vec6>(twists.data() + 6)}};
    const PhotometricLoss base = photometric_loss(target, sources, d, K);
    std::vector<double> grad_twists(12);
    for (int k = 0; k < 6; ++k) {
      grad_twists[k] = base.grad_twist[0][k];
      grad_twists[6 + k] = base.grad_twist[1][k];
    }

    const GradCheckReport rep = gradcheck(
        eval,
        {{"log_depth", &log_depth.data, &base.grad_logdepth.data}, {"twists", &twists, &grad_twists}},
        1e-4, 24, 1000 + trial);
    for (const GradCheckBlock& b : rep.blocks) {
      CHECK(b.worst_rel < 1e-4);
      if (b.name == "log_depth") checked_d += b.checked;
      if (b.name == "twists") checked_t += b.checked;
    }
  }
  // the kink detector must leave plenty of coverage
  CHECK(checked_d > 200);
  CHECK(checked_t > 100);
}
