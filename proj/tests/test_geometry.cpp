#include <doctest.h>

#include <random>

#include "edgegeo/geometry.hpp"
#include "testutil.hpp"

using namespace edgegeo;

TEST_CASE("back_project hand cases") {
  const Intrinsics K{120.0, 110.0, 31.5, 23.5};
  const Vec3 p = back_project({K.cx, K.cy}, 5.0, K);
  CHECK(p.isApprox(Vec3(0, 0, 5), 1e-12));

  const Vec3 q = back_project({K.cx + K.fx, K.cy}, 2.0, K);
  CHECK(q.isApprox(Vec3(2, 0, 2), 1e-12));

  CHECK_THROWS_AS(back_project({0, 0}, 0.0, K), std::domain_error);
  CHECK_THROWS_AS(back_project({0, 0}, -1.0, K), std::domain_error);
}

TEST_CASE("project hand cases and errors") {
  const Intrinsics K{100.0, 100.0, 50.0, 50.0};
  const PixelCoord c = project({0, 0, 1}, K);
  CHECK(c.u == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(c.v == doctest::Approx(50.0).epsilon(1e-12));

  const PixelCoord p = project({1, 1, 2}, K);
  CHECK(p.u == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(p.v == doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_AS(project({0, 0, 0}, K), std::domain_error);
  CHECK_THROWS_AS(project({0, 0, -2}, K), std::domain_error);
}

TEST_CASE("project/back_project round trip over random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Intrinsics K{50 + 200 * u01(rng), 50 + 200 * u01(rng), 100 * u01(rng), 100 * u01(rng)};
    const PixelCoord p{200 * u01(rng) - 50, 200 * u01(rng) - 50};
    const double depth = 0.1 + 20 * u01(rng);
    const PixelCoord q = project(back_project(p, depth, K), K);
    CHECK(std::abs(q.u - p.u) < 1e-9);
    CHECK(std::abs(q.v - p.v) < 1e-9);
  }
}

TEST_CASE("projected points of a 3D plane row stay colinear") {
  const Intrinsics K{90.0, 85.0, 30.0, 20.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // points x = a + s b for random in-plane line, all in front of the camera
  const Vec3 a(0.3, -0.2, 4.0);
  const Vec3 b = Vec3(1.0, 0.4 * u(rng), 0.2 * u(rng)).normalized();
  std::vector<PixelCoord> proj;
  for (int i = 0; i < 10; ++i) proj.push_back(project(a + (0.3 * i) * b, K));
  // cross-product residual of consecutive triples in homogeneous coordinates
  for (size_t i = 0; i + 2 < proj.size(); ++i) {
    const Vec3 h0(proj[i].u, proj[i].v, 1.0), h1(proj[i + 1].u, proj[i + 1].v, 1.0),
        h2(proj[i + 2].u, proj[i + 2].v, 1.0);
    const Vec3 line = h0.cross(h2);
    CHECK(std::abs(line.dot(h1)) / line.head<2>().norm() < 1e-9);
  }
}

TEST_CASE("transform identity and pure translation") {
  const PoseSE3 id = PoseSE3::identity();
  CHECK(id.apply(Vec3(1, 2, 3)).isApprox(Vec3(1, 2, 3), 1e-15));

  Vec6 t = Vec6::Zero();
  t << 0, 0, 0, 1, 0, 0;
  CHECK(PoseSE3::exp(t).apply(Vec3(0, 0, 1)).isApprox(Vec3(1, 0, 1), 1e-15));
}

TEST_CASE("compose with inverse is the identity on random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec6 t;
    for (int k = 0; k < 3; ++k) t[k] = 2.5 * u(rng);
    for (int k = 3; k < 6; ++k) t[k] = 5.0 * u(rng);
    const PoseSE3 T = PoseSE3::exp(t);
    const PoseSE3 I = T * T.inverse();
    const Vec3 x(3 * u(rng), 3 * u(rng), 3 * u(rng));
    CHECK((I.apply(x) - x).norm() < 1e-9);
  }
}

TEST_CASE("transform is an isometry") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec6 t;
    for (int k = 0; k < 3; ++k) t[k] = 3.0 * u(rng);
    for (int k = 3; k < 6; ++k) t[k] = 4.0 * u(rng);
    const PoseSE3 T = PoseSE3::exp(t);
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
    CHECK(std::abs((T.apply(a) - T.apply(b)).norm() - (a - b).norm()) < 1e-9);
  }
}

TEST_CASE("se3 exp/log hand cases") {
  CHECK(PoseSE3::exp(Vec6::Zero()).R.isApprox(Mat3::Identity(), 1e-15));
  CHECK(PoseSE3::exp(Vec6::Zero()).t.norm() == 0.0);

  Vec6 t = Vec6::Zero();
  t[2] = M_PI / 2;  // 90 degrees about z
  const PoseSE3 T = PoseSE3::exp(t);
  CHECK((T.R * Vec3(1, 0, 0)).isApprox(Vec3(0, 1, 0), 1e-12));
}

TEST_CASE("se3 log(exp) round trip for |rotation| < 3") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Vec3 w(u(rng), u(rng), u(rng));
    if (w.norm() > 1e-12) w *= (2.99 * std::abs(u(rng))) / w.norm();
    Vec6 t;
    t.head<3>() = w;
    t.tail<3>() = Vec3(5 * u(rng), 5 * u(rng), 5 * u(rng));
    const Vec6 back = PoseSE3::exp(t).log();
    CHECK((back - t).norm() < 1e-9);
  }
}

TEST_CASE("rodrigues small-angle branch agrees at the switch point") {
  const Vec3 axis = Vec3(1, 2, 3).normalized();
  const Mat3 lo = rodrigues(axis * (1e-6 * 0.999999));
  const Mat3 hi = rodrigues(axis * (1e-6 * 1.000001));
  CHECK((lo - hi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("intrinsics validation and pyramid scaling") {
  CHECK_THROWS_AS((Intrinsics{0, 1, 0, 0}.validate()), validation_error);
  CHECK_THROWS_AS((Intrinsics{1, -2, 0, 0}.validate()), validation_error);

  // Halved intrinsics give the same ray through matching pixel centers.
  const Intrinsics K = testutil::test_intrinsics(64, 48);
  const Intrinsics K2 = K.half();
  for (int j : {0, 3, 10}) {
    const Vec3 fine = K.ray(2 * j + 0.5, 2 * j + 0.5);
    const Vec3 coarse = K2.ray(j, j);
    CHECK((fine - coarse).norm() < 1e-12);
  }
}
