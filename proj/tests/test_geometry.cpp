#include <doctest.h>

#include <numbers>
#include <random>

#include "support.hpp"

using namespace relloc;
using test_support::approx;
using test_support::random_cloud;

TEST_SUITE("geometry") {

TEST_CASE("tof distance from two-way timing") {
  CHECK(tof_distance({20e-9, 10e-9}) == doctest::Approx(1.49896229).epsilon(1e-12));
  CHECK(tof_distance({10e-9, 10e-9}) == 0.0);

  // forward model for a 10 m ground-truth range, then the rounded figure
  const double t_init = 2.0 * 10.0 / kSpeedOfLight + 10e-9;
  CHECK(tof_distance({t_init, 10e-9}) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(approx(tof_distance({76.7e-9, 10e-9}), 9.998, 1e-3));

  CHECK_THROWS_AS(tof_distance({5e-9, 10e-9}), Error);
  CHECK_THROWS_AS(tof_distance({10e-9, -1e-9}), Error);
  CHECK_THROWS_AS(tof_distance({10e-9, 5e-9}, 0.0), std::invalid_argument);
  try {
    tof_distance({5e-9, 10e-9});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_timing);
  }
}

TEST_CASE("tof distance is linear in net flight time") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-9, 100e-9);
  for (int k = 0; k < 50; ++k) {
    const double res = u(rng);
    const double net = u(rng);
    const double d1 = tof_distance({res + net, res});
    const double d2 = tof_distance({res + 2.0 * net, res});
    CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-12));
  }
}

TEST_CASE("trilaterate known triangles") {
  const auto iso = trilaterate(2.0, std::sqrt(2.0), std::sqrt(2.0));
  CHECK(iso.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(iso.y_abs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(iso.inconsistent);

  const auto right = trilaterate(5.0, 3.0, 4.0);
  CHECK(right.x == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(right.y_abs == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(std::hypot(5.0 - right.x, right.y_abs) == doctest::Approx(4.0).epsilon(1e-12));

  const auto mid = trilaterate(2.0, 1.0, 1.0);
  CHECK(mid.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mid.y_abs == doctest::Approx(0.0));
}

TEST_CASE("trilaterate degenerate and inconsistent inputs") {
  CHECK_THROWS_AS(trilaterate(1e-7, 1.0, 1.0), Error);
  try {
    trilaterate(0.0, 1.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_basis);
  }
  CHECK_THROWS_AS(trilaterate(1.0, -0.5, 1.0), std::invalid_argument);

  // ranges that cannot close a triangle clamp y and set the flag
  const auto clamped = trilaterate(10.0, 1.0, 2.0);
  CHECK(clamped.inconsistent);
  CHECK(clamped.y_abs == 0.0);
}

TEST_CASE("resolve_mirror sign selection") {
  const TrilaterationResult cand{1.0, 1.0, false};
  const PlacedRange above{{1.0, 1.5}, 0.5};
  const PlacedRange below{{1.0, -1.5}, 0.5};
  CHECK(resolve_mirror(cand, std::vector<PlacedRange>{above}).y == doctest::Approx(1.0));
  CHECK(resolve_mirror(cand, std::vector<PlacedRange>{below}).y == doctest::Approx(-1.0));

  const Point2 free = resolve_mirror({1.8, 2.4, false}, {});
  CHECK(free.x == doctest::Approx(1.8));
  CHECK(free.y == doctest::Approx(2.4));

  // symmetric priors tie toward +y
  const PlacedRange on_axis{{0.0, 0.0}, 1.0};
  CHECK(resolve_mirror(cand, std::vector<PlacedRange>{on_axis}).y > 0.0);
}

TEST_CASE("best_rigid_align identity and quarter turn") {
  std::mt19937_64 rng(11);
  const auto cloud = random_cloud(rng, 6);
  const auto id = best_rigid_align(cloud, cloud);
  CHECK(approx(id.tx, 0.0, 1e-12));
  CHECK(approx(id.ty, 0.0, 1e-12));
  CHECK(approx(id.theta, 0.0, 1e-12));

  const RigidTransform2 quarter{0.0, 0.0, std::numbers::pi / 2.0};
  std::vector<Point2> rotated;
  for (const auto& p : cloud) rotated.push_back(quarter.apply(p));
  const auto undo = best_rigid_align(rotated, cloud);
  CHECK(approx(undo.theta, -std::numbers::pi / 2.0, 1e-9));
  CHECK(approx(undo.tx, 0.0, 1e-9));
  CHECK(approx(undo.ty, 0.0, 1e-9));
}

TEST_CASE("best_rigid_align recovers a known transform") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto source = random_cloud(rng, 8);
    const RigidTransform2 truth{1.0, -2.0, 0.7};
    std::vector<Point2> target;
    for (const auto& p : source) target.push_back(truth.apply(p));
    const auto recovered = best_rigid_align(source, target);
    CHECK(approx(recovered.tx, truth.tx, 1e-6));
    CHECK(approx(recovered.ty, truth.ty, 1e-6));
    CHECK(approx(recovered.theta, truth.theta, 1e-6));
  }
}

TEST_CASE("best_rigid_align residual properties") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto source = random_cloud(rng, 7);
    auto target = random_cloud(rng, 7);
    const auto t = best_rigid_align(source, target);
    std::vector<Point2> moved;
    for (const auto& p : source) moved.push_back(t.apply(p));
    const double residual = lse(moved, target);
    CHECK(residual <= lse(source, target) + 1e-9);  // beats the identity candidate

    // residual is invariant to pre-transforming the source
    const RigidTransform2 pre{0.4, -1.1, 1.9};
    std::vector<Point2> pre_moved;
    for (const auto& p : source) pre_moved.push_back(pre.apply(p));
    const auto t2 = best_rigid_align(pre_moved, target);
    std::vector<Point2> moved2;
    for (const auto& p : pre_moved) moved2.push_back(t2.apply(p));
    CHECK(lse(moved2, target) == doctest::Approx(residual).epsilon(1e-6));
  }
}

TEST_CASE("best_rigid_align degenerate input") {
  const std::vector<Point2> single{{1.0, 2.0}};
  const std::vector<Point2> coincident{{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
  const std::vector<Point2> spread{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(best_rigid_align(single, single), Error);
  CHECK_THROWS_AS(best_rigid_align(coincident, spread), Error);
  CHECK_THROWS_AS(best_rigid_align(spread, coincident), Error);
  try {
    best_rigid_align(coincident, spread);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_input);
  }
}

TEST_CASE("rigid transforms preserve pairwise distances and compose") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform2 a{u(rng), u(rng), u(rng)};
    const RigidTransform2 b{u(rng), u(rng), u(rng)};
    const auto cloud = random_cloud(rng, 6);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      for (std::size_t j = i + 1; j < cloud.size(); ++j) {
        const double before = distance(cloud[i], cloud[j]);
        const double after = distance(a.apply(cloud[i]), a.apply(cloud[j]));
        CHECK(after == doctest::Approx(before).epsilon(1e-9));
      }
    }
    const auto ab = compose(a, b);
    const Point2 p = cloud.front();
    const Point2 two_step = a.apply(b.apply(p));
    const Point2 one_step = ab.apply(p);
    CHECK(approx(two_step.x, one_step.x, 1e-9));
    CHECK(approx(two_step.y, one_step.y, 1e-9));

    const auto inv = a.inverse();
    const Point2 round = inv.apply(a.apply(p));
    CHECK(approx(round.x, p.x, 1e-9));
    CHECK(approx(round.y, p.y, 1e-9));
  }
}

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(3.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(normalize_angle(0.5) == doctest::Approx(0.5));
  CHECK(normalize_angle(2.0 * std::numbers::pi + 0.25) == doctest::Approx(0.25));
}

TEST_CASE("lse basics and brute-force oracle") {
  const std::vector<Point2> a{{0.0, 0.0}};
  const std::vector<Point2> b{{3.0, 4.0}};
  CHECK(lse(a, a) == 0.0);
  CHECK(lse(a, b) == doctest::Approx(25.0));
  CHECK(lse(a, b) == lse(b, a));
  CHECK_THROWS_AS(lse(a, std::vector<Point2>{}), Error);

  std::mt19937_64 rng(59);
  const auto u = random_cloud(rng, 12);
  const auto v = random_cloud(rng, 12);
  // independent per-coordinate re-summation
  double expected = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) expected += (u[i].x - v[i].x) * (u[i].x - v[i].x);
  for (std::size_t i = 0; i < u.size(); ++i) expected += (u[i].y - v[i].y) * (u[i].y - v[i].y);
  CHECK(lse(u, v) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("trilaterate round trip on random triangles") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  int accepted = 0;
  while (accepted < 1000) {
    const Point2 p1{u(rng), u(rng)};
    const Point2 p2{u(rng), u(rng)};
    const Point2 p3{u(rng), u(rng)};
    const double d12 = distance(p1, p2);
    if (d12 < 0.1 || distance(p1, p3) < 0.1 || distance(p2, p3) < 0.1) continue;
    const double cross = (p2.x - p1.x) * (p3.y - p1.y) - (p2.y - p1.y) * (p3.x - p1.x);
    if (std::abs(cross) / d12 < 0.05) continue;  // nearly collinear
    ++accepted;

    // express the third point in the base frame of (p1, p2)
    const double phi = std::atan2(p2.y - p1.y, p2.x - p1.x);
    const Point2 q = p3 - p1;
    const Point2 expected{std::cos(phi) * q.x + std::sin(phi) * q.y,
                          -std::sin(phi) * q.x + std::cos(phi) * q.y};

    const auto tri = trilaterate(d12, distance(p1, p3), distance(p3, p2));
    CHECK_FALSE(tri.inconsistent);
    const PlacedRange prior{expected, 0.0};
    const Point2 got = resolve_mirror(tri, std::vector<PlacedRange>{prior});
    CHECK(approx(got.x, expected.x, 1e-9));
    CHECK(approx(got.y, expected.y, 1e-9));
  }
}

}  // TEST_SUITE
