#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace relloc;
using test_support::approx;
using test_support::table_from_positions;

namespace {

std::vector<Point2> spread_positions(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 8.0);
  std::vector<Point2> pts;
  while (static_cast<int>(pts.size()) < n) {
    Point2 p{u(rng), u(rng)};
    bool ok = true;
    for (const auto& q : pts) {
      if (distance(p, q) < 0.8) ok = false;
    }
    if (ok) pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_SUITE("layouts") {

TEST_CASE("range table mirrors entries and validates them") {
  RangeTable rt(4, 1.5);
  CHECK(rt.timestamp() == 1.5);
  rt.set(0, 1, 3.0);
  CHECK(rt.valid(1, 0));
  CHECK(rt.at(1, 0) == 3.0);
  CHECK(rt.at(2, 2) == 0.0);
  CHECK_FALSE(rt.valid(0, 2));
  CHECK_THROWS_AS(rt.set(0, 1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(rt.set(0, 1, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(rt.set(0, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)rt.at(0, 2), std::logic_error);
  rt.invalidate(0, 1);
  CHECK_FALSE(rt.valid(1, 0));
}

TEST_CASE("build_layout reproduces exact geometry") {
  const std::vector<Point2> gt{{0.0, 0.0}, {4.0, 0.0}, {2.0, 2.0}};
  const auto rt = table_from_positions(gt);

  const Layout layout = build_layout(rt, {0, 1});
  for (int i = 0; i < 3; ++i) {
    CHECK(layout.present[i]);
    CHECK(approx(layout.positions[i].x, gt[i].x, 1e-12));
    CHECK(approx(layout.positions[i].y, gt[i].y, 1e-12));
    CHECK_FALSE(layout.flagged[i]);
  }
}

TEST_CASE("basis change is a rigid motion") {
  const std::vector<Point2> gt{{0.0, 0.0}, {4.0, 0.0}, {2.0, 2.0}};
  const auto rt = table_from_positions(gt);
  const Layout other = build_layout(rt, {0, 2});
  const auto t = best_rigid_align(other.positions, gt);
  std::vector<Point2> moved;
  for (const auto& p : other.positions) moved.push_back(t.apply(p));
  const double residual = lse(moved, gt);
  const bool direct = residual < 1e-12;
  // the mirror convention may pick the reflected branch; either maps rigidly
  std::vector<Point2> reflected = other.positions;
  for (auto& p : reflected) p.y = -p.y;
  const auto t2 = best_rigid_align(reflected, gt);
  std::vector<Point2> moved2;
  for (const auto& p : reflected) moved2.push_back(t2.apply(p));
  CHECK((direct || lse(moved2, gt) < 1e-12));
}

TEST_CASE("all layouts of an exact scene agree after the common-frame transfer") {
  std::mt19937_64 rng(17);
  const auto gt = spread_positions(rng, 8);
  const auto rt = table_from_positions(gt);
  auto layouts = enumerate_layouts(rt);
  CHECK(layouts.size() == 28);

  const auto aligned = to_common_frame(std::move(layouts), FrameSpec{});
  REQUIRE(aligned.layouts.size() == 28);
  std::vector<Point2> reference = gt;
  canonicalize(reference, FrameSpec{});
  for (const auto& layout : aligned.layouts) {
    CHECK(lse(layout.positions, reference) < 1e-9);
  }
  for (std::size_t a = 0; a < aligned.layouts.size(); ++a) {
    for (std::size_t b = a + 1; b < aligned.layouts.size(); ++b) {
      CHECK(lse(aligned.layouts[a].positions, aligned.layouts[b].positions) < 1e-9);
    }
  }
}

TEST_CASE("enumerate_layouts counting") {
  std::mt19937_64 rng(19);
  const auto gt = spread_positions(rng, 8);
  auto rt = table_from_positions(gt);
  CHECK(enumerate_layouts(rt).size() == 28);

  rt.invalidate(2, 6);
  CHECK(enumerate_layouts(rt).size() == 27);

  const auto small = table_from_positions({{0.0, 0.0}, {3.0, 0.0}, {1.0, 2.0}});
  CHECK(enumerate_layouts(small).size() == 3);

  RangeTable two(2, 0.0);
  two.set(0, 1, 1.0);
  CHECK_THROWS_AS(enumerate_layouts(two), Error);
  try {
    enumerate_layouts(two);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_few_nodes);
  }
}

TEST_CASE("common frame convention and reflection fix") {
  const std::vector<Point2> canonical{{0.0, 0.0}, {4.0, 0.0}, {2.0, 2.0}, {1.0, 3.0}};
  Layout layout;
  layout.base = {0, 1};
  layout.positions = canonical;
  layout.flagged.assign(4, 0);
  layout.present.assign(4, 1);

  auto same = to_common_frame({layout}, FrameSpec{});
  REQUIRE(same.layouts.size() == 1);
  CHECK(lse(same.layouts[0].positions, canonical) < 1e-18);

  Layout mirrored = layout;
  for (auto& p : mirrored.positions) p.y = -p.y;
  auto fixed = to_common_frame({mirrored}, FrameSpec{});
  REQUIRE(fixed.layouts.size() == 1);
  CHECK(fixed.layouts[0].positions[2].y >= 0.0);
  CHECK(lse(fixed.layouts[0].positions, canonical) < 1e-18);

  Layout degenerate = layout;
  degenerate.positions[1] = degenerate.positions[0];
  CHECK_THROWS_AS(to_common_frame({degenerate}, FrameSpec{}), Error);
}

TEST_CASE("intra-layout distances match the generating ranges") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gt = spread_positions(rng, 6);
    const auto rt = table_from_positions(gt);
    for (const auto& layout : enumerate_layouts(rt)) {
      const auto base_n = static_cast<std::size_t>(layout.base.first);
      for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!layout.present[i] || layout.flagged[i] || i == base_n) continue;
        const double placed = distance(layout.positions[i], layout.positions[base_n]);
        CHECK(placed == doctest::Approx(rt.at(base_n, i)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("missing ranges mark nodes absent or flagged") {
  std::mt19937_64 rng(37);
  const auto gt = spread_positions(rng, 5);
  auto rt = table_from_positions(gt);

  // node 3 loses a base range: absent from the (0,1) layout
  rt.invalidate(0, 3);
  const Layout layout = build_layout(rt, {0, 1});
  CHECK_FALSE(layout.present[3]);
  CHECK(layout.present[2]);
  CHECK(layout.present[4]);

  // node 4 loses only the range to an earlier-placed peer: placed but flagged
  auto rt2 = table_from_positions(gt);
  rt2.invalidate(2, 4);
  const Layout layout2 = build_layout(rt2, {0, 1});
  CHECK(layout2.present[4]);
  CHECK(layout2.flagged[4]);

  // a dropped base pair disappears from the enumeration
  auto rt3 = table_from_positions(gt);
  rt3.invalidate(0, 1);
  for (const auto& l : enumerate_layouts(rt3)) {
    CHECK(l.base != BasePair{0, 1});
  }
  CHECK_THROWS_AS(build_layout(rt3, {0, 1}), Error);
}

}  // TEST_SUITE
