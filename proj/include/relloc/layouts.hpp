#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "relloc/geometry.hpp"

namespace relloc {

// Symmetric pairwise range measurements at one timestamp. Entries start out
// missing; set() mirrors the value onto both triangles.
class RangeTable {
public:
  explicit RangeTable(std::size_t n, double timestamp_s = 0.0);

  std::size_t size() const { return n_; }
  double timestamp() const { return timestamp_s_; }

  void set(std::size_t i, std::size_t j, double range_m);
  void invalidate(std::size_t i, std::size_t j);
  bool valid(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j) const;

private:
  std::size_t index(std::size_t i, std::size_t j) const { return i * n_ + j; }
  void check(std::size_t i, std::size_t j) const;

  std::size_t n_;
  double timestamp_s_;
  std::vector<double> d_;
  std::vector<std::uint8_t> valid_;
};

using BasePair = std::pair<int, int>;

// Node positions computed with one base pair as the coordinate basis. At
// construction the first base node sits at the origin and the second on the
// +x axis; the common-frame transfer moves the whole layout afterwards.
struct Layout {
  BasePair base{0, 0};
  std::vector<Point2> positions;        // one per node; meaningless where !present
  std::vector<std::uint8_t> flagged;    // clamped radicand or missing prior range
  std::vector<std::uint8_t> present;
};

// The canonical coordinate convention: ref_a at the origin, ref_b on the +x
// axis, and the disambiguator node at y >= 0.
struct FrameSpec {
  int ref_a = 0;
  int ref_b = 1;
  int disambiguator = 2;
};

struct AlignedLayoutSet {
  std::vector<Layout> layouts;
  FrameSpec frame;
};

// Positions every non-base node by trilateration against the base pair, in
// ascending node-index order, resolving the mirror against all nodes placed
// so far. Nodes missing a base range are marked absent.
Layout build_layout(const RangeTable& ranges, BasePair base);

// One layout per valid, non-degenerate unordered base pair, ordered by pair.
std::vector<Layout> enumerate_layouts(const RangeTable& ranges);

// The map that takes a point set into the frame convention: translate ref_a
// to the origin, rotate ref_b onto the +x axis, then reflect if the
// disambiguator ended up below the axis.
struct CanonicalMap {
  Point2 origin;
  double cs = 1.0;
  double sn = 0.0;
  bool reflect = false;

  Point2 operator()(const Point2& p) const {
    const Point2 q = p - origin;
    Point2 r{cs * q.x + sn * q.y, -sn * q.x + cs * q.y};
    if (reflect) r.y = -r.y;
    return r;
  }
};

// Computes the canonicalizing map for a point set. Throws degenerate_reference
// when the reference nodes coincide.
CanonicalMap canonical_map(std::span<const Point2> positions, const FrameSpec& frame);

// Applies canonical_map in place.
void canonicalize(std::vector<Point2>& positions, const FrameSpec& frame);

// Transfers every layout into the common frame. Layouts missing one of the
// frame nodes cannot be expressed in that frame and are dropped.
AlignedLayoutSet to_common_frame(std::vector<Layout> layouts, const FrameSpec& frame);

}  // namespace relloc
