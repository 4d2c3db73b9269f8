#include "relloc/layouts.hpp"

#include <algorithm>
#include <cmath>

namespace relloc {

RangeTable::RangeTable(std::size_t n, double timestamp_s)
    : n_(n), timestamp_s_(timestamp_s), d_(n * n, 0.0), valid_(n * n, 0) {}

void RangeTable::check(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw std::out_of_range("RangeTable: node index out of range");
  if (i == j) throw std::invalid_argument("RangeTable: diagonal entries are not measurements");
}

void RangeTable::set(std::size_t i, std::size_t j, double range_m) {
  check(i, j);
  if (!std::isfinite(range_m) || range_m < 0.0) {
    throw std::invalid_argument("RangeTable: ranges must be finite and nonnegative");
  }
  d_[index(i, j)] = d_[index(j, i)] = range_m;
  valid_[index(i, j)] = valid_[index(j, i)] = 1;
}

void RangeTable::invalidate(std::size_t i, std::size_t j) {
  check(i, j);
  valid_[index(i, j)] = valid_[index(j, i)] = 0;
}

bool RangeTable::valid(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_ || i == j) return false;
  return valid_[index(i, j)] != 0;
}

double RangeTable::at(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (!valid(i, j)) throw std::logic_error("RangeTable: reading a missing entry");
  return d_[index(i, j)];
}

Layout build_layout(const RangeTable& ranges, BasePair base) {
  const std::size_t n = ranges.size();
  const auto bn = static_cast<std::size_t>(base.first);
  const auto bm = static_cast<std::size_t>(base.second);
  if (!ranges.valid(bn, bm)) {
    throw Error(Errc::degenerate_basis, "build_layout: base pair has no valid range");
  }
  const double baseline = ranges.at(bn, bm);
  if (baseline <= kEpsilonBasis) {
    throw Error(Errc::degenerate_basis, "build_layout: base-pair distance below epsilon");
  }

  Layout layout;
  layout.base = base;
  layout.positions.assign(n, Point2{});
  layout.flagged.assign(n, 0);
  layout.present.assign(n, 0);
  layout.positions[bn] = {0.0, 0.0};
  layout.positions[bm] = {baseline, 0.0};
  layout.present[bn] = layout.present[bm] = 1;

  std::vector<std::size_t> placed{bn, bm};
  for (std::size_t i = 0; i < n; ++i) {
    if (i == bn || i == bm) continue;
    if (!ranges.valid(bn, i) || !ranges.valid(i, bm)) continue;  // absent from this layout

    const auto tri = trilaterate(baseline, ranges.at(bn, i), ranges.at(i, bm));
    std::vector<PlacedRange> prior;
    prior.reserve(placed.size());
    bool missing_prior = false;
    for (std::size_t j : placed) {
      if (ranges.valid(i, j)) {
        prior.push_back({layout.positions[j], ranges.at(i, j)});
      } else {
        missing_prior = true;
      }
    }
    layout.positions[i] = resolve_mirror(tri, prior);
    layout.present[i] = 1;
    layout.flagged[i] = (tri.inconsistent || missing_prior) ? 1 : 0;
    placed.push_back(i);
  }
  return layout;
}

std::vector<Layout> enumerate_layouts(const RangeTable& ranges) {
  const std::size_t n = ranges.size();
  if (n < 3) throw Error(Errc::too_few_nodes, "enumerate_layouts: need at least three nodes");
  std::vector<Layout> layouts;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!ranges.valid(i, j) || ranges.at(i, j) <= kEpsilonBasis) continue;
      layouts.push_back(build_layout(ranges, {static_cast<int>(i), static_cast<int>(j)}));
    }
  }
  return layouts;
}

CanonicalMap canonical_map(std::span<const Point2> positions, const FrameSpec& frame) {
  const auto a = static_cast<std::size_t>(frame.ref_a);
  const auto b = static_cast<std::size_t>(frame.ref_b);
  const auto c = static_cast<std::size_t>(frame.disambiguator);
  if (a >= positions.size() || b >= positions.size() || c >= positions.size()) {
    throw std::out_of_range("canonical_map: frame node index out of range");
  }
  CanonicalMap map;
  map.origin = positions[a];
  const Point2 axis = positions[b] - map.origin;
  if (axis.norm() <= kEpsilonBasis) {
    throw Error(Errc::degenerate_reference, "canonical_map: reference nodes coincide");
  }
  const double phi = std::atan2(axis.y, axis.x);
  map.cs = std::cos(phi);
  map.sn = std::sin(phi);
  map.reflect = map(positions[c]).y < 0.0;
  return map;
}

void canonicalize(std::vector<Point2>& positions, const FrameSpec& frame) {
  const CanonicalMap map = canonical_map(positions, frame);
  for (auto& p : positions) p = map(p);
}

AlignedLayoutSet to_common_frame(std::vector<Layout> layouts, const FrameSpec& frame) {
  AlignedLayoutSet out;
  out.frame = frame;
  const auto a = static_cast<std::size_t>(frame.ref_a);
  const auto b = static_cast<std::size_t>(frame.ref_b);
  const auto c = static_cast<std::size_t>(frame.disambiguator);
  for (auto& layout : layouts) {
    if (!layout.present[a] || !layout.present[b] || !layout.present[c]) continue;
    canonicalize(layout.positions, frame);
    out.layouts.push_back(std::move(layout));
  }
  return out;
}

}  // namespace relloc
