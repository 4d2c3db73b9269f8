#pragma once

#include <vector>

#include "relloc/layouts.hpp"

namespace relloc {

struct FusionParams {
  double retained_fraction = 0.5;  // fraction of lowest-LSE layouts kept
  double tol_fuse_m = 1e-6;        // stop when the mean moves less than this
  int max_iter = 10;
};

// Layouts whose LSE lies within this absolute slack of the retention cutoff
// count as tied and are all kept.
inline constexpr double kLseTieEps = 1e-12;

struct LayoutScore {
  BasePair base;
  double lse = 0.0;
};

struct FusedEstimate {
  std::vector<Point2> positions;              // per-node fused estimate
  std::vector<std::uint8_t> position_known;   // false if no retained layout carries the node
  std::vector<LayoutScore> layout_lse;        // one entry per input layout, input order
  std::vector<BasePair> retained;             // base pairs averaged into the estimate
  int iterations_used = 0;
  std::vector<Layout> shifted_layouts;        // converged working set, input order
};

// Iteratively aligns every layout to the per-node mean (rigid shift in x, y,
// theta), re-pinning the gauge to the frame convention each pass, until the
// mean settles. Layouts are then scored by their LSE against the mean and the
// fused positions are the per-node mean over the retained lowest-LSE layouts.
FusedEstimate fuse(const AlignedLayoutSet& aligned, const FusionParams& params = {});

}  // namespace relloc
