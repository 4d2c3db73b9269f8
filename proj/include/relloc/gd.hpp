#pragma once

#include <vector>

#include "relloc/layouts.hpp"

namespace relloc {

struct GdParams {
  double step = 0.05;
  int max_iter = 500;
  double tol_loss = 1e-9;   // stop when the per-step improvement drops below this
  bool line_search = true;  // backtracking halving, at most 20 backtracks
};

struct GdResult {
  std::vector<Point2> positions;
  std::vector<double> loss_trace;  // loss before the first step, then per accepted step
  bool converged = false;
};

// Sum over valid unordered pairs of (measured range - estimated distance)^2.
double gd_loss(std::span<const Point2> positions, const RangeTable& ranges);

// Analytic gradient of gd_loss. Throws coincident_points within the guard
// radius where the distance term is singular.
std::vector<Point2> gd_gradient(std::span<const Point2> positions, const RangeTable& ranges);

// Steepest descent from the given initialization (normally the fused
// multilateration estimate). The result is re-anchored to the frame
// convention, since the loss is invariant to rigid motions.
GdResult gd_optimize(std::vector<Point2> init, const RangeTable& ranges, const FrameSpec& frame,
                     const GdParams& params = {});

// Runs the optimizer once per layout in the set, using that layout as the
// initialization, and returns the converged, re-anchored results keyed by the
// originating base pair.
AlignedLayoutSet gd_layouts(const AlignedLayoutSet& aligned, const RangeTable& ranges,
                            const GdParams& params = {});

// Per-node positional standard deviation across the per-layout optimizer
// results: the spread statistic that fails to separate anomalies when the
// global error is minimized.
std::vector<double> gd_configuration_dispersion(const AlignedLayoutSet& aligned,
                                                const RangeTable& ranges,
                                                const GdParams& params = {});

}  // namespace relloc
