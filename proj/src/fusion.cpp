#include "relloc/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace relloc {

namespace {

struct MeanLayout {
  std::vector<Point2> positions;
  std::vector<std::uint8_t> known;
};

MeanLayout per_node_mean(const std::vector<Layout>& layouts, std::size_t n) {
  MeanLayout mean;
  mean.positions.assign(n, Point2{});
  mean.known.assign(n, 0);
  std::vector<int> counts(n, 0);
  for (const auto& layout : layouts) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!layout.present[i]) continue;
      mean.positions[i] += layout.positions[i];
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) {
      mean.positions[i] = mean.positions[i] * (1.0 / counts[i]);
      mean.known[i] = 1;
    }
  }
  return mean;
}

// Rigid shift of one layout onto the mean, over the nodes both carry. With
// enough correspondences the single worst-fitting node is dropped and the fit
// repeated, so one badly placed node cannot drag the whole layout sideways.
void shift_to_mean(Layout& layout, const MeanLayout& mean) {
  std::vector<Point2> src;
  std::vector<Point2> dst;
  for (std::size_t i = 0; i < layout.positions.size(); ++i) {
    if (!layout.present[i] || !mean.known[i]) continue;
    src.push_back(layout.positions[i]);
    dst.push_back(mean.positions[i]);
  }
  if (src.size() < 2) return;
  RigidTransform2 t;
  try {
    t = best_rigid_align(src, dst);
    if (src.size() >= 4) {
      std::size_t worst = 0;
      double worst_residual = -1.0;
      for (std::size_t k = 0; k < src.size(); ++k) {
        const double r = squared_distance(t.apply(src[k]), dst[k]);
        if (r > worst_residual) {
          worst_residual = r;
          worst = k;
        }
      }
      src.erase(src.begin() + static_cast<std::ptrdiff_t>(worst));
      dst.erase(dst.begin() + static_cast<std::ptrdiff_t>(worst));
      t = best_rigid_align(src, dst);
    }
  } catch (const Error&) {
    return;  // coincident degenerate layout; leave it in place
  }
  for (std::size_t i = 0; i < layout.positions.size(); ++i) {
    if (layout.present[i]) layout.positions[i] = t.apply(layout.positions[i]);
  }
}

double lse_against_mean(const Layout& layout, const MeanLayout& mean) {
  double sum = 0.0;
  for (std::size_t i = 0; i < layout.positions.size(); ++i) {
    if (!layout.present[i] || !mean.known[i]) continue;
    sum += squared_distance(layout.positions[i], mean.positions[i]);
  }
  return sum;
}

}  // namespace

FusedEstimate fuse(const AlignedLayoutSet& aligned, const FusionParams& params) {
  const std::size_t count = aligned.layouts.size();
  if (count < 2) {
    throw Error(Errc::insufficient_layouts, "fuse: need at least two layouts");
  }
  if (!(params.retained_fraction > 0.0 && params.retained_fraction <= 1.0)) {
    throw std::invalid_argument("fuse: retained_fraction must be in (0, 1]");
  }
  if (params.tol_fuse_m <= 0.0 || params.max_iter < 1) {
    throw std::invalid_argument("fuse: tol_fuse must be positive and max_iter >= 1");
  }
  const std::size_t n = aligned.layouts.front().positions.size();

  FusedEstimate out;
  out.shifted_layouts = aligned.layouts;
  auto& working = out.shifted_layouts;

  // Lowest-score cutoff for the retained fraction, boundary ties included.
  const auto retention_cutoff = [&](const std::vector<double>& scores) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const auto keep = static_cast<std::size_t>(
        std::max(1.0, std::ceil(params.retained_fraction * static_cast<double>(count))));
    return sorted[std::min(keep, count) - 1] + kLseTieEps;
  };

  MeanLayout mean = per_node_mean(working, n);
  std::vector<double> scores(count, 0.0);
  for (int iter = 1; iter <= params.max_iter; ++iter) {
    out.iterations_used = iter;
    for (std::size_t r = 0; r < count; ++r) {
      shift_to_mean(working[r], mean);
      scores[r] = lse_against_mean(working[r], mean);
    }
    // The next reference mean comes from the currently best-agreeing
    // fraction, so badly wrecked layouts cannot keep dragging the consensus
    // they are being scored against.
    const double cutoff = retention_cutoff(scores);
    std::vector<Layout> consensus;
    for (std::size_t r = 0; r < count; ++r) {
      if (scores[r] <= cutoff) consensus.push_back(working[r]);
    }
    MeanLayout next = per_node_mean(consensus, n);
    // Re-pin the gauge so the converged set still honours the frame
    // convention; one common transform leaves all relative residuals intact.
    const CanonicalMap gauge = canonical_map(next.positions, aligned.frame);
    for (auto& layout : working) {
      for (std::size_t i = 0; i < n; ++i) {
        if (layout.present[i]) layout.positions[i] = gauge(layout.positions[i]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (next.known[i]) next.positions[i] = gauge(next.positions[i]);
    }
    double move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mean.known[i] && next.known[i]) {
        move = std::max(move, distance(mean.positions[i], next.positions[i]));
      }
    }
    mean = std::move(next);
    if (move < params.tol_fuse_m) break;
  }

  out.layout_lse.resize(count);
  for (std::size_t r = 0; r < count; ++r) {
    out.layout_lse[r] = {aligned.layouts[r].base, scores[r]};
  }

  // Retention: keep the fraction with the lowest LSE, plus boundary ties.
  const double cutoff = retention_cutoff(scores);
  std::vector<Layout> retained_layouts;
  for (std::size_t r = 0; r < count; ++r) {
    if (scores[r] <= cutoff) {
      out.retained.push_back(aligned.layouts[r].base);
      retained_layouts.push_back(working[r]);
    }
  }

  MeanLayout fused = per_node_mean(retained_layouts, n);
  out.positions = std::move(fused.positions);
  out.position_known = std::move(fused.known);
  return out;
}

}  // namespace relloc
