#include "relloc/gd.hpp"

#include <algorithm>
#include <cmath>

#include "relloc/anomaly.hpp"

namespace relloc {

namespace {

constexpr double kCoincidentGuard = 1e-9;   // m, gradient singularity radius
constexpr double kDecoincideNudge = 1e-6;   // m, deterministic escape along +x
constexpr int kMaxBacktracks = 20;

void check_sizes(std::span<const Point2> positions, const RangeTable& ranges, const char* who) {
  if (positions.size() != ranges.size()) {
    throw std::invalid_argument(std::string(who) + ": positions count must match node count");
  }
}

// Nudges the higher-indexed member of any coincident pair along +x so the
// gradient is defined at the starting point.
void decoincide(std::vector<Point2>& positions) {
  const std::size_t n = positions.size();
  for (int pass = 0; pass < 8; ++pass) {
    bool touched = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (distance(positions[i], positions[j]) < kCoincidentGuard) {
          positions[j].x += kDecoincideNudge;
          touched = true;
        }
      }
    }
    if (!touched) return;
  }
}

}  // namespace

double gd_loss(std::span<const Point2> positions, const RangeTable& ranges) {
  check_sizes(positions, ranges, "gd_loss");
  const std::size_t n = ranges.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!ranges.valid(i, j)) continue;
      const double residual = ranges.at(i, j) - distance(positions[i], positions[j]);
      loss += residual * residual;
    }
  }
  return loss;
}

std::vector<Point2> gd_gradient(std::span<const Point2> positions, const RangeTable& ranges) {
  check_sizes(positions, ranges, "gd_gradient");
  const std::size_t n = ranges.size();
  std::vector<Point2> grad(n, Point2{});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!ranges.valid(i, j)) continue;
      const Point2 diff = positions[i] - positions[j];
      const double dist = diff.norm();
      if (dist < kCoincidentGuard) {
        throw Error(Errc::coincident_points, "gd_gradient: coincident positions");
      }
      const double scale = -2.0 * (ranges.at(i, j) - dist) / dist;
      grad[i] += diff * scale;
      grad[j] += diff * (-scale);
    }
  }
  return grad;
}

GdResult gd_optimize(std::vector<Point2> init, const RangeTable& ranges, const FrameSpec& frame,
                     const GdParams& params) {
  check_sizes(init, ranges, "gd_optimize");
  if (params.step <= 0.0 || params.max_iter < 1 || params.tol_loss <= 0.0) {
    throw std::invalid_argument("gd_optimize: invalid parameters");
  }
  for (const auto& p : init) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("gd_optimize: initialization must be finite");
    }
  }
  decoincide(init);

  GdResult result;
  std::vector<Point2>& positions = init;
  std::vector<Point2> candidate(positions.size());
  double loss = gd_loss(positions, ranges);
  result.loss_trace.reserve(static_cast<std::size_t>(params.max_iter) + 1);
  result.loss_trace.push_back(loss);

  for (int iter = 0; iter < params.max_iter; ++iter) {
    const std::vector<Point2> grad = gd_gradient(positions, ranges);
    double step = params.step;
    double next_loss = loss;
    if (params.line_search) {
      bool accepted = false;
      for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
        for (std::size_t i = 0; i < positions.size(); ++i) {
          candidate[i] = positions[i] - grad[i] * step;
        }
        next_loss = gd_loss(candidate, ranges);
        if (next_loss <= loss) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        result.converged = true;  // no descent left at numerical resolution
        break;
      }
    } else {
      for (std::size_t i = 0; i < positions.size(); ++i) {
        candidate[i] = positions[i] - grad[i] * step;
      }
      next_loss = gd_loss(candidate, ranges);
      if (!std::isfinite(next_loss)) {
        throw Error(Errc::non_finite_loss, "gd_optimize: diverged without line search");
      }
    }
    positions.swap(candidate);
    const double improvement = loss - next_loss;
    loss = next_loss;
    result.loss_trace.push_back(loss);
    if (improvement >= 0.0 && improvement < params.tol_loss) {
      result.converged = true;
      break;
    }
  }

  canonicalize(positions, frame);
  result.positions = std::move(positions);
  return result;
}

AlignedLayoutSet gd_layouts(const AlignedLayoutSet& aligned, const RangeTable& ranges,
                            const GdParams& params) {
  AlignedLayoutSet out;
  out.frame = aligned.frame;
  for (const auto& layout : aligned.layouts) {
    if (std::find(layout.present.begin(), layout.present.end(), 0) != layout.present.end()) {
      continue;  // needs a full initialization vector
    }
    GdResult res = gd_optimize(layout.positions, ranges, aligned.frame, params);
    Layout converged;
    converged.base = layout.base;
    converged.positions = std::move(res.positions);
    converged.flagged.assign(converged.positions.size(), 0);
    converged.present.assign(converged.positions.size(), 1);
    out.layouts.push_back(std::move(converged));
  }
  return out;
}

std::vector<double> gd_configuration_dispersion(const AlignedLayoutSet& aligned,
                                                const RangeTable& ranges,
                                                const GdParams& params) {
  const AlignedLayoutSet converged = gd_layouts(aligned, ranges, params);
  return per_node_position_sd(converged.layouts, ranges.size());
}

}  // namespace relloc
