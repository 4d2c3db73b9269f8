#pragma once

// Shared helpers for the unit and acceptance suites: scenario builders,
// ground-truth comparison in the common frame, and small statistics.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "relloc/harness.hpp"

namespace test_support {

using namespace relloc;

inline bool approx(double a, double b, double eps) { return std::abs(a - b) <= eps; }

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

// Scenario with every stochastic effect disabled.
inline SimScenario exact_scenario(int duration = 1, std::uint64_t seed = 1) {
  SimScenario s;
  s.duration = duration;
  s.noise_sigma_m = 0.0;
  s.anomaly.node = -1;
  s.seed = seed;
  return s;
}

inline SimScenario noisy_scenario(double sigma, int duration, std::uint64_t seed) {
  SimScenario s = exact_scenario(duration, seed);
  s.noise_sigma_m = sigma;
  return s;
}

inline SimScenario biased_scenario(double sigma, double bias, int node, int duration,
                                   std::uint64_t seed) {
  SimScenario s = noisy_scenario(sigma, duration, seed);
  s.anomaly.node = node;
  s.anomaly.bias_m = bias;
  return s;
}

// Exact range table straight from a set of positions.
inline RangeTable table_from_positions(const std::vector<Point2>& pts, double timestamp = 0.0) {
  RangeTable rt(pts.size(), timestamp);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      rt.set(i, j, distance(pts[i], pts[j]));
    }
  }
  return rt;
}

// RMSE against ground truth after mapping the truth into the common frame and
// registering the estimate onto it via the frame nodes.
inline double rmse_vs_truth(const std::vector<Point2>& est, std::vector<Point2> gt,
                            const std::set<int>& nodes, const FrameSpec& frame = {}) {
  canonicalize(gt, frame);
  std::vector<Point2> src{est[frame.ref_a], est[frame.ref_b], est[frame.disambiguator]};
  std::vector<Point2> dst{gt[frame.ref_a], gt[frame.ref_b], gt[frame.disambiguator]};
  const RigidTransform2 t = best_rigid_align(src, dst);
  double sum = 0.0;
  for (int i : nodes) sum += squared_distance(t.apply(est[i]), gt[i]);
  return std::sqrt(sum / static_cast<double>(nodes.size()));
}

inline std::set<int> all_nodes(int n) {
  std::set<int> out;
  for (int i = 0; i < n; ++i) out.insert(i);
  return out;
}

inline std::set<int> nodes_without(int n, int skip) {
  std::set<int> out = all_nodes(n);
  out.erase(skip);
  return out;
}

// Runs the multilateration front end on one table.
struct MlResult {
  AlignedLayoutSet aligned;
  FusedEstimate fused;
};

inline MlResult localize_ml(const RangeTable& table, const FrameSpec& frame = {},
                            const FusionParams& fusion = {}) {
  MlResult out;
  out.aligned = to_common_frame(enumerate_layouts(table), frame);
  out.fused = fuse(out.aligned, fusion);
  return out;
}

inline std::vector<Point2> random_cloud(std::mt19937_64& rng, std::size_t n, double lo = -5.0,
                                        double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = u(rng);
  }
  return pts;
}

}  // namespace test_support
