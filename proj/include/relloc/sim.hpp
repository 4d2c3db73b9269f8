#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "relloc/layouts.hpp"

namespace relloc {

inline constexpr double kVMax = 0.3;           // m/s, mobile node speed
inline constexpr double kMinSeparation = 0.3;  // m, enforced at spawn

struct NlosModel {
  std::vector<int> nodes;                  // every pair touching these nodes is affected
  std::vector<std::pair<int, int>> pairs;  // explicitly affected pairs
  double bias_mean_m = 0.3;
  double bias_sigma_m = 0.1;
  double probability = 0.0;  // per affected pair, per timestamp
};

enum class AnomalyMode { constant_bias, timing_error };

struct AnomalyInjection {
  int node = -1;  // -1 disables injection
  double bias_m = 1.5;
  AnomalyMode mode = AnomalyMode::constant_bias;
};

struct SimScenario {
  int n_nodes = 8;
  std::vector<int> static_nodes = {0, 1};
  double arena_width_m = 8.0;
  double arena_length_m = 9.0;
  int duration = 100;  // timestamps
  double dt_s = 1.0;
  double noise_sigma_m = 0.05;
  NlosModel nlos;
  AnomalyInjection anomaly;
  std::uint64_t seed = 1;
  double speed_of_light_mps = kSpeedOfLight;

  void validate() const;  // throws config_invalid
};

struct GroundTruthLog {
  std::vector<std::vector<Point2>> frames;  // [timestamp][node]
};

// Independent deterministic generator for one substream of a seeded run.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream_id);

// Static nodes pinned along the near edge; mobile nodes follow seeded
// random-waypoint paths. NLOS-designated nodes draw their waypoints from an
// occluded corner region so they spend the run behind the virtual obstruction.
GroundTruthLog generate_truth(const SimScenario& scenario);

// Forward ToF model: true distance, Gaussian noise, nonnegative NLOS bias on
// affected pairs, and the anomaly offset on every pair touching the anomalous
// node. Each timestamp consumes its own random substream.
std::vector<RangeTable> generate_ranges(const GroundTruthLog& truth, const SimScenario& scenario);

}  // namespace relloc
