#include "relloc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace relloc {

namespace {

constexpr double kEdgeMargin = 0.2;      // m, keep nodes off the arena walls
constexpr double kMobileYMin = 1.0;      // m, keep mobiles off the static baseline
constexpr double kAvoidanceRadius = 0.6; // m, planner buffer; hard floor stays kMinSeparation
constexpr int kSpawnAttempts = 10000;

struct Rect {
  double x0, y0, x1, y1;
  Point2 sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ux(x0, x1);
    std::uniform_real_distribution<double> uy(y0, y1);
    const double x = ux(rng);
    const double y = uy(rng);
    return {x, y};
  }
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

bool nlos_affected(const NlosModel& nlos, int i, int j) {
  for (int node : nlos.nodes) {
    if (node == i || node == j) return true;
  }
  for (const auto& [a, b] : nlos.pairs) {
    if ((a == i && b == j) || (a == j && b == i)) return true;
  }
  return false;
}

}  // namespace

void SimScenario::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::config_invalid, "scenario: " + msg); };
  if (n_nodes < 3) fail("n_nodes must be at least 3");
  if (duration < 1) fail("duration must be at least 1");
  if (dt_s <= 0.0) fail("dt_s must be positive");
  if (noise_sigma_m < 0.0) fail("noise_sigma_m must be nonnegative");
  if (arena_width_m <= 2.0 * kEdgeMargin || arena_length_m <= kMobileYMin + kEdgeMargin) {
    fail("arena too small for the placement margins");
  }
  std::set<int> statics;
  for (int s : static_nodes) {
    if (s < 0 || s >= n_nodes) fail("static node index out of range");
    if (!statics.insert(s).second) fail("duplicate static node index");
  }
  for (int node : nlos.nodes) {
    if (node < 0 || node >= n_nodes) fail("nlos node index out of range");
  }
  for (const auto& [a, b] : nlos.pairs) {
    if (a < 0 || a >= n_nodes || b < 0 || b >= n_nodes || a == b) fail("bad nlos pair");
  }
  if (nlos.probability < 0.0 || nlos.probability > 1.0) fail("nlos probability outside [0, 1]");
  if (nlos.bias_mean_m < 0.0 || nlos.bias_sigma_m < 0.0) fail("nlos bias must be nonnegative");
  if (anomaly.node < -1 || anomaly.node >= n_nodes) fail("anomaly node index out of range");
  if (anomaly.bias_m < 0.0) fail("anomaly bias must be nonnegative");
  if (speed_of_light_mps <= 0.0) fail("speed of light must be positive");
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream_id) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream_id)));
}

GroundTruthLog generate_truth(const SimScenario& scenario) {
  scenario.validate();
  const double w = scenario.arena_width_m;
  const double l = scenario.arena_length_m;
  const int n = scenario.n_nodes;

  const Rect mobile_region{kEdgeMargin, kMobileYMin, w - kEdgeMargin, l - kEdgeMargin};
  const Rect occluded_region{0.6 * w, 0.6 * l, std::min(0.9 * w, w - kEdgeMargin),
                             std::min(0.9 * l, l - kEdgeMargin)};

  std::vector<bool> is_static(n, false);
  for (int s : scenario.static_nodes) is_static[s] = true;

  // Static nodes pinned along the near edge, evenly spaced.
  std::vector<Point2> pos(n);
  const int n_static = static_cast<int>(scenario.static_nodes.size());
  for (int k = 0; k < n_static; ++k) {
    const double span = w - 2.0 * kEdgeMargin - 0.6;
    const double x = 0.3 + kEdgeMargin + (n_static > 1 ? span * k / (n_static - 1) : span / 2.0);
    pos[scenario.static_nodes[k]] = {x, 0.5};
  }

  std::mt19937_64 rng = substream(scenario.seed, 0);
  auto region_for = [&](int node) -> const Rect& {
    return nlos_affected(scenario.nlos, node, -1) ? occluded_region : mobile_region;
  };

  // Spawn mobiles with the planner buffer when possible, falling back to the
  // hard separation floor in cramped arenas.
  std::vector<int> spawned;
  for (int s : scenario.static_nodes) spawned.push_back(s);
  for (int i = 0; i < n; ++i) {
    if (is_static[i]) continue;
    bool ok = false;
    for (int attempt = 0; attempt < kSpawnAttempts && !ok; ++attempt) {
      const double clearance = attempt < kSpawnAttempts / 2 ? kAvoidanceRadius : kMinSeparation;
      const Point2 p = region_for(i).sample(rng);
      ok = true;
      for (int j : spawned) {
        if (distance(p, pos[j]) < clearance) {
          ok = false;
          break;
        }
      }
      if (ok) pos[i] = p;
    }
    if (!ok) {
      throw Error(Errc::arena_too_small, "generate_truth: cannot satisfy minimum separation");
    }
    spawned.push_back(i);
  }

  std::vector<Point2> waypoint(n);
  for (int i = 0; i < n; ++i) {
    waypoint[i] = is_static[i] ? pos[i] : region_for(i).sample(rng);
  }

  GroundTruthLog log;
  log.frames.reserve(static_cast<std::size_t>(scenario.duration));
  log.frames.push_back(pos);
  const double step_len = kVMax * scenario.dt_s;
  for (int t = 1; t < scenario.duration; ++t) {
    for (int i = 0; i < n; ++i) {
      if (is_static[i]) continue;
      const Point2 to_target = waypoint[i] - pos[i];
      const double dist = to_target.norm();
      Point2 next;
      if (dist <= step_len) {
        next = waypoint[i];
      } else {
        next = pos[i] + to_target * (step_len / dist);
      }
      // Yield-and-reroute collision avoidance: a step into another node's
      // planner buffer is only taken if it increases clearance (so nodes can
      // disentangle), and the mover picks a fresh waypoint. The hard
      // separation floor is never crossed.
      double clearance_now = 1e300;
      double clearance_next = 1e300;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        clearance_now = std::min(clearance_now, distance(pos[i], pos[j]));
        clearance_next = std::min(clearance_next, distance(next, pos[j]));
      }
      const bool buffered = clearance_next >= kAvoidanceRadius;
      const bool escaping =
          clearance_next >= kMinSeparation && clearance_next > clearance_now;
      if (buffered || escaping) {
        pos[i] = next;
        if (dist <= step_len) waypoint[i] = region_for(i).sample(rng);
      } else {
        waypoint[i] = region_for(i).sample(rng);
      }
    }
    log.frames.push_back(pos);
  }
  return log;
}

std::vector<RangeTable> generate_ranges(const GroundTruthLog& truth, const SimScenario& scenario) {
  scenario.validate();
  const int n = scenario.n_nodes;
  std::vector<RangeTable> tables;
  tables.reserve(truth.frames.size());

  for (std::size_t t = 0; t < truth.frames.size(); ++t) {
    // Fresh generator and distributions per timestamp: substreams must not
    // share cached state, or parallel generation would reorder draws.
    std::mt19937_64 rng = substream(scenario.seed, 1 + t);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RangeTable table(static_cast<std::size_t>(n), static_cast<double>(t) * scenario.dt_s);
    const auto& frame = truth.frames[t];
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double d = distance(frame[i], frame[j]);
        d += scenario.noise_sigma_m * unit_normal(rng);
        if (nlos_affected(scenario.nlos, i, j) && unit(rng) < scenario.nlos.probability) {
          d += std::abs(scenario.nlos.bias_mean_m + scenario.nlos.bias_sigma_m * unit_normal(rng));
        }
        if (scenario.anomaly.node == i || scenario.anomaly.node == j) {
          if (scenario.anomaly.mode == AnomalyMode::constant_bias) {
            d += scenario.anomaly.bias_m;
          } else {
            // The tampered turnaround time that shifts the distance by bias_m.
            const double dt_extra = 2.0 * scenario.anomaly.bias_m / scenario.speed_of_light_mps;
            d += scenario.speed_of_light_mps * dt_extra / 2.0;
          }
        }
        table.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), std::max(0.0, d));
      }
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

}  // namespace relloc
