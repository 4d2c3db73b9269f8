#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "relloc/errors.hpp"

namespace relloc {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kEpsilonBasis = 1e-6;         // m, baselines below this are degenerate

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  Point2& operator+=(const Point2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }
inline double squared_distance(const Point2& a, const Point2& b) { return (a - b).squared_norm(); }

// Wraps an angle to (-pi, pi].
double normalize_angle(double theta);

// Proper rigid motion in the plane: rotate by theta about the origin, then translate.
struct RigidTransform2 {
  double tx = 0.0;
  double ty = 0.0;
  double theta = 0.0;

  Point2 apply(const Point2& p) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
  }
  RigidTransform2 inverse() const;
};

// compose(second, first).apply(p) == second.apply(first.apply(p))
RigidTransform2 compose(const RigidTransform2& second, const RigidTransform2& first);

// Round-trip and responder turnaround times of one two-way ranging exchange.
struct TimingPair {
  double t_init_s = 0.0;  // measured at the initiator, request to reply
  double t_res_s = 0.0;   // receive/process/respond time at the responder
};

// Distance from a two-way timing exchange: c * (t_init - t_res) / 2.
double tof_distance(const TimingPair& t, double c = kSpeedOfLight);

struct TrilaterationResult {
  double x = 0.0;
  double y_abs = 0.0;        // nonnegative branch; sign resolved separately
  bool inconsistent = false; // radicand was negative and y was clamped to 0
};

// Position of a node from its distances to a base pair sitting at (0,0) and
// (d_nm, 0). Returns the +y branch; resolve_mirror picks the sign.
TrilaterationResult trilaterate(double d_nm, double d_ni, double d_im);

struct PlacedRange {
  Point2 position;
  double range_m = 0.0;  // measured range from that point to the candidate
};

// Chooses (x, +y_abs) or (x, -y_abs), whichever better matches the measured
// ranges to already-placed points. Empty prior (and ties) resolve to +y_abs.
Point2 resolve_mirror(const TrilaterationResult& candidate, std::span<const PlacedRange> placed);

// Least-squares rigid registration (rotation + translation, no scaling or
// reflection) taking source onto target with index-wise correspondence.
RigidTransform2 best_rigid_align(std::span<const Point2> source, std::span<const Point2> target);

// Sum of squared distances between corresponding points.
double lse(std::span<const Point2> a, std::span<const Point2> b);

}  // namespace relloc
