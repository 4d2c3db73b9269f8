#include "relloc/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace relloc {

double normalize_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(theta, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

RigidTransform2 RigidTransform2::inverse() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // R^-1 = R(-theta), t^-1 = -R(-theta) t
  return {-(c * tx + s * ty), -(-s * tx + c * ty), normalize_angle(-theta)};
}

RigidTransform2 compose(const RigidTransform2& second, const RigidTransform2& first) {
  const double c = std::cos(second.theta);
  const double s = std::sin(second.theta);
  return {c * first.tx - s * first.ty + second.tx,
          s * first.tx + c * first.ty + second.ty,
          normalize_angle(first.theta + second.theta)};
}

double tof_distance(const TimingPair& t, double c) {
  if (c <= 0.0) throw std::invalid_argument("tof_distance: propagation speed must be positive");
  if (t.t_res_s < 0.0 || t.t_init_s < t.t_res_s) {
    throw Error(Errc::invalid_timing, "tof_distance: requires t_init >= t_res >= 0");
  }
  return c * (t.t_init_s - t.t_res_s) / 2.0;
}

TrilaterationResult trilaterate(double d_nm, double d_ni, double d_im) {
  if (d_nm < 0.0 || d_ni < 0.0 || d_im < 0.0) {
    throw std::invalid_argument("trilaterate: distances must be nonnegative");
  }
  if (d_nm <= kEpsilonBasis) {
    throw Error(Errc::degenerate_basis, "trilaterate: base-pair distance below epsilon");
  }
  TrilaterationResult r;
  r.x = (d_nm * d_nm + d_ni * d_ni - d_im * d_im) / (2.0 * d_nm);
  const double radicand = d_ni * d_ni - r.x * r.x;
  if (radicand < 0.0) {
    r.y_abs = 0.0;
    r.inconsistent = true;
  } else {
    r.y_abs = std::sqrt(radicand);
  }
  return r;
}

Point2 resolve_mirror(const TrilaterationResult& candidate, std::span<const PlacedRange> placed) {
  const Point2 plus{candidate.x, candidate.y_abs};
  const Point2 minus{candidate.x, -candidate.y_abs};
  double err_plus = 0.0;
  double err_minus = 0.0;
  for (const auto& p : placed) {
    const double dp = distance(p.position, plus) - p.range_m;
    const double dm = distance(p.position, minus) - p.range_m;
    err_plus += dp * dp;
    err_minus += dm * dm;
  }
  return err_plus <= err_minus ? plus : minus;
}

RigidTransform2 best_rigid_align(std::span<const Point2> source, std::span<const Point2> target) {
  if (source.size() != target.size()) {
    throw Error(Errc::length_mismatch, "best_rigid_align: point lists differ in length");
  }
  const std::size_t n = source.size();
  if (n < 2) {
    throw Error(Errc::degenerate_input, "best_rigid_align: need at least two points");
  }
  Point2 sc{0.0, 0.0};
  Point2 tc{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    sc += source[i];
    tc += target[i];
  }
  sc = sc * (1.0 / static_cast<double>(n));
  tc = tc * (1.0 / static_cast<double>(n));

  double spread_s = 0.0;
  double spread_t = 0.0;
  double sxx = 0.0;  // sum of s'.t' dot products
  double sxy = 0.0;  // sum of s' x t' cross products
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 s = source[i] - sc;
    const Point2 t = target[i] - tc;
    spread_s = std::max(spread_s, s.norm());
    spread_t = std::max(spread_t, t.norm());
    sxx += s.x * t.x + s.y * t.y;
    sxy += s.x * t.y - s.y * t.x;
  }
  if (spread_s <= 1e-12 || spread_t <= 1e-12) {
    throw Error(Errc::degenerate_input, "best_rigid_align: points are all coincident");
  }
  const double theta = std::atan2(sxy, sxx);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {tc.x - (c * sc.x - s * sc.y), tc.y - (s * sc.x + c * sc.y), theta};
}

double lse(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::length_mismatch, "lse: point lists differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += squared_distance(a[i], b[i]);
  }
  return sum;
}

}  // namespace relloc
