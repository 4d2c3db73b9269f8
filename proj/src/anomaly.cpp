#include "relloc/anomaly.hpp"

#include <algorithm>
#include <cmath>

namespace relloc {

namespace {

// Floor on the robust scale so near-identical error vectors (noiseless data)
// never produce spurious candidates.
constexpr double kMinRobustScale = 1e-12;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> sd_over(const AlignedLayoutSet& aligned,
                            const std::vector<std::size_t>& subset) {
  const std::size_t n = aligned.layouts.empty() ? 0 : aligned.layouts.front().positions.size();
  std::vector<Layout> picked;
  picked.reserve(subset.size());
  for (std::size_t r : subset) picked.push_back(aligned.layouts[r]);
  return per_node_position_sd(picked, n);
}

double sd_bar_excluding(const AlignedLayoutSet& aligned, const std::set<int>& removed) {
  std::vector<std::size_t> subset;
  for (std::size_t r = 0; r < aligned.layouts.size(); ++r) {
    const auto& base = aligned.layouts[r].base;
    if (removed.count(base.first) || removed.count(base.second)) continue;
    subset.push_back(r);
  }
  double total = 0.0;
  for (double sd : sd_over(aligned, subset)) total += sd;
  return total;
}

std::size_t layouts_excluding(const AlignedLayoutSet& aligned, const std::set<int>& removed) {
  std::size_t count = 0;
  for (const auto& layout : aligned.layouts) {
    if (!removed.count(layout.base.first) && !removed.count(layout.base.second)) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> per_node_position_sd(const std::vector<Layout>& layouts,
                                         std::size_t n_nodes) {
  std::vector<double> sd(n_nodes, 0.0);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    double sx = 0.0, sy = 0.0;
    int m = 0;
    for (const auto& layout : layouts) {
      if (!layout.present[i]) continue;
      sx += layout.positions[i].x;
      sy += layout.positions[i].y;
      ++m;
    }
    if (m == 0) continue;
    const double mx = sx / m;
    const double my = sy / m;
    double vx = 0.0, vy = 0.0;
    for (const auto& layout : layouts) {
      if (!layout.present[i]) continue;
      vx += (layout.positions[i].x - mx) * (layout.positions[i].x - mx);
      vy += (layout.positions[i].y - my) * (layout.positions[i].y - my);
    }
    sd[i] = std::hypot(std::sqrt(vx / m), std::sqrt(vy / m));
  }
  return sd;
}

// Per-node configuration error: the median over layouts of the node's squared
// deviation from the fused reference. A single wrecked layout (short-baseline
// noise amplification) throws every node's position in that one layout, so
// robust aggregation over the configuration axis is what separates a node
// with consistently bad ranges from a node that was unlucky once. `skip`
// drops layouts whose base touches an already-confirmed node.
static std::vector<double> per_node_error_excluding(const AlignedLayoutSet& aligned,
                                                    const FusedEstimate& fused,
                                                    const std::set<int>& skip) {
  const std::size_t n = aligned.layouts.empty() ? 0 : aligned.layouts.front().positions.size();
  std::vector<double> errors(n, 0.0);
  std::vector<double> deviations;
  for (std::size_t i = 0; i < n; ++i) {
    if (!fused.position_known[i]) continue;
    deviations.clear();
    for (const auto& layout : aligned.layouts) {
      if (skip.count(layout.base.first) || skip.count(layout.base.second)) continue;
      if (!layout.present[i]) continue;
      deviations.push_back(squared_distance(layout.positions[i], fused.positions[i]));
    }
    if (!deviations.empty()) errors[i] = median(deviations);
  }
  return errors;
}

std::vector<double> per_node_error(const AlignedLayoutSet& aligned, const FusedEstimate& fused) {
  return per_node_error_excluding(aligned, fused, {});
}

double sd_bar(const AlignedLayoutSet& aligned) { return sd_bar_excluding(aligned, {}); }

double dispersion_after_removal(const AlignedLayoutSet& aligned, int suspect,
                                int min_layouts_remaining) {
  const std::set<int> removed{suspect};
  if (layouts_excluding(aligned, removed) < static_cast<std::size_t>(min_layouts_remaining)) {
    throw Error(Errc::too_few_layouts, "dispersion_after_removal: too few layouts would remain");
  }
  return sd_bar_excluding(aligned, removed);
}

namespace {

// Nodes whose error exceeds the configured threshold. In robust-z mode the
// statistics run over the measurable nodes only.
std::set<int> threshold_candidates(const std::vector<double>& errors,
                                   const std::vector<bool>& measurable,
                                   const DetectorParams& params) {
  std::set<int> out;
  if (params.threshold_mode == ThresholdMode::absolute) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (measurable[i] && errors[i] > params.threshold_value) out.insert(static_cast<int>(i));
    }
    return out;
  }
  std::vector<double> pool;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (measurable[i]) pool.push_back(errors[i]);
  }
  if (pool.empty()) return out;
  const double med = median(pool);
  std::vector<double> dev;
  dev.reserve(pool.size());
  for (double e : pool) dev.push_back(std::abs(e - med));
  const double scale = std::max(1.4826 * median(dev), kMinRobustScale);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (measurable[i] && errors[i] > med + params.threshold_value * scale) {
      out.insert(static_cast<int>(i));
    }
  }
  return out;
}

std::vector<bool> measurable_nodes(const AlignedLayoutSet& aligned, std::size_t n,
                                   const std::set<int>& removed) {
  std::vector<bool> out(n, false);
  for (const auto& layout : aligned.layouts) {
    if (removed.count(layout.base.first) || removed.count(layout.base.second)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (layout.present[i]) out[i] = true;
    }
  }
  for (int r : removed) out[r] = false;
  return out;
}

}  // namespace

AnomalyReport detect(const AlignedLayoutSet& aligned, const FusedEstimate& fused,
                     const DetectorParams& params) {
  AnomalyReport report;
  report.per_node_error = per_node_error(aligned, fused);
  const std::size_t n = report.per_node_error.size();

  report.candidates = threshold_candidates(report.per_node_error,
                                           measurable_nodes(aligned, n, {}), params);
  report.sd_bar_baseline = sd_bar(aligned);
  for (int c : report.candidates) {
    if (layouts_excluding(aligned, {c}) < static_cast<std::size_t>(params.min_layouts_remaining)) {
      throw Error(Errc::too_few_layouts, "detect: candidate removal leaves too few layouts");
    }
    report.sd_bar_after_removal[c] = sd_bar_excluding(aligned, {c});
  }

  // Greedy confirmation: take the candidate whose removal shrinks the
  // dispersion the most, then recompute errors and candidates on the reduced
  // layout set. Shared wrecked configurations drag normal nodes over the
  // threshold, so a candidate only survives a round if it still looks
  // anomalous once the confirmed nodes' layouts are gone.
  // A candidate whose own removal does not bring the dispersion under the
  // baseline is a false anomaly and can never be confirmed.
  std::set<int> open;
  for (int c : report.candidates) {
    if (report.sd_bar_after_removal.at(c) < report.sd_bar_baseline) open.insert(c);
  }
  double current = report.sd_bar_baseline;
  while (!open.empty()) {
    int best = -1;
    double best_sd = current;
    for (int c : open) {
      std::set<int> removed = report.confirmed;
      removed.insert(c);
      if (layouts_excluding(aligned, removed) <
          static_cast<std::size_t>(params.min_layouts_remaining)) {
        continue;
      }
      const double sd = sd_bar_excluding(aligned, removed);
      if (sd < best_sd) {
        best_sd = sd;
        best = c;
      }
    }
    if (best < 0) break;  // nothing left reduces the dispersion
    report.confirmed.insert(best);
    current = best_sd;

    const std::vector<double> errors =
        per_node_error_excluding(aligned, fused, report.confirmed);
    const std::set<int> still = threshold_candidates(
        errors, measurable_nodes(aligned, n, report.confirmed), params);
    std::set<int> next_open;
    for (int c : open) {
      if (c != best && still.count(c)) next_open.insert(c);
    }
    open = std::move(next_open);
  }

  // Backward elimination: a node confirmed early can be a false partner whose
  // apparent reduction came from layouts it shares with the real anomaly.
  // Keep only nodes whose removal still helps given the rest of the set.
  bool dropped = true;
  while (dropped && report.confirmed.size() > 1) {
    dropped = false;
    for (int c : report.confirmed) {
      std::set<int> without = report.confirmed;
      without.erase(c);
      if (sd_bar_excluding(aligned, report.confirmed) >= sd_bar_excluding(aligned, without)) {
        report.confirmed.erase(c);
        dropped = true;
        break;
      }
    }
  }

  report.pruned_layout_count =
      static_cast<int>(aligned.layouts.size() - layouts_excluding(aligned, report.confirmed));
  return report;
}

AlignedLayoutSet prune(const AlignedLayoutSet& aligned, const std::set<int>& confirmed,
                       int min_layouts_remaining) {
  AlignedLayoutSet out;
  out.frame = aligned.frame;
  for (const auto& layout : aligned.layouts) {
    if (confirmed.count(layout.base.first) || confirmed.count(layout.base.second)) continue;
    out.layouts.push_back(layout);
  }
  if (out.layouts.size() < static_cast<std::size_t>(min_layouts_remaining)) {
    throw Error(Errc::too_few_layouts, "prune: too few layouts would remain");
  }
  return out;
}

}  // namespace relloc
