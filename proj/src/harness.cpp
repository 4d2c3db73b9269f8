#include "relloc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include <json.hpp>

namespace relloc {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
public:
  StageTimer(std::map<std::string, double>& sink, const char* stage)
      : sink_(sink), stage_(stage), start_(Clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::duration<double, std::milli>(Clock::now() - start_);
    sink_[stage_] += elapsed.count();
  }

private:
  std::map<std::string, double>& sink_;
  const char* stage_;
  Clock::time_point start_;
};

void validate_frame(const FrameSpec& frame, int n_nodes) {
  const bool in_range = frame.ref_a >= 0 && frame.ref_a < n_nodes && frame.ref_b >= 0 &&
                        frame.ref_b < n_nodes && frame.disambiguator >= 0 &&
                        frame.disambiguator < n_nodes;
  const bool distinct = frame.ref_a != frame.ref_b && frame.ref_a != frame.disambiguator &&
                        frame.ref_b != frame.disambiguator;
  if (!in_range || !distinct) {
    throw Error(Errc::config_invalid, "frame: reference nodes must be distinct and in range");
  }
}

// Registers the estimate onto the canonical ground truth using the reference
// nodes, then applies the fit to every node.
std::vector<Point2> register_onto(const std::vector<Point2>& est,
                                  const std::vector<std::uint8_t>& known,
                                  const std::vector<Point2>& gt,
                                  const std::vector<int>& ref_nodes) {
  std::vector<Point2> src;
  std::vector<Point2> dst;
  for (int r : ref_nodes) {
    if (!known[r]) continue;
    src.push_back(est[r]);
    dst.push_back(gt[r]);
  }
  std::vector<Point2> out = est;
  if (src.size() >= 2) {
    try {
      const RigidTransform2 t = best_rigid_align(src, dst);
      for (auto& p : out) p = t.apply(p);
    } catch (const Error&) {
      // degenerate reference geometry; leave the estimate unregistered
    }
  }
  return out;
}

struct Series {
  std::vector<std::vector<Point2>> frames;
  std::vector<std::vector<std::uint8_t>> known;
};

RangeTable mask_node_ranges(const RangeTable& table, const std::set<int>& nodes) {
  RangeTable masked = table;
  const int n = static_cast<int>(table.size());
  for (int bad : nodes) {
    for (int other = 0; other < n; ++other) {
      if (other != bad) masked.invalidate(bad, other);
    }
  }
  return masked;
}

bool touches_frame(const std::set<int>& nodes, const FrameSpec& frame) {
  return nodes.count(frame.ref_a) || nodes.count(frame.ref_b) ||
         nodes.count(frame.disambiguator);
}

// Post-detection localization: the confirmed nodes' measurements are removed
// and the layouts rebuilt so their bad ranges cannot leak into other nodes'
// placements. The confirmed nodes themselves are reported at their mean
// trilaterated position across the surviving (pruned) layouts.
FusedEstimate localize_without(const RangeTable& table, const AlignedLayoutSet& pruned,
                               const std::set<int>& confirmed, const FrameSpec& frame,
                               const FusionParams& fusion) {
  const FusedEstimate repositioned =
      fuse(to_common_frame(enumerate_layouts(mask_node_ranges(table, confirmed)), frame), fusion);
  FusedEstimate out = repositioned;
  for (int node : confirmed) {
    Point2 sum{};
    int count = 0;
    for (const auto& layout : pruned.layouts) {
      if (!layout.present[node]) continue;
      sum += layout.positions[node];
      ++count;
    }
    if (count > 0) {
      out.positions[node] = sum * (1.0 / count);
      out.position_known[node] = 1;
    }
  }
  return out;
}

}  // namespace

ConfusionCounts confusion(const std::vector<Decision>& decisions,
                          const std::map<double, int>& truth_anomaly) {
  std::set<int> nodes;
  for (const auto& d : decisions) nodes.insert(d.node);
  const std::size_t expected = truth_anomaly.size() * nodes.size();
  if (decisions.size() != expected) {
    throw Error(Errc::coverage_gap, "confusion: decisions do not cover timestamps x nodes");
  }
  std::set<std::pair<double, int>> seen;
  ConfusionCounts counts;
  for (const auto& d : decisions) {
    const auto truth = truth_anomaly.find(d.timestamp_s);
    if (truth == truth_anomaly.end() || !seen.insert({d.timestamp_s, d.node}).second) {
      throw Error(Errc::coverage_gap, "confusion: duplicate or unknown decision cell");
    }
    const bool is_anomaly = truth->second == d.node;
    if (d.flagged) {
      (is_anomaly ? counts.tp : counts.fp) += 1;
    } else {
      (is_anomaly ? counts.fn : counts.tn) += 1;
    }
  }
  return counts;
}

TrajectoryError trajectory_error(const std::vector<std::vector<Point2>>& est,
                                 const std::vector<std::vector<std::uint8_t>>& est_known,
                                 const GroundTruthLog& gt) {
  if (est.size() != gt.frames.size() || est.size() != est_known.size()) {
    throw Error(Errc::timestamp_mismatch, "trajectory_error: timeline lengths differ");
  }
  if (est.empty()) return {};
  const std::size_t n = gt.frames.front().size();
  std::vector<double> sums(n, 0.0);
  std::vector<long> counts(n, 0);
  for (std::size_t t = 0; t < est.size(); ++t) {
    if (est[t].size() != n || gt.frames[t].size() != n) {
      throw Error(Errc::timestamp_mismatch, "trajectory_error: node counts differ");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!est_known[t][i]) continue;
      sums[i] += squared_distance(est[t][i], gt.frames[t][i]);
      ++counts[i];
    }
  }
  TrajectoryError out;
  out.per_node_rmse.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.per_node_rmse[i] = counts[i] > 0 ? std::sqrt(sums[i] / counts[i]) : 0.0;
    total += out.per_node_rmse[i];
  }
  out.average = n > 0 ? total / static_cast<double>(n) : 0.0;
  return out;
}

std::string report_to_json(const EvalReport& report, const SimScenario& scenario) {
  nlohmann::json j;
  j["decision_semantics"] = "decisions are counted per timestamp per node";
  j["n_nodes"] = report.n_nodes;
  j["timestamps"] = report.timestamps;
  j["methods"] = report.methods;
  j["scenario"] = nlohmann::json::parse(io::scenario_to_json(scenario));
  nlohmann::json rmse = nlohmann::json::object();
  for (const auto& [variant, nodes] : report.per_node_rmse) {
    nlohmann::json entry = nlohmann::json::object();
    for (const auto& [node, value] : nodes) entry[std::to_string(node)] = value;
    rmse[variant] = std::move(entry);
  }
  j["per_node_rmse_m"] = std::move(rmse);
  j["average_rmse_m"] = report.average_rmse;
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& [method, c] : report.confusion_counts) {
    conf[method] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
  }
  j["confusion"] = std::move(conf);
  // Stage runtimes are intentionally not serialized: reports must be
  // byte-identical across reruns of the same seed.
  return j.dump(2) + "\n";
}

std::string report_rmse_csv(const EvalReport& report) {
  std::string out = "variant,node,rmse_m\n";
  char buf[64];
  for (const auto& [variant, nodes] : report.per_node_rmse) {
    for (const auto& [node, value] : nodes) {
      std::snprintf(buf, sizeof(buf), "%s,%d,%.12g\n", variant.c_str(), node, value);
      out += buf;
    }
  }
  return out;
}

std::string report_confusion_csv(const EvalReport& report) {
  std::string out = "method,tp,fp,fn,tn\n";
  char buf[96];
  for (const auto& [method, c] : report.confusion_counts) {
    std::snprintf(buf, sizeof(buf), "%s,%ld,%ld,%ld,%ld\n", method.c_str(), c.tp, c.fp, c.fn,
                  c.tn);
    out += buf;
  }
  return out;
}

EvalReport run_pipeline(const PipelineConfig& config) {
  config.scenario.validate();
  validate_frame(config.frame, config.scenario.n_nodes);
  const bool want_ml = config.methods != Methods::gd;
  const bool want_gd = config.methods != Methods::ml;
  const int n = config.scenario.n_nodes;

  EvalReport report;
  report.n_nodes = n;
  report.timestamps = config.scenario.duration;
  report.methods = config.methods == Methods::both ? "both" : (want_ml ? "ml" : "gd");

  GroundTruthLog truth;
  std::vector<RangeTable> tables;
  {
    StageTimer timer(report.runtime_ms, "simulate");
    truth = generate_truth(config.scenario);
    tables = generate_ranges(truth, config.scenario);
  }

  Series ml, ml_pruned, gd_series, gd_pruned;
  std::vector<Decision> ml_decisions, gd_decisions;
  std::map<double, int> truth_anomaly;

  for (std::size_t t = 0; t < tables.size(); ++t) {
    const RangeTable& table = tables[t];
    truth_anomaly[table.timestamp()] = config.scenario.anomaly.node;
    try {
      AlignedLayoutSet aligned;
      {
        StageTimer timer(report.runtime_ms, "layouts");
        aligned = to_common_frame(enumerate_layouts(table), config.frame);
      }
      FusedEstimate fused;
      {
        StageTimer timer(report.runtime_ms, "fusion");
        fused = fuse(aligned, config.fusion);
      }

      std::set<int> confirmed;
      FusedEstimate pruned_fused;
      if (want_ml) {
        AnomalyReport anomaly_report;
        {
          StageTimer timer(report.runtime_ms, "detect");
          anomaly_report = detect(aligned, fused, config.detector);
          anomaly_report.timestamp_s = table.timestamp();
        }
        confirmed = anomaly_report.confirmed;
        for (int node = 0; node < n; ++node) {
          ml_decisions.push_back({table.timestamp(), node, confirmed.count(node) > 0});
        }
        ml.frames.push_back(fused.positions);
        ml.known.push_back(fused.position_known);
        {
          StageTimer timer(report.runtime_ms, "prune");
          if (confirmed.empty() || touches_frame(confirmed, config.frame)) {
            pruned_fused = fused;
          } else {
            const AlignedLayoutSet pruned =
                prune(aligned, confirmed, config.detector.min_layouts_remaining);
            pruned_fused = localize_without(table, pruned, confirmed, config.frame, config.fusion);
          }
        }
        ml_pruned.frames.push_back(pruned_fused.positions);
        ml_pruned.known.push_back(pruned_fused.position_known);
      }

      if (want_gd) {
        GdResult gd_result;
        {
          StageTimer timer(report.runtime_ms, "gd");
          gd_result = gd_optimize(fused.positions, table, config.frame, config.gd);
        }
        gd_series.frames.push_back(gd_result.positions);
        gd_series.known.emplace_back(n, 1);
        {
          StageTimer timer(report.runtime_ms, "gd_detect");
          const AlignedLayoutSet converged = gd_layouts(aligned, table, config.gd);
          const FusedEstimate gd_fused = fuse(converged, config.fusion);
          const AnomalyReport gd_report = detect(converged, gd_fused, config.detector);
          for (int node = 0; node < n; ++node) {
            gd_decisions.push_back({table.timestamp(), node, gd_report.confirmed.count(node) > 0});
          }
        }
        if (want_ml) {
          // Optimizer pass over the pruned fusion, with the confirmed nodes'
          // ranges masked out of the loss.
          StageTimer timer(report.runtime_ms, "gd_prune");
          if (confirmed.empty()) {
            gd_pruned.frames.push_back(gd_result.positions);
            gd_pruned.known.emplace_back(n, 1);
          } else {
            GdResult refined = gd_optimize(pruned_fused.positions,
                                           mask_node_ranges(table, confirmed), config.frame,
                                           config.gd);
            gd_pruned.frames.push_back(refined.positions);
            gd_pruned.known.emplace_back(n, 1);
          }
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), "t=" + std::to_string(table.timestamp()) + ": " + e.what());
    }
  }

  {
    StageTimer timer(report.runtime_ms, "evaluate");
    GroundTruthLog gt_canon = truth;
    for (auto& frame : gt_canon.frames) canonicalize(frame, config.frame);

    std::vector<int> ref_nodes = config.scenario.static_nodes;
    if (std::find(ref_nodes.begin(), ref_nodes.end(), config.frame.disambiguator) ==
        ref_nodes.end()) {
      ref_nodes.push_back(config.frame.disambiguator);
    }

    const auto evaluate_series = [&](const Series& series, const std::string& variant) {
      Series registered = series;
      for (std::size_t t = 0; t < registered.frames.size(); ++t) {
        registered.frames[t] =
            register_onto(series.frames[t], series.known[t], gt_canon.frames[t], ref_nodes);
      }
      const TrajectoryError err = trajectory_error(registered.frames, registered.known, gt_canon);
      for (std::size_t i = 0; i < err.per_node_rmse.size(); ++i) {
        report.per_node_rmse[variant][static_cast<int>(i)] = err.per_node_rmse[i];
      }
      report.average_rmse[variant] = err.average;
    };

    if (want_ml) {
      evaluate_series(ml, "ml");
      evaluate_series(ml_pruned, "ml_pruned");
      report.confusion_counts["ml"] = confusion(ml_decisions, truth_anomaly);
    }
    if (want_gd) {
      evaluate_series(gd_series, "gd");
      if (want_ml) evaluate_series(gd_pruned, "gd_pruned");
      report.confusion_counts["gd"] = confusion(gd_decisions, truth_anomaly);
    }
  }
  return report;
}

}  // namespace relloc
