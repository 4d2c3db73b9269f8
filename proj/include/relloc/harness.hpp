#pragma once

#include <map>
#include <string>
#include <vector>

#include "relloc/anomaly.hpp"
#include "relloc/fusion.hpp"
#include "relloc/gd.hpp"
#include "relloc/io.hpp"
#include "relloc/sim.hpp"

namespace relloc {

enum class Methods { ml, gd, both };

struct PipelineConfig {
  SimScenario scenario;
  FusionParams fusion;
  DetectorParams detector;
  GdParams gd;
  FrameSpec frame;
  Methods methods = Methods::both;
};

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
  long total() const { return tp + fp + fn + tn; }
};

struct Decision {
  double timestamp_s = 0.0;
  int node = 0;
  bool flagged = false;
};

// Tallies per-(timestamp, node) decisions against the injected anomaly per
// timestamp (-1 for none). Throws coverage_gap unless the decisions cover the
// full grid exactly once.
ConfusionCounts confusion(const std::vector<Decision>& decisions,
                          const std::map<double, int>& truth_anomaly);

struct TrajectoryError {
  std::vector<double> per_node_rmse;
  double average = 0.0;
};

// Per-node RMSE over timestamps between estimate and ground truth, which must
// already share a frame. Entries where the estimate is unknown are skipped.
TrajectoryError trajectory_error(const std::vector<std::vector<Point2>>& est,
                                 const std::vector<std::vector<std::uint8_t>>& est_known,
                                 const GroundTruthLog& gt);

// One run's aggregated artifacts. Decisions are counted per timestamp per
// node; the runtime map is diagnostic only and never serialized, so report
// files stay byte-identical across reruns.
struct EvalReport {
  int n_nodes = 0;
  int timestamps = 0;
  std::string methods;
  std::map<std::string, std::map<int, double>> per_node_rmse;  // variant -> node -> m
  std::map<std::string, double> average_rmse;                  // variant -> m
  std::map<std::string, ConfusionCounts> confusion_counts;     // "ml" / "gd"
  std::map<std::string, double> runtime_ms;                    // stage -> milliseconds
};

std::string report_to_json(const EvalReport& report, const SimScenario& scenario);
std::string report_rmse_csv(const EvalReport& report);
std::string report_confusion_csv(const EvalReport& report);

// Full simulate -> localize -> detect -> evaluate pipeline. Trajectory RMSE is
// computed after mapping ground truth into the common frame and registering
// the estimate onto it via the static nodes plus the disambiguator. With
// Methods::ml no optimizer code runs and the runtime map carries no gd stages.
EvalReport run_pipeline(const PipelineConfig& config);

}  // namespace relloc
