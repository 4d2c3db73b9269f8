#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relloc/anomaly.hpp"
#include "relloc/fusion.hpp"
#include "relloc/gd.hpp"
#include "relloc/sim.hpp"

namespace relloc::io {

// --- CSV -------------------------------------------------------------------
// Ranges:    timestamp_s,node_i,node_j,range_m   (one measurement per row;
//            symmetric entries may appear once, the loader mirrors them)
// Positions: timestamp_s,node,x_m,y_m

std::string ranges_to_csv(const std::vector<RangeTable>& tables);
std::vector<RangeTable> ranges_from_csv(const std::string& text);

std::string positions_to_csv(const std::vector<std::vector<Point2>>& frames,
                             const std::vector<double>& timestamps);
std::string truth_to_csv(const GroundTruthLog& truth, double dt_s);

// --- JSON ------------------------------------------------------------------
// Unknown keys are rejected everywhere so config typos fail loudly.

SimScenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const SimScenario& scenario);

struct PipelineParams {
  FusionParams fusion;
  DetectorParams detector;
  GdParams gd;
  FrameSpec frame;
};

PipelineParams params_from_json(const std::string& text);
std::string params_to_json(const PipelineParams& params);

std::string fused_to_json(const FusedEstimate& fused, double timestamp_s);
std::string gd_result_to_json(const GdResult& result, double timestamp_s);
std::string anomaly_report_to_json(const AnomalyReport& report);
std::string anomaly_reports_to_json(const std::vector<AnomalyReport>& reports);

// --- Files -----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace relloc::io
