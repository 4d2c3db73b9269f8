#include "relloc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace relloc::io {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_double(const std::string& field, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::io_error, "csv: bad numeric field '" + field + "' in " + context);
  }
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

bool is_header(const std::string& line) {
  return !line.empty() && !(std::isdigit(static_cast<unsigned char>(line[0])) ||
                            line[0] == '-' || line[0] == '+' || line[0] == '.');
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(Errc::config_invalid, context + ": unknown key '" + key + "'");
    }
  }
}

json parse_json(const std::string& text, const std::string& context) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::config_invalid, context + ": malformed JSON");
  return j;
}

json point_to_json(const Point2& p) { return json{{"x_m", p.x}, {"y_m", p.y}}; }

}  // namespace

std::string ranges_to_csv(const std::vector<RangeTable>& tables) {
  std::string out = "timestamp_s,node_i,node_j,range_m\n";
  for (const auto& table : tables) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      for (std::size_t j = i + 1; j < table.size(); ++j) {
        if (!table.valid(i, j)) continue;
        out += fmt(table.timestamp()) + "," + std::to_string(i) + "," + std::to_string(j) + "," +
               fmt(table.at(i, j)) + "\n";
      }
    }
  }
  return out;
}

std::vector<RangeTable> ranges_from_csv(const std::string& text) {
  struct Row {
    std::size_t i, j;
    double range;
  };
  std::map<double, std::vector<Row>> by_timestamp;
  std::size_t max_node = 0;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && is_header(line)) {
      first = false;
      continue;
    }
    first = false;
    const auto fields = split_line(line);
    if (fields.size() != 4) throw Error(Errc::io_error, "csv: ranges rows need 4 fields");
    const double t = parse_double(fields[0], "ranges timestamp");
    const double i = parse_double(fields[1], "ranges node_i");
    const double j = parse_double(fields[2], "ranges node_j");
    const double r = parse_double(fields[3], "ranges range_m");
    if (i < 0 || j < 0 || i != std::floor(i) || j != std::floor(j)) {
      throw Error(Errc::io_error, "csv: node indices must be nonnegative integers");
    }
    const Row row{static_cast<std::size_t>(i), static_cast<std::size_t>(j), r};
    max_node = std::max({max_node, row.i, row.j});
    by_timestamp[t].push_back(row);
  }
  std::vector<RangeTable> tables;
  for (const auto& [t, rows] : by_timestamp) {
    RangeTable table(max_node + 1, t);
    for (const auto& row : rows) table.set(row.i, row.j, row.range);
    tables.push_back(std::move(table));
  }
  return tables;
}

std::string positions_to_csv(const std::vector<std::vector<Point2>>& frames,
                             const std::vector<double>& timestamps) {
  if (frames.size() != timestamps.size()) {
    throw std::invalid_argument("positions_to_csv: one timestamp per frame");
  }
  std::string out = "timestamp_s,node,x_m,y_m\n";
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t i = 0; i < frames[t].size(); ++i) {
      out += fmt(timestamps[t]) + "," + std::to_string(i) + "," + fmt(frames[t][i].x) + "," +
             fmt(frames[t][i].y) + "\n";
    }
  }
  return out;
}

std::string truth_to_csv(const GroundTruthLog& truth, double dt_s) {
  std::vector<double> timestamps(truth.frames.size());
  for (std::size_t t = 0; t < timestamps.size(); ++t) {
    timestamps[t] = static_cast<double>(t) * dt_s;
  }
  return positions_to_csv(truth.frames, timestamps);
}

SimScenario scenario_from_json(const std::string& text) {
  const json j = parse_json(text, "scenario");
  reject_unknown_keys(j,
                      {"n_nodes", "static_nodes", "arena", "duration", "dt_s", "noise_sigma_m",
                       "nlos", "anomaly", "seed", "speed_of_light_mps"},
                      "scenario");
  SimScenario s;
  try {
    if (j.contains("n_nodes")) s.n_nodes = j.at("n_nodes").get<int>();
    if (j.contains("static_nodes")) s.static_nodes = j.at("static_nodes").get<std::vector<int>>();
    if (j.contains("arena")) {
      reject_unknown_keys(j.at("arena"), {"width_m", "length_m"}, "scenario.arena");
      if (j.at("arena").contains("width_m")) s.arena_width_m = j.at("arena").at("width_m");
      if (j.at("arena").contains("length_m")) s.arena_length_m = j.at("arena").at("length_m");
    }
    if (j.contains("duration")) s.duration = j.at("duration").get<int>();
    if (j.contains("dt_s")) s.dt_s = j.at("dt_s").get<double>();
    if (j.contains("noise_sigma_m")) s.noise_sigma_m = j.at("noise_sigma_m").get<double>();
    if (j.contains("nlos")) {
      const json& n = j.at("nlos");
      reject_unknown_keys(n, {"nodes", "pairs", "bias_mean_m", "bias_sigma_m", "probability"},
                          "scenario.nlos");
      if (n.contains("nodes")) s.nlos.nodes = n.at("nodes").get<std::vector<int>>();
      if (n.contains("pairs")) {
        for (const auto& p : n.at("pairs")) {
          if (!p.is_array() || p.size() != 2) {
            throw Error(Errc::config_invalid, "scenario.nlos.pairs entries must be [i, j]");
          }
          s.nlos.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
      }
      if (n.contains("bias_mean_m")) s.nlos.bias_mean_m = n.at("bias_mean_m").get<double>();
      if (n.contains("bias_sigma_m")) s.nlos.bias_sigma_m = n.at("bias_sigma_m").get<double>();
      if (n.contains("probability")) s.nlos.probability = n.at("probability").get<double>();
    }
    if (j.contains("anomaly")) {
      const json& a = j.at("anomaly");
      reject_unknown_keys(a, {"node", "bias_m", "mode"}, "scenario.anomaly");
      if (a.contains("node")) s.anomaly.node = a.at("node").get<int>();
      if (a.contains("bias_m")) s.anomaly.bias_m = a.at("bias_m").get<double>();
      if (a.contains("mode")) {
        const std::string mode = a.at("mode").get<std::string>();
        if (mode == "constant-bias") {
          s.anomaly.mode = AnomalyMode::constant_bias;
        } else if (mode == "timing-error") {
          s.anomaly.mode = AnomalyMode::timing_error;
        } else {
          throw Error(Errc::config_invalid, "scenario.anomaly.mode: '" + mode + "'");
        }
      }
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("speed_of_light_mps")) {
      s.speed_of_light_mps = j.at("speed_of_light_mps").get<double>();
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::config_invalid, std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

std::string scenario_to_json(const SimScenario& s) {
  json j;
  j["n_nodes"] = s.n_nodes;
  j["static_nodes"] = s.static_nodes;
  j["arena"] = {{"width_m", s.arena_width_m}, {"length_m", s.arena_length_m}};
  j["duration"] = s.duration;
  j["dt_s"] = s.dt_s;
  j["noise_sigma_m"] = s.noise_sigma_m;
  j["nlos"] = {{"nodes", s.nlos.nodes},
               {"pairs", s.nlos.pairs},
               {"bias_mean_m", s.nlos.bias_mean_m},
               {"bias_sigma_m", s.nlos.bias_sigma_m},
               {"probability", s.nlos.probability}};
  j["anomaly"] = {
      {"node", s.anomaly.node},
      {"bias_m", s.anomaly.bias_m},
      {"mode", s.anomaly.mode == AnomalyMode::constant_bias ? "constant-bias" : "timing-error"}};
  j["seed"] = s.seed;
  j["speed_of_light_mps"] = s.speed_of_light_mps;
  return j.dump(2) + "\n";
}

PipelineParams params_from_json(const std::string& text) {
  const json j = parse_json(text, "params");
  reject_unknown_keys(j, {"fusion", "detector", "gd", "frame"}, "params");
  PipelineParams p;
  try {
    if (j.contains("fusion")) {
      const json& f = j.at("fusion");
      reject_unknown_keys(f, {"retained_fraction", "tol_fuse_m", "max_iter"}, "params.fusion");
      if (f.contains("retained_fraction")) p.fusion.retained_fraction = f.at("retained_fraction");
      if (f.contains("tol_fuse_m")) p.fusion.tol_fuse_m = f.at("tol_fuse_m");
      if (f.contains("max_iter")) p.fusion.max_iter = f.at("max_iter");
    }
    if (j.contains("detector")) {
      const json& d = j.at("detector");
      reject_unknown_keys(d, {"threshold_mode", "threshold_value", "min_layouts_remaining"},
                          "params.detector");
      if (d.contains("threshold_mode")) {
        const std::string mode = d.at("threshold_mode").get<std::string>();
        if (mode == "absolute") {
          p.detector.threshold_mode = ThresholdMode::absolute;
        } else if (mode == "robust-z") {
          p.detector.threshold_mode = ThresholdMode::robust_z;
        } else {
          throw Error(Errc::config_invalid, "params.detector.threshold_mode: '" + mode + "'");
        }
      }
      if (d.contains("threshold_value")) p.detector.threshold_value = d.at("threshold_value");
      if (d.contains("min_layouts_remaining")) {
        p.detector.min_layouts_remaining = d.at("min_layouts_remaining");
      }
    }
    if (j.contains("gd")) {
      const json& g = j.at("gd");
      reject_unknown_keys(g, {"step", "max_iter", "tol_loss", "line_search"}, "params.gd");
      if (g.contains("step")) p.gd.step = g.at("step");
      if (g.contains("max_iter")) p.gd.max_iter = g.at("max_iter");
      if (g.contains("tol_loss")) p.gd.tol_loss = g.at("tol_loss");
      if (g.contains("line_search")) p.gd.line_search = g.at("line_search");
    }
    if (j.contains("frame")) {
      const json& f = j.at("frame");
      reject_unknown_keys(f, {"ref_a", "ref_b", "disambiguator"}, "params.frame");
      if (f.contains("ref_a")) p.frame.ref_a = f.at("ref_a");
      if (f.contains("ref_b")) p.frame.ref_b = f.at("ref_b");
      if (f.contains("disambiguator")) p.frame.disambiguator = f.at("disambiguator");
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::config_invalid, std::string("params: ") + e.what());
  }
  if (p.detector.threshold_value <= 0.0 || p.detector.min_layouts_remaining < 1) {
    throw Error(Errc::config_invalid, "params.detector: bad threshold or min_layouts_remaining");
  }
  return p;
}

std::string params_to_json(const PipelineParams& p) {
  json j;
  j["fusion"] = {{"retained_fraction", p.fusion.retained_fraction},
                 {"tol_fuse_m", p.fusion.tol_fuse_m},
                 {"max_iter", p.fusion.max_iter}};
  j["detector"] = {
      {"threshold_mode",
       p.detector.threshold_mode == ThresholdMode::absolute ? "absolute" : "robust-z"},
      {"threshold_value", p.detector.threshold_value},
      {"min_layouts_remaining", p.detector.min_layouts_remaining}};
  j["gd"] = {{"step", p.gd.step},
             {"max_iter", p.gd.max_iter},
             {"tol_loss", p.gd.tol_loss},
             {"line_search", p.gd.line_search}};
  j["frame"] = {{"ref_a", p.frame.ref_a},
                {"ref_b", p.frame.ref_b},
                {"disambiguator", p.frame.disambiguator}};
  return j.dump(2) + "\n";
}

std::string fused_to_json(const FusedEstimate& fused, double timestamp_s) {
  json j;
  j["timestamp"] = timestamp_s;
  json positions = json::array();
  for (std::size_t i = 0; i < fused.positions.size(); ++i) {
    json p = point_to_json(fused.positions[i]);
    p["node"] = i;
    p["known"] = static_cast<bool>(fused.position_known[i]);
    positions.push_back(std::move(p));
  }
  j["positions"] = std::move(positions);
  json scores = json::array();
  for (const auto& s : fused.layout_lse) {
    scores.push_back({{"base", {s.base.first, s.base.second}}, {"lse_m2", s.lse}});
  }
  j["layout_lse"] = std::move(scores);
  json retained = json::array();
  for (const auto& base : fused.retained) retained.push_back({base.first, base.second});
  j["retained"] = std::move(retained);
  j["iterations_used"] = fused.iterations_used;
  return j.dump(2) + "\n";
}

std::string gd_result_to_json(const GdResult& result, double timestamp_s) {
  json j;
  j["timestamp"] = timestamp_s;
  json positions = json::array();
  for (std::size_t i = 0; i < result.positions.size(); ++i) {
    json p = point_to_json(result.positions[i]);
    p["node"] = i;
    positions.push_back(std::move(p));
  }
  j["positions"] = std::move(positions);
  j["loss_trace"] = result.loss_trace;
  j["converged"] = result.converged;
  return j.dump(2) + "\n";
}

namespace {

json anomaly_report_json(const AnomalyReport& report) {
  json j;
  j["timestamp"] = report.timestamp_s;
  j["per_node_error"] = report.per_node_error;
  j["candidates"] = report.candidates;
  j["confirmed"] = report.confirmed;
  j["sd_bar_baseline"] = report.sd_bar_baseline;
  json after = json::object();
  for (const auto& [node, sd] : report.sd_bar_after_removal) {
    after[std::to_string(node)] = sd;
  }
  j["sd_bar_after_removal"] = std::move(after);
  return j;
}

}  // namespace

std::string anomaly_report_to_json(const AnomalyReport& report) {
  return anomaly_report_json(report).dump(2) + "\n";
}

std::string anomaly_reports_to_json(const std::vector<AnomalyReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(anomaly_report_json(r));
  return arr.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << content;
}

}  // namespace relloc::io
