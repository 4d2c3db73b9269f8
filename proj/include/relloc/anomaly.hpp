#pragma once

#include <map>
#include <set>
#include <vector>

#include "relloc/fusion.hpp"

namespace relloc {

enum class ThresholdMode {
  absolute,  // flag nodes whose error exceeds threshold_value (m^2)
  robust_z,  // flag nodes beyond threshold_value robust z-scores of the median
};

struct DetectorParams {
  ThresholdMode threshold_mode = ThresholdMode::robust_z;
  double threshold_value = 3.0;
  int min_layouts_remaining = 2;
};

struct AnomalyReport {
  double timestamp_s = 0.0;
  std::vector<double> per_node_error;          // m^2, one per node
  std::set<int> candidates;                    // nodes over the error threshold
  double sd_bar_baseline = 0.0;                // dispersion over all layouts
  std::map<int, double> sd_bar_after_removal;  // per candidate
  std::set<int> confirmed;
  int pruned_layout_count = 0;                 // layouts a prune of `confirmed` would drop
};

// Per-node configuration error (m^2): the median over layouts of the node's
// squared deviation from the fused positions. A node with consistently bad
// ranges deviates in most configurations; a node that shares one wrecked
// short-baseline layout does not.
std::vector<double> per_node_error(const AlignedLayoutSet& aligned, const FusedEstimate& fused);

// Summed per-node positional standard deviation across layouts (population
// form, per-axis deviations combined as a Euclidean norm).
double sd_bar(const AlignedLayoutSet& aligned);

// Same statistic over only the layouts whose base pair excludes the suspect.
double dispersion_after_removal(const AlignedLayoutSet& aligned, int suspect,
                                int min_layouts_remaining = 2);

// Candidate-then-confirm detection: threshold the per-node errors, then
// greedily confirm the candidate whose removal shrinks the dispersion the
// most, repeating until no candidate reduces it further. Candidates whose
// removal does not reduce the dispersion are demoted as false anomalies.
AnomalyReport detect(const AlignedLayoutSet& aligned, const FusedEstimate& fused,
                     const DetectorParams& params = {});

// Drops every layout whose base pair contains a confirmed node.
AlignedLayoutSet prune(const AlignedLayoutSet& aligned, const std::set<int>& confirmed,
                       int min_layouts_remaining = 1);

// Per-node positional standard deviation across a set of layouts; the
// building block of sd_bar, also used for the optimizer's configuration
// dispersion statistic.
std::vector<double> per_node_position_sd(const std::vector<Layout>& layouts, std::size_t n_nodes);

}  // namespace relloc
