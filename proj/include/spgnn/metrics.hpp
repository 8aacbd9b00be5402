#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "spgnn/dataset.hpp"

namespace spgnn {

struct PrPoint {
  double recall;
  double precision;
  double threshold;
};

/// One point per distinct score threshold in descending order; ties are
/// grouped at a single threshold.
struct PrCurve {
  std::vector<PrPoint> points;
};

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

/// Area under the P-R curve, stepwise (no interpolation):
/// AP = sum_t (R_t - R_{t-1}) * P_t over descending distinct thresholds.
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels);

struct ApReport {
  // evaluated APIs in vocabulary order
  std::vector<std::pair<std::string, double>> per_api;
  double map = 0.0;
  std::vector<std::pair<std::string, int>> positive_counts;
  std::vector<std::string> skipped_no_positives;

  /// Shared mean used for the mAP; exposed so external AP tables can be
  /// pushed through the identical arithmetic.
  static double mean_ap(const std::vector<double>& aps);

  std::string human_table() const;
};

/// Per-API AP over score columns; APIs with zero positives are excluded from
/// the mean and listed separately.
ApReport evaluate_map(const Eigen::MatrixXd& scores /* N x c */,
                      const std::vector<LabelVector>& labels,
                      const ApiVocabulary& vocab);

}  // namespace spgnn
