#include "spgnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spgnn/errors.hpp"

namespace spgnn {

namespace {

// Indices sorted by descending score; equal scores keep ascending sample
// index so reported curves are deterministic.
std::vector<std::size_t> ranking(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    raise(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  }
  if (scores.empty()) {
    raise(ErrorCode::NoPositives, "empty score list");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      raise(ErrorCode::NonFiniteInput, "scores must be finite");
    }
  }
  if (std::find(labels.begin(), labels.end(), 1) == labels.end()) {
    raise(ErrorCode::NoPositives, "no positive labels");
  }
}

}  // namespace

PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_inputs(scores, labels);
  const auto order = ranking(scores);
  const double total_pos =
      static_cast<double>(std::count(labels.begin(), labels.end(), 1));

  PrCurve curve;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // consume the whole tie group at this threshold
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] ? tp : fp) += 1;
      ++i;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / total_pos;
    curve.points.push_back(PrPoint{recall, precision, threshold});
  }
  return curve;
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  const PrCurve curve = pr_curve(scores, labels);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& pt : curve.points) {
    ap += (pt.recall - prev_recall) * pt.precision;
    prev_recall = pt.recall;
  }
  return ap;
}

double ApReport::mean_ap(const std::vector<double>& aps) {
  if (aps.empty()) {
    raise(ErrorCode::NoPositives, "no APIs with positives to average");
  }
  double sum = 0.0;
  for (double ap : aps) sum += ap;
  return sum / static_cast<double>(aps.size());
}

ApReport evaluate_map(const Eigen::MatrixXd& scores,
                      const std::vector<LabelVector>& labels,
                      const ApiVocabulary& vocab) {
  const auto n = static_cast<std::size_t>(scores.rows());
  const auto c = static_cast<std::size_t>(scores.cols());
  if (labels.size() != n || c != vocab.size()) {
    raise(ErrorCode::ShapeMismatch, "score matrix does not match labels/vocabulary");
  }
  for (const auto& row : labels) {
    if (row.size() != c) {
      raise(ErrorCode::ShapeMismatch, "label vector does not match vocabulary size");
    }
  }

  ApReport report;
  std::vector<double> aps;
  for (std::size_t j = 0; j < c; ++j) {
    std::vector<double> col(n);
    std::vector<int> lab(n);
    int positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      lab[i] = labels[i].bits[j];
      positives += lab[i];
    }
    if (positives == 0) {
      report.skipped_no_positives.push_back(vocab.name(j));
      continue;
    }
    const double ap = average_precision(col, lab);
    report.per_api.emplace_back(vocab.name(j), ap);
    report.positive_counts.emplace_back(vocab.name(j), positives);
    aps.push_back(ap);
  }
  report.map = ApReport::mean_ap(aps);
  return report;
}

std::string ApReport::human_table() const {
  std::ostringstream out;
  out << "API                        AP   positives\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%-22s %7.4f\n", "mAP", map);
  out << buf;
  for (std::size_t i = 0; i < per_api.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%-22s %7.4f  %9d\n", per_api[i].first.c_str(),
                  per_api[i].second, positive_counts[i].second);
    out << buf;
  }
  for (const auto& name : skipped_no_positives) {
    std::snprintf(buf, sizeof(buf), "%-22s  (no positives, excluded)\n", name.c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace spgnn
