#include "spgnn/objective.hpp"

#include <cmath>

#include "spgnn/errors.hpp"

namespace spgnn {

namespace {

constexpr double kProbClamp = 1e-7;

void check_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    raise(ErrorCode::ShapeMismatch, "prediction and target shapes differ");
  }
  if (a.size() == 0) {
    raise(ErrorCode::ShapeMismatch, "empty batch");
  }
}

}  // namespace

double cross_entropy_from_probs(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& targets) {
  check_pair(probs, targets);
  const Eigen::Index batch = probs.cols();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = probs.data()[i];
    const double y = targets.data()[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      raise(ErrorCode::NonFiniteInput, "probabilities must lie in [0,1]");
    }
    if (!(y == 0.0 || y == 1.0)) {
      raise(ErrorCode::NonFiniteInput, "targets must be binary");
    }
    const double pc = std::fmin(std::fmax(p, kProbClamp), 1.0 - kProbClamp);
    loss -= y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
  }
  return loss / static_cast<double>(batch);
}

double cross_entropy_from_logits(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets,
                                 Eigen::MatrixXd* d_logits) {
  check_pair(logits, targets);
  const Eigen::Index batch = logits.cols();
  double loss = 0.0;
  if (d_logits) d_logits->resize(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits.data()[i];
    const double y = targets.data()[i];
    if (!std::isfinite(z)) {
      raise(ErrorCode::NonFiniteInput, "logits must be finite");
    }
    // max(z,0) - z*y + log(1 + exp(-|z|))
    loss += std::fmax(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
    if (d_logits) {
      d_logits->data()[i] = (1.0 / (1.0 + std::exp(-z)) - y) / static_cast<double>(batch);
    }
  }
  return loss / static_cast<double>(batch);
}

double visual_loss(const Eigen::MatrixXd& predicted_probs, const Eigen::MatrixXd& targets) {
  return cross_entropy_from_probs(predicted_probs, targets);
}

double semantic_loss(const Eigen::MatrixXd& relation_probs, const Eigen::MatrixXd& targets) {
  return cross_entropy_from_probs(relation_probs, targets);
}

double total_loss(double l_vis, double l_sem, double alpha) {
  if (alpha < 0.0) {
    raise(ErrorCode::NegativeAlpha, "alpha must be >= 0");
  }
  if (!std::isfinite(l_vis) || !std::isfinite(l_sem)) {
    raise(ErrorCode::NonFiniteInput, "loss components must be finite");
  }
  return l_vis + alpha * l_sem;
}

}  // namespace spgnn
