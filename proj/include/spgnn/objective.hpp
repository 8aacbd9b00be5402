#pragma once

#include <Eigen/Core>

namespace spgnn {

struct LossBreakdown {
  double l_vis = 0.0;
  double l_sem = 0.0;
  double alpha = 1.0;
  double total = 0.0;
};

/// Binary cross-entropy from probabilities in (0,1): sum over classes, mean
/// over the batch. Probabilities are clamped at 1e-7 inside the logs.
/// Matrices are (c x B); targets are 0/1.
double cross_entropy_from_probs(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& targets);

/// Same loss computed stably from logits. When d_logits is non-null it
/// receives dL/dlogits = (sigmoid(z) - y) / B.
double cross_entropy_from_logits(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets,
                                 Eigen::MatrixXd* d_logits = nullptr);

/// Label-consistency loss over the recommendation head output.
double visual_loss(const Eigen::MatrixXd& predicted_probs, const Eigen::MatrixXd& targets);

/// Same functional form over normalized relation scores.
double semantic_loss(const Eigen::MatrixXd& relation_probs, const Eigen::MatrixXd& targets);

/// total = l_vis + alpha * l_sem. alpha = 0 gives the single-task ablation;
/// negative alpha is rejected.
double total_loss(double l_vis, double l_sem, double alpha);

}  // namespace spgnn
