// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace osc::losses {

class LossError : public std::runtime_error {
 public:
  LossError(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct PredictionBatch {
  Eigen::VectorXd targets;
  Eigen::VectorXd means;
  Eigen::VectorXd log_variances;  // log sigma^2

  Eigen::Index size() const { return targets.size(); }
  void validate() const;
};

/// Rows of `a` and `b` with the same index are positive pairs.
struct EmbeddingBatch {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};

struct LossWeights {
  double tau = 0.07;
  double lambda = 1.0;
  double alpha = 0.2;

  void validate() const;
};

/// Heteroscedastic Gaussian negative log-likelihood (constant dropped),
/// averaged over the batch.
double gaussian_nll(const PredictionBatch& batch);

struct GaussianNllGrad {
  double value = 0.0;
  Eigen::VectorXd d_means;
  Eigen::VectorXd d_log_variances;
};
GaussianNllGrad gaussian_nll_grad(const PredictionBatch& batch);

double mse(const Eigen::VectorXd& targets, const Eigen::VectorXd& predictions);

struct MseGrad {
  double value = 0.0;
  Eigen::VectorXd d_predictions;
};
MseGrad mse_grad(const Eigen::VectorXd& targets, const Eigen::VectorXd& predictions);

/// Auxiliary LUMO loss with one regression head per modality: the sum of
/// the two mean squared errors.
double lumo_dual_head(const Eigen::VectorXd& targets, const Eigen::VectorXd& head_a, const Eigen::VectorXd& head_b);

/// Symmetric InfoNCE over cosine similarities divided by tau.
double info_nce_symmetric(const EmbeddingBatch& batch, double tau);

struct InfoNceGrad {
  double value = 0.0;
  Eigen::MatrixXd d_a;
  Eigen::MatrixXd d_b;
};
InfoNceGrad info_nce_symmetric_grad(const EmbeddingBatch& batch, double tau);

/// cl + lambda * lumo_aux
double pretrain_objective(double cl, double lumo_aux, const LossWeights& w = {});

/// (1 - alpha) * mse + alpha * uq
double finetune_objective(double mse_val, double uq_val, const LossWeights& w = {});

/// Fine-tuning objective evaluated on a batch, with gradients for both heads.
GaussianNllGrad finetune_objective_grad(const PredictionBatch& batch, const LossWeights& w = {});

}  // namespace osc::losses
