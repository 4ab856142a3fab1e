// SPDX-License-Identifier: Apache-2.0
#include "oscagent/losses/losses.hpp"

#include <cmath>

namespace osc::losses {
namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw LossError("NonFinite", std::string(what) + " contains non-finite values");
}

void require_aligned(const Eigen::VectorXd& t, const Eigen::VectorXd& p) {
  if (t.size() == 0) throw LossError("EmptyBatch", "batch is empty");
  if (t.size() != p.size()) throw LossError("ShapeMismatch", "targets and predictions differ in length");
  require_finite(t, "targets");
  require_finite(p, "predictions");
}

// Row-wise log-softmax with the usual max shift.
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

struct Normalized {
  Eigen::MatrixXd unit;
  Eigen::VectorXd norms;
};

Normalized normalize_rows(const Eigen::MatrixXd& m, const char* which) {
  Normalized n{m, m.rowwise().norm()};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (!(n.norms[i] > 0.0)) {
      throw LossError("DegenerateRow", std::string(which) + " row " + std::to_string(i) + " has zero norm");
    }
    n.unit.row(i) /= n.norms[i];
  }
  return n;
}

// Gradient through x -> x / |x| for each row.
Eigen::MatrixXd back_through_normalize(const Normalized& n, const Eigen::MatrixXd& d_unit) {
  Eigen::MatrixXd out(d_unit.rows(), d_unit.cols());
  for (Eigen::Index i = 0; i < d_unit.rows(); ++i) {
    const double proj = n.unit.row(i).dot(d_unit.row(i));
    out.row(i) = (d_unit.row(i) - proj * n.unit.row(i)) / n.norms[i];
  }
  return out;
}

}  // namespace

void PredictionBatch::validate() const {
  if (targets.size() == 0) throw LossError("EmptyBatch", "batch is empty");
  if (means.size() != targets.size() || log_variances.size() != targets.size()) {
    throw LossError("ShapeMismatch", "targets, means and log-variances must have equal length");
  }
  require_finite(targets, "targets");
  require_finite(means, "means");
  require_finite(log_variances, "log-variances");
}

void LossWeights::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw LossError("InvalidWeights", "tau must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw LossError("InvalidWeights", "lambda must be non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw LossError("InvalidWeights", "alpha must lie in [0, 1]");
}

double gaussian_nll(const PredictionBatch& batch) { return gaussian_nll_grad(batch).value; }

GaussianNllGrad gaussian_nll_grad(const PredictionBatch& batch) {
  batch.validate();
  const double n = static_cast<double>(batch.size());
  const Eigen::ArrayXd r = (batch.targets - batch.means).array();
  const Eigen::ArrayXd inv_var = (-batch.log_variances.array()).exp();
  GaussianNllGrad g;
  g.value = (0.5 * r.square() * inv_var + 0.5 * batch.log_variances.array()).sum() / n;
  g.d_means = (-r * inv_var / n).matrix();
  g.d_log_variances = ((0.5 - 0.5 * r.square() * inv_var) / n).matrix();
  if (!std::isfinite(g.value)) throw LossError("NonFinite", "negative log-likelihood overflowed");
  return g;
}

double mse(const Eigen::VectorXd& targets, const Eigen::VectorXd& predictions) {
  require_aligned(targets, predictions);
  return (predictions - targets).squaredNorm() / static_cast<double>(targets.size());
}

MseGrad mse_grad(const Eigen::VectorXd& targets, const Eigen::VectorXd& predictions) {
  MseGrad g;
  g.value = mse(targets, predictions);
  g.d_predictions = 2.0 * (predictions - targets) / static_cast<double>(targets.size());
  return g;
}

double lumo_dual_head(const Eigen::VectorXd& targets, const Eigen::VectorXd& head_a, const Eigen::VectorXd& head_b) {
  return mse(targets, head_a) + mse(targets, head_b);
}

double info_nce_symmetric(const EmbeddingBatch& batch, double tau) {
  return info_nce_symmetric_grad(batch, tau).value;
}

InfoNceGrad info_nce_symmetric_grad(const EmbeddingBatch& batch, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw LossError("InvalidWeights", "tau must be positive");
  if (batch.a.rows() == 0) throw LossError("EmptyBatch", "batch is empty");
  if (batch.a.rows() != batch.b.rows() || batch.a.cols() != batch.b.cols()) {
    throw LossError("ShapeMismatch", "embedding sets must have equal shapes");
  }
  require_finite(batch.a, "embeddings");
  require_finite(batch.b, "embeddings");
  const auto na = normalize_rows(batch.a, "first modality");
  const auto nb = normalize_rows(batch.b, "second modality");
  const double n = static_cast<double>(batch.a.rows());

  const Eigen::MatrixXd logits = na.unit * nb.unit.transpose() / tau;
  const Eigen::MatrixXd lr = log_softmax_rows(logits);
  const Eigen::MatrixXd lc = log_softmax_rows(logits.transpose()).transpose();

  InfoNceGrad g;
  g.value = -0.5 * (lr.diagonal().sum() + lc.diagonal().sum()) / n;

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(logits.rows(), logits.cols());
  const Eigen::MatrixXd d_logits = 0.5 * ((lr.array().exp() - eye.array()) + (lc.array().exp() - eye.array())).matrix() / n;
  const Eigen::MatrixXd d_ua = d_logits * nb.unit / tau;
  const Eigen::MatrixXd d_ub = d_logits.transpose() * na.unit / tau;
  g.d_a = back_through_normalize(na, d_ua);
  g.d_b = back_through_normalize(nb, d_ub);
  return g;
}

double pretrain_objective(double cl, double lumo_aux, const LossWeights& w) {
  w.validate();
  return cl + w.lambda * lumo_aux;
}

double finetune_objective(double mse_val, double uq_val, const LossWeights& w) {
  w.validate();
  return (1.0 - w.alpha) * mse_val + w.alpha * uq_val;
}

GaussianNllGrad finetune_objective_grad(const PredictionBatch& batch, const LossWeights& w) {
  w.validate();
  const auto uq = gaussian_nll_grad(batch);
  const auto sq = mse_grad(batch.targets, batch.means);
  GaussianNllGrad g;
  g.value = finetune_objective(sq.value, uq.value, w);
  g.d_means = (1.0 - w.alpha) * sq.d_predictions + w.alpha * uq.d_means;
  g.d_log_variances = w.alpha * uq.d_log_variances;
  return g;
}

}  // namespace osc::losses
