// SPDX-License-Identifier: Apache-2.0
#include "oscagent/metrics/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oscagent/metrics/metrics.hpp"

namespace osc::metrics {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_marginal(const Eigen::VectorXd& w, const char* name) {
  if (w.size() == 0) throw MetricsError("InvalidProblem", std::string(name) + " is empty");
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0) {
      throw MetricsError("InvalidProblem", std::string(name) + " has a negative or non-finite weight");
    }
  }
  if (std::abs(w.sum() - 1.0) > 1e-9) {
    throw MetricsError("InvalidProblem", std::string(name) + " does not sum to 1");
  }
}

// log sum_k exp(v_k), skipping -inf terms.
double log_sum_exp(const double* v, Eigen::Index n, Eigen::Index stride) {
  double hi = kNegInf;
  for (Eigen::Index k = 0; k < n; ++k) hi = std::max(hi, v[k * stride]);
  if (hi == kNegInf) return kNegInf;
  double s = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) s += std::exp(v[k * stride] - hi);
  return hi + std::log(s);
}

}  // namespace

void TransportProblem::validate() const {
  check_marginal(p, "source weights");
  check_marginal(q, "target weights");
  if (cost.rows() != p.size() || cost.cols() != q.size()) {
    throw MetricsError("InvalidProblem", "cost matrix shape does not match the marginals");
  }
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      const double c = cost(i, j);
      if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
        throw MetricsError("InvalidProblem", "cost entries must lie in [0, 1]");
      }
    }
  }
}

TransportProblem cost_matrix(const std::vector<fp::Fingerprint>& gen,
                             const std::vector<fp::Fingerprint>& ref) {
  if (gen.empty() || ref.empty()) throw MetricsError("EmptySet", "cost matrix needs two non-empty sets");
  TransportProblem tp;
  const auto n = static_cast<Eigen::Index>(gen.size());
  const auto m = static_cast<Eigen::Index>(ref.size());
  tp.cost.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      tp.cost(i, j) = 1.0 - tanimoto(gen[static_cast<std::size_t>(i)], ref[static_cast<std::size_t>(j)]);
    }
  }
  tp.p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  tp.q = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  return tp;
}

TransportPlan sinkhorn_distance(const TransportProblem& tp, const SinkhornConfig& cfg) {
  tp.validate();
  if (!(cfg.epsilon > 0.0) || cfg.max_iterations < 1 || !(cfg.marginal_tolerance > 0.0)) {
    throw MetricsError("InvalidConfig", "epsilon and tolerance must be positive, max_iterations >= 1");
  }
  const Eigen::Index n = tp.cost.rows();
  const Eigen::Index m = tp.cost.cols();
  const double eps = cfg.epsilon;
  const Eigen::VectorXd log_p = tp.p.array().log();
  const Eigen::VectorXd log_q = tp.q.array().log();

  // Dual potentials; coupling pi_ij = exp((f_i + g_j - C_ij) / eps).
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd scratch(n, m);

  auto update_f = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) scratch(i, j) = (g[j] - tp.cost(i, j)) / eps;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      f[i] = log_p[i] == kNegInf ? kNegInf : eps * (log_p[i] - log_sum_exp(&scratch(i, 0), m, n));
    }
  };
  auto update_g = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) scratch(i, j) = (f[i] - tp.cost(i, j)) / eps;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      g[j] = log_q[j] == kNegInf ? kNegInf : eps * (log_q[j] - log_sum_exp(&scratch(0, j), n, 1));
    }
  };
  auto coupling = [&] {
    Eigen::MatrixXd pi(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        pi(i, j) = (f[i] == kNegInf || g[j] == kNegInf) ? 0.0 : std::exp((f[i] + g[j] - tp.cost(i, j)) / eps);
      }
    }
    return pi;
  };
  auto diverged = [](const Eigen::VectorXd& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (std::isnan(v[k]) || v[k] == std::numeric_limits<double>::infinity()) return true;
    }
    return false;
  };

  TransportPlan plan;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    update_f();
    update_g();
    if (diverged(f) || diverged(g)) {
      throw MetricsError("NumericalDivergence", "non-finite Sinkhorn potentials at iteration " + std::to_string(it) +
                                                    "; epsilon " + std::to_string(eps) + " is too small");
    }
    plan.iterations_used = it;
    // Columns match q exactly after the g step; rows carry the violation.
    plan.coupling = coupling();
    const double violation = (plan.coupling.rowwise().sum() - tp.p).cwiseAbs().maxCoeff();
    if (violation < cfg.marginal_tolerance) {
      plan.converged = true;
      break;
    }
  }
  plan.distance = plan.coupling.cwiseProduct(tp.cost).sum();
  return plan;
}

double wasserstein_similarity(double w) {
  constexpr double kSlack = 1e-9;
  if (!(w >= -kSlack && w <= 1.0 + kSlack)) {
    throw MetricsError("RangeError", "transport distance " + std::to_string(w) + " is outside [0, 1]");
  }
  return 1.0 - std::clamp(w, 0.0, 1.0);
}

}  // namespace osc::metrics
