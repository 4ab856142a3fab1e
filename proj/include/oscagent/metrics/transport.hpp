// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "oscagent/fp/fingerprint.hpp"

namespace osc::metrics {

struct TransportProblem {
  Eigen::MatrixXd cost;  // entries in [0, 1]
  Eigen::VectorXd p;
  Eigen::VectorXd q;

  /// Throws MetricsError("InvalidProblem") on shape or marginal violations.
  void validate() const;
};

struct SinkhornConfig {
  double epsilon = 0.005;
  int max_iterations = 2000;
  double marginal_tolerance = 1e-6;
};

struct TransportPlan {
  Eigen::MatrixXd coupling;
  double distance = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

/// C_ij = 1 - tanimoto(gen_i, ref_j) with uniform marginals.
TransportProblem cost_matrix(const std::vector<fp::Fingerprint>& gen,
                             const std::vector<fp::Fingerprint>& ref);

/// Log-domain Sinkhorn iterations.
TransportPlan sinkhorn_distance(const TransportProblem& tp, const SinkhornConfig& cfg = {});

/// 1 - w, for w in [0, 1].
double wasserstein_similarity(double w);

}  // namespace osc::metrics
