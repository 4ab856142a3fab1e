// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "oscagent/losses/losses.hpp"

using namespace osc::losses;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

PredictionBatch batch_of(std::initializer_list<double> y, std::initializer_list<double> mu,
                         std::initializer_list<double> logvar) {
  PredictionBatch b;
  b.targets = Eigen::Map<const VectorXd>(y.begin(), Eigen::Index(y.size()));
  b.means = Eigen::Map<const VectorXd>(mu.begin(), Eigen::Index(mu.size()));
  b.log_variances = Eigen::Map<const VectorXd>(logvar.begin(), Eigen::Index(logvar.size()));
  return b;
}

VectorXd randn(std::mt19937& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

MatrixXd randm(std::mt19937& rng, Eigen::Index r, Eigen::Index c) {
  MatrixXd m(r, c);
  std::normal_distribution<double> g;
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

// Central differences of f around x, one coordinate at a time.
template <class M>
M numeric_grad(const std::function<double(const M&)>& f, const M& x, double h = 1e-6) {
  M g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    M xp = x, xm = x;
    xp.data()[i] += h;
    xm.data()[i] -= h;
    g.data()[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

template <class M>
double rel_err(const M& analytic, const M& numeric) {
  return (analytic - numeric).norm() / std::max(1e-8, analytic.norm() + numeric.norm());
}

// Literal per-element evaluation of the symmetric InfoNCE definition.
double info_nce_reference(const MatrixXd& a, const MatrixXd& b, double tau) {
  const Eigen::Index n = a.rows();
  MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = a.row(i).normalized().dot(b.row(j).normalized()) / tau;
  double total = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double row = 0, col = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      row += std::exp(s(j, k));
      col += std::exp(s(k, j));
    }
    total += -0.5 * std::log(std::exp(s(j, j)) / row) - 0.5 * std::log(std::exp(s(j, j)) / col);
  }
  return total / double(n);
}

MatrixXd random_rotation(std::mt19937& rng, Eigen::Index d) {
  Eigen::HouseholderQR<MatrixXd> qr(randm(rng, d, d));
  return qr.householderQ();
}

}  // namespace

TEST(GaussianNll, Examples) {
  EXPECT_DOUBLE_EQ(gaussian_nll(batch_of({1.0}, {1.0}, {0.0})), 0.0);
  EXPECT_DOUBLE_EQ(gaussian_nll(batch_of({1.0}, {0.0}, {0.0})), 0.5);
  const double var = 2.0, r = 2.0;
  const double oracle = r * r / (2 * var) + 0.5 * std::log(var);
  EXPECT_NEAR(gaussian_nll(batch_of({3.0}, {1.0}, {std::log(2.0)})), oracle, 1e-12);
  EXPECT_NEAR(oracle, 1.3466, 1e-4);
}

TEST(GaussianNll, MinimisedAtSquaredResidual) {
  for (double r : {0.3, 1.0, 2.5}) {
    double best = 1e300, best_s = 0;
    for (double s = -6; s <= 6; s += 1e-3) {
      const double v = gaussian_nll(batch_of({r}, {0.0}, {s}));
      if (v < best) {
        best = v;
        best_s = s;
      }
    }
    EXPECT_NEAR(std::exp(best_s), r * r, r * r * 2e-3) << r;
  }
}

TEST(GaussianNll, Errors) {
  EXPECT_THROW(gaussian_nll(PredictionBatch{}), LossError);
  EXPECT_THROW(gaussian_nll(batch_of({1.0, 2.0}, {1.0}, {0.0})), LossError);
  try {
    gaussian_nll(batch_of({1.0}, {1.0}, {INFINITY}));
    FAIL();
  } catch (const LossError& e) {
    EXPECT_EQ(e.kind(), "NonFinite");
  }
}

TEST(Mse, Examples) {
  const VectorXd y = (VectorXd(2) << 1, 2).finished();
  EXPECT_EQ(mse(y, y), 0.0);
  EXPECT_EQ(mse(y, (VectorXd(2) << 2, 1).finished()), 1.0);
  EXPECT_EQ(mse(VectorXd::Constant(1, 0.0), VectorXd::Constant(1, 3.0)), 9.0);
  EXPECT_THROW(mse(y, VectorXd::Constant(2, NAN)), LossError);
  EXPECT_THROW(mse(VectorXd(), VectorXd()), LossError);
}

TEST(Mse, DualHeadIsSumOfHeads) {
  const VectorXd y = (VectorXd(2) << -3.5, -3.9).finished();
  const VectorXd a = (VectorXd(2) << -3.4, -3.9).finished();
  const VectorXd b = (VectorXd(2) << -3.5, -3.6).finished();
  EXPECT_NEAR(lumo_dual_head(y, a, b), 0.01 / 2 + 0.09 / 2, 1e-12);
}

TEST(InfoNce, Examples) {
  EmbeddingBatch one{MatrixXd::Constant(1, 3, 0.5), MatrixXd::Constant(1, 3, -2.0)};
  EXPECT_NEAR(info_nce_symmetric(one, 0.07), 0.0, 1e-12);

  EmbeddingBatch same{MatrixXd::Constant(2, 3, 1.0), MatrixXd::Constant(2, 3, 1.0)};
  EXPECT_NEAR(info_nce_symmetric(same, 0.07), std::log(2.0), 1e-12);

  EmbeddingBatch aligned{MatrixXd::Identity(4, 4), MatrixXd::Identity(4, 4)};
  EXPECT_LT(info_nce_symmetric(aligned, 0.05), 1e-3);
}

TEST(InfoNce, MatchesLiteralDefinition) {
  std::mt19937 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = randm(rng, 5, 3), b = randm(rng, 5, 3);
    EXPECT_NEAR(info_nce_symmetric({a, b}, 0.5), info_nce_reference(a, b, 0.5), 1e-10);
  }
}

TEST(InfoNce, RotationInvariant) {
  std::mt19937 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = randm(rng, 6, 4), b = randm(rng, 6, 4);
    const auto q = random_rotation(rng, 4);
    EXPECT_NEAR(info_nce_symmetric({a, b}, 0.1), info_nce_symmetric({a * q, b * q}, 0.1), 1e-10);
  }
}

TEST(InfoNce, Errors) {
  MatrixXd a = MatrixXd::Identity(2, 2);
  MatrixXd z = a;
  z.row(1).setZero();
  try {
    info_nce_symmetric({a, z}, 0.07);
    FAIL();
  } catch (const LossError& e) {
    EXPECT_EQ(e.kind(), "DegenerateRow");
  }
  EXPECT_THROW(info_nce_symmetric({a, MatrixXd::Identity(3, 2)}, 0.07), LossError);
  EXPECT_THROW(info_nce_symmetric({a, a}, 0.0), LossError);
}

TEST(Objectives, Examples) {
  LossWeights w;
  w.lambda = 0;
  EXPECT_EQ(pretrain_objective(0.7, 0.3, w), 0.7);
  w.lambda = 1;
  EXPECT_DOUBLE_EQ(pretrain_objective(0.7, 0.3, w), 1.0);
  w.lambda = 2;
  EXPECT_EQ(pretrain_objective(0.0, 0.5, w), 1.0);

  w = {};
  w.alpha = 0;
  EXPECT_EQ(finetune_objective(1.0, 0.5, w), 1.0);
  w.alpha = 1;
  EXPECT_EQ(finetune_objective(1.0, 0.5, w), 0.5);
  EXPECT_DOUBLE_EQ(finetune_objective(1.0, 0.5), 0.9);
  EXPECT_EQ(LossWeights{}.alpha, 0.2);

  w.alpha = 1.5;
  EXPECT_THROW(finetune_objective(1.0, 0.5, w), LossError);
  w = {};
  w.lambda = -1;
  EXPECT_THROW(pretrain_objective(1.0, 0.5, w), LossError);
}

TEST(Properties, PermutationInvariant) {
  std::mt19937 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 7;
    PredictionBatch b{randn(rng, n), randn(rng, n), randn(rng, n, 0.5)};
    const auto a = randm(rng, n, 3), e = randm(rng, n, 3);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(Eigen::Map<Eigen::VectorXi>(order.data(), n));
    PredictionBatch pb{p * b.targets, p * b.means, p * b.log_variances};
    EXPECT_NEAR(gaussian_nll(b), gaussian_nll(pb), 1e-12);
    EXPECT_NEAR(mse(b.targets, b.means), mse(pb.targets, pb.means), 1e-12);
    EXPECT_NEAR(info_nce_symmetric({a, e}, 0.2), info_nce_symmetric({p * a, p * e}, 0.2), 1e-12);
  }
}

TEST(Gradients, GaussianNllMatchesFiniteDifferences) {
  std::mt19937 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    PredictionBatch b{randn(rng, 6), randn(rng, 6), randn(rng, 6, 0.7)};
    const auto g = gaussian_nll_grad(b);
    const auto dmu = numeric_grad<VectorXd>(
        [&](const VectorXd& m) { return gaussian_nll({b.targets, m, b.log_variances}); }, b.means);
    const auto dlv = numeric_grad<VectorXd>(
        [&](const VectorXd& s) { return gaussian_nll({b.targets, b.means, s}); }, b.log_variances);
    EXPECT_LT(rel_err(g.d_means, dmu), 1e-4);
    EXPECT_LT(rel_err(g.d_log_variances, dlv), 1e-4);
  }
}

TEST(Gradients, MseMatchesFiniteDifferences) {
  std::mt19937 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const VectorXd y = randn(rng, 5), p = randn(rng, 5);
    const auto num = numeric_grad<VectorXd>([&](const VectorXd& x) { return mse(y, x); }, p);
    EXPECT_LT(rel_err(mse_grad(y, p).d_predictions, num), 1e-4);
  }
}

TEST(Gradients, InfoNceMatchesFiniteDifferences) {
  std::mt19937 rng(14);
  for (int rep = 0; rep < 20; ++rep) {
    const MatrixXd a = randm(rng, 4, 3), b = randm(rng, 4, 3);
    const auto g = info_nce_symmetric_grad({a, b}, 0.3);
    const auto da = numeric_grad<MatrixXd>([&](const MatrixXd& x) { return info_nce_symmetric({x, b}, 0.3); }, a);
    const auto db = numeric_grad<MatrixXd>([&](const MatrixXd& x) { return info_nce_symmetric({a, x}, 0.3); }, b);
    EXPECT_LT(rel_err(g.d_a, da), 1e-4);
    EXPECT_LT(rel_err(g.d_b, db), 1e-4);
  }
}

TEST(Gradients, FinetuneMatchesFiniteDifferences) {
  std::mt19937 rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    PredictionBatch b{randn(rng, 6), randn(rng, 6), randn(rng, 6, 0.7)};
    const auto g = finetune_objective_grad(b);
    auto f = [&](const VectorXd& m, const VectorXd& s) {
      PredictionBatch x{b.targets, m, s};
      return finetune_objective(mse(x.targets, x.means), gaussian_nll(x));
    };
    EXPECT_NEAR(g.value, f(b.means, b.log_variances), 1e-12);
    const auto dmu = numeric_grad<VectorXd>([&](const VectorXd& m) { return f(m, b.log_variances); }, b.means);
    const auto dlv = numeric_grad<VectorXd>([&](const VectorXd& s) { return f(b.means, s); }, b.log_variances);
    EXPECT_LT(rel_err(g.d_means, dmu), 1e-4);
    EXPECT_LT(rel_err(g.d_log_variances, dlv), 1e-4);
  }
}
