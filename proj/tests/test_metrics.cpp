// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>

#include "fixtures.hpp"
#include "ot_oracle.hpp"
#include "oscagent/chem/smiles.hpp"
#include "oscagent/metrics/metrics.hpp"
#include "oscagent/metrics/transport.hpp"

using namespace osc;
using metrics::MetricsError;

namespace {

fp::Fingerprint fp_with(std::initializer_list<int> bits, int width = 64) {
  fp::Fingerprint f(fp::FingerprintKind::Morgan, width, 2);
  for (int b : bits) f.set(b);
  return f;
}

fp::Fingerprint random_fp(std::mt19937& rng, double density = 0.2) {
  fp::Fingerprint f(fp::FingerprintKind::Morgan, 64, 2);
  std::bernoulli_distribution on(density);
  for (int b = 0; b < 64; ++b) {
    if (on(rng)) f.set(b);
  }
  return f;
}

metrics::GenerationSet load_toy() {
  metrics::GenerationSet g;
  const auto rows = fixtures::read_tsv("metrics_toy.tsv");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& c = rows[r];
    auto num = [&](std::size_t k) -> std::optional<double> {
      if (k >= c.size() || c[k].empty()) return std::nullopt;
      return std::stod(c[k]);
    };
    g.add(c[0], num(1), num(2));
  }
  return g;
}

std::set<std::string> load_reference() {
  std::set<std::string> ref;
  for (const auto& row : fixtures::read_tsv("metrics_reference.txt")) ref.insert(chem::canonical_smiles(row[0]));
  return ref;
}

metrics::TransportProblem uniform(const Eigen::MatrixXd& c) {
  metrics::TransportProblem tp;
  tp.cost = c;
  tp.p = Eigen::VectorXd::Constant(c.rows(), 1.0 / static_cast<double>(c.rows()));
  tp.q = Eigen::VectorXd::Constant(c.cols(), 1.0 / static_cast<double>(c.cols()));
  return tp;
}

}  // namespace

TEST(Tanimoto, Examples) {
  const auto x = fp_with({1, 2, 3});
  EXPECT_DOUBLE_EQ(metrics::tanimoto(x, x), 1.0);
  EXPECT_DOUBLE_EQ(metrics::tanimoto(fp_with({1, 2}), fp_with({5, 6})), 0.0);
  EXPECT_DOUBLE_EQ(metrics::tanimoto(fp_with({1, 2, 3}), fp_with({3, 9})), 0.25);
  EXPECT_DOUBLE_EQ(metrics::tanimoto(fp_with({}), fp_with({})), 1.0);
  EXPECT_DOUBLE_EQ(metrics::tanimoto(fp_with({}), fp_with({4})), 0.0);
}

TEST(Tanimoto, WidthMismatch) {
  try {
    metrics::tanimoto(fp_with({1}, 64), fp_with({1}, 128));
    FAIL();
  } catch (const MetricsError& e) {
    EXPECT_EQ(e.kind(), "WidthMismatch");
  }
}

TEST(Tanimoto, SymmetricReflexiveTriangle) {
  std::mt19937 rng(3);
  for (int t = 0; t < 500; ++t) {
    const auto a = random_fp(rng), b = random_fp(rng), c = random_fp(rng);
    EXPECT_DOUBLE_EQ(metrics::tanimoto(a, b), metrics::tanimoto(b, a));
    if (a.popcount() > 0) EXPECT_DOUBLE_EQ(metrics::tanimoto(a, a), 1.0);
    const double dab = 1 - metrics::tanimoto(a, b);
    const double dbc = 1 - metrics::tanimoto(b, c);
    const double dac = 1 - metrics::tanimoto(a, c);
    EXPECT_LE(dac, dab + dbc + 1e-12);
  }
}

TEST(GenerationMetrics, UniquenessExamples) {
  metrics::GenerationSet g;
  for (const char* s : {"CCO", "OCC", "C"}) g.add(s);
  EXPECT_DOUBLE_EQ(metrics::uniqueness(g), 2.0 / 3.0);

  metrics::GenerationSet distinct;
  for (const char* s : {"C", "CC", "CCC", "CCCC"}) distinct.add(s);
  EXPECT_DOUBLE_EQ(metrics::uniqueness(distinct), 1.0);

  metrics::GenerationSet copies;
  for (int i = 0; i < 5; ++i) copies.add("c1ccccc1");
  EXPECT_DOUBLE_EQ(metrics::uniqueness(copies), 1.0 / 5.0);
}

TEST(GenerationMetrics, NoveltyExamples) {
  metrics::GenerationSet g;
  g.add("CCO");
  g.add("CCN");
  const std::set<std::string> ref{chem::canonical_smiles("OCC")};
  EXPECT_DOUBLE_EQ(metrics::novelty(g, ref), 0.5);
  EXPECT_DOUBLE_EQ(metrics::novelty(g, {}), 1.0);
  const std::set<std::string> all{chem::canonical_smiles("CCO"), chem::canonical_smiles("CCN")};
  EXPECT_DOUBLE_EQ(metrics::novelty(g, all), 0.0);
}

TEST(GenerationMetrics, ValidityExamples) {
  metrics::GenerationSet g;
  g.add("CCO", 12, 5);
  g.add("CCN", 9, 4);
  g.add("CCC", 15, 9);
  g.add("C1CC", 13, 2);
  EXPECT_DOUBLE_EQ(metrics::validity_rate(g), 0.25);

  metrics::GenerationSet edge;
  edge.add("CCO", 10, 2);
  edge.add("CCO", 12, 8);
  EXPECT_DOUBLE_EQ(metrics::validity_rate(edge), 0.0);

  metrics::GenerationSet missing;
  missing.add("CCO");
  missing.add("CCN", 11, 2);
  const auto r = metrics::validity(missing);
  EXPECT_EQ(r.valid, 1u);
  EXPECT_EQ(r.missing_predictions, std::vector<std::size_t>{0});
}

TEST(GenerationMetrics, AvgPce) {
  metrics::GenerationSet g;
  g.add("CCO", 10.0000001, 2);
  g.add("CCN", 14, 2);
  g.add("CCCl", 9, 2);
  g.add("C1CC", 30, 2);
  metrics::GenerationSet h;
  h.add("CCO", 10, 2);  // not valid: pce must exceed 10
  h.add("CCN", 14, 2);
  h.add("CCC", 10.5, 2);
  EXPECT_DOUBLE_EQ(metrics::avg_pce(h), 12.25);

  metrics::GenerationSet one;
  one.add("CCO", 11.3, 3);
  EXPECT_DOUBLE_EQ(metrics::avg_pce(one), 11.3);

  metrics::GenerationSet none;
  none.add("CCO", 9, 2);
  try {
    metrics::avg_pce(none);
    FAIL();
  } catch (const MetricsError& e) {
    EXPECT_EQ(e.kind(), "NoValidMolecules");
  }
  EXPECT_NEAR(metrics::avg_pce(g), (10.0000001 + 14) / 2, 1e-12);
}

TEST(GenerationMetrics, AvgPceOrderInvariant) {
  auto g = load_toy();
  const double base = metrics::avg_pce(g);
  std::mt19937 rng(5);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(g.molecules.begin(), g.molecules.end(), rng);
    EXPECT_NEAR(metrics::avg_pce(g), base, 1e-12);
  }
}

TEST(GenerationMetrics, EmptySet) {
  metrics::GenerationSet g;
  for (auto fn : {+[](const metrics::GenerationSet& s) { return metrics::uniqueness(s); },
                  +[](const metrics::GenerationSet& s) { return metrics::novelty(s, {}); },
                  +[](const metrics::GenerationSet& s) { return metrics::validity_rate(s); },
                  +[](const metrics::GenerationSet& s) { return metrics::avg_pce(s); }}) {
    try {
      fn(g);
      FAIL();
    } catch (const MetricsError& e) {
      EXPECT_EQ(e.kind(), "EmptySet");
    }
  }
}

TEST(GenerationMetrics, ToyCorpusMatchesHandCounts) {
  const auto g = load_toy();
  const auto expected = fixtures::read_json("metrics_expected.json");
  ASSERT_EQ(g.size(), expected["n_generated"].get<std::size_t>());
  const double n = static_cast<double>(g.size());
  EXPECT_EQ(metrics::uniqueness(g), expected["n_unique"].get<double>() / n);
  EXPECT_EQ(metrics::novelty(g, load_reference()), expected["n_novel"].get<double>() / n);
  const auto v = metrics::validity(g);
  EXPECT_EQ(v.valid, expected["n_valid"].get<std::size_t>());
  EXPECT_EQ(v.missing_predictions, expected["missing_predictions"].get<std::vector<std::size_t>>());
  EXPECT_DOUBLE_EQ(metrics::avg_pce(g), expected["avg_pce"].get<double>());
  for (double r : {metrics::uniqueness(g), metrics::novelty(g, load_reference()), v.rate()}) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(CostMatrix, Examples) {
  const auto a = fp_with({1, 2});
  EXPECT_EQ(metrics::cost_matrix({a}, {a}).cost(0, 0), 0.0);
  EXPECT_EQ(metrics::cost_matrix({a}, {fp_with({7})}).cost(0, 0), 1.0);
  std::mt19937 rng(9);
  std::vector<fp::Fingerprint> xs, ys;
  for (int i = 0; i < 5; ++i) xs.push_back(random_fp(rng));
  for (int i = 0; i < 3; ++i) ys.push_back(random_fp(rng));
  const auto tp = metrics::cost_matrix(xs, ys);
  ASSERT_EQ(tp.cost.rows(), 5);
  ASSERT_EQ(tp.cost.cols(), 3);
  EXPECT_GE(tp.cost.minCoeff(), 0.0);
  EXPECT_LE(tp.cost.maxCoeff(), 1.0);
  EXPECT_NEAR(tp.p.sum(), 1.0, 1e-12);
  EXPECT_THROW(metrics::cost_matrix({}, ys), MetricsError);
  EXPECT_THROW(metrics::cost_matrix({fp_with({1}, 128)}, ys), MetricsError);
}

TEST(Sinkhorn, Examples) {
  Eigen::MatrixXd c(2, 2);
  c << 0, 1, 1, 0;
  EXPECT_NEAR(metrics::sinkhorn_distance(uniform(c)).distance, 0.0, 5e-3);

  c << 0.2, 0.5, 0.6, 0.1;
  EXPECT_NEAR(oracle::exact_permutation_ot(c), 0.15, 1e-15);
  const auto plan = metrics::sinkhorn_distance(uniform(c));
  EXPECT_NEAR(plan.distance, 0.15, 5e-3);
  EXPECT_TRUE(plan.converged);
  EXPECT_NEAR(metrics::wasserstein_similarity(0.15), 0.85, 1e-15);

  Eigen::MatrixXd one(1, 1);
  one << 0.37;
  EXPECT_EQ(metrics::sinkhorn_distance(uniform(one)).distance, 0.37);
}

TEST(Sinkhorn, PlanInvariants) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 4, m = 1 + (t / 4) % 4;
    Eigen::MatrixXd c(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) c(i, j) = u(rng);
    const auto tp = uniform(c);
    const auto plan = metrics::sinkhorn_distance(tp);
    EXPECT_GE(plan.coupling.minCoeff(), 0.0);
    if (plan.converged) {
      EXPECT_LT((plan.coupling.rowwise().sum() - tp.p).cwiseAbs().maxCoeff(), 1e-6);
      EXPECT_LT((plan.coupling.colwise().sum().transpose() - tp.q).cwiseAbs().maxCoeff(), 1e-6);
    }
    EXPECT_NEAR(plan.distance, plan.coupling.cwiseProduct(c).sum(), 1e-15);
  }
}

TEST(Sinkhorn, MatchesExactOracleOnSmallUniformProblems) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto start = std::chrono::steady_clock::now();
  for (int n = 1; n <= 4; ++n) {
    for (int m = 1; m <= 4; ++m) {
      for (int rep = 0; rep < 25; ++rep) {
        Eigen::MatrixXd c(n, m);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) c(i, j) = u(rng);
        const double exact = oracle::exact_uniform_ot(c);
        if (n == m) {
          EXPECT_NEAR(exact, oracle::exact_permutation_ot(c), 1e-12);
        }
        EXPECT_LT(std::abs(metrics::sinkhorn_distance(uniform(c)).distance - exact), 5e-3)
            << n << "x" << m << " rep " << rep;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 5.0);
}

TEST(Sinkhorn, DistanceShrinksWithEpsilon) {
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd c(3, 4);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) c(i, j) = u(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.1, 0.01, 0.005}) {
      metrics::SinkhornConfig cfg;
      cfg.epsilon = eps;
      cfg.max_iterations = 20000;
      const double w = metrics::sinkhorn_distance(uniform(c), cfg).distance;
      // Slack of the configured marginal tolerance.
      EXPECT_LE(w, prev + 1e-6);
      prev = w;
    }
  }
}

TEST(Sinkhorn, IdenticalDistributionsAreSimilar) {
  std::mt19937 rng(4);
  std::vector<fp::Fingerprint> xs;
  for (int i = 0; i < 6; ++i) xs.push_back(random_fp(rng, 0.3));
  const auto plan = metrics::sinkhorn_distance(metrics::cost_matrix(xs, xs));
  EXPECT_GE(metrics::wasserstein_similarity(plan.distance), 0.999);
}

TEST(Sinkhorn, RejectsBadInput) {
  Eigen::MatrixXd c(2, 2);
  c << 0, 1.5, 1, 0;
  EXPECT_THROW(metrics::sinkhorn_distance(uniform(c)), MetricsError);
  c << 0, 1, 1, 0;
  auto tp = uniform(c);
  tp.p << 0.7, 0.7;
  EXPECT_THROW(metrics::sinkhorn_distance(tp), MetricsError);
  metrics::SinkhornConfig cfg;
  cfg.epsilon = 0;
  EXPECT_THROW(metrics::sinkhorn_distance(uniform(c), cfg), MetricsError);
}

TEST(Sinkhorn, ReportsDivergence) {
  Eigen::MatrixXd c(2, 2);
  c << 0.5, 1, 1, 0.5;
  metrics::SinkhornConfig cfg;
  cfg.epsilon = 1e-310;  // every C/epsilon overflows
  try {
    metrics::sinkhorn_distance(uniform(c), cfg);
    FAIL();
  } catch (const MetricsError& e) {
    EXPECT_EQ(e.kind(), "NumericalDivergence");
  }
}

TEST(WassersteinSimilarity, Range) {
  EXPECT_EQ(metrics::wasserstein_similarity(0.0), 1.0);
  EXPECT_EQ(metrics::wasserstein_similarity(1.0), 0.0);
  EXPECT_THROW(metrics::wasserstein_similarity(1.1), MetricsError);
  EXPECT_THROW(metrics::wasserstein_similarity(-0.01), MetricsError);
}
