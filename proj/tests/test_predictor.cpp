// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <zlib.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "heteroscedastic.hpp"
#include "oscagent/chem/smiles.hpp"
#include "oscagent/predictor/features.hpp"
#include "oscagent/predictor/regressor.hpp"
#include "oscagent/predictor/sascore.hpp"
#include "oscagent/retrieval/retrieval.hpp"

using namespace osc;
using namespace osc::predictor;

namespace {

const SaScoreTable& reference_table() {
  static const SaScoreTable table = SaScoreTable::load(std::string(OSC_DATA_DIR) + "/sascore/fpscores.tsv.gz");
  return table;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

struct MoleculeSet {
  Eigen::MatrixXd x;
  std::vector<retrieval::MoleculeRecord> records;
};

MoleculeSet demo_set(const FeatureSpec& spec) {
  const auto report = retrieval::read_reference_csv(std::string(OSC_DATA_DIR) + "/demo/reference.csv");
  MoleculeSet s;
  s.records = report.records;
  s.x.resize(static_cast<Eigen::Index>(s.records.size()), spec.length());
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    s.x.row(static_cast<Eigen::Index>(i)) = featurize(chem::parse_smiles(s.records[i].smiles), spec).transpose();
  }
  return s;
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("osc_predictor_" + name)).string();
}

}  // namespace

TEST(Featurize, MethaneHasOneBit) {
  const auto x = featurize(chem::parse_smiles("C"), FeatureSpec{});
  EXPECT_EQ(x.size(), 2048);
  EXPECT_EQ((x.array() != 0.0).count(), 1);
  EXPECT_EQ(x.sum(), 1.0);
}

TEST(Featurize, SmilesSpellingDoesNotMatter) {
  FeatureSpec spec;
  spec.descriptors = {"heavy_atoms", "rings"};
  EXPECT_EQ(featurize(chem::parse_smiles("OCC1=CC=CC=C1"), spec), featurize(chem::parse_smiles("c1ccccc1CO"), spec));
}

TEST(Featurize, LengthAndStandardisation) {
  FeatureSpec spec;
  spec.descriptors = {"heavy_atoms", "rings"};
  std::vector<chem::MoleculeGraph> mols;
  for (const char* s : {"CCO", "c1ccccc1", "c1ccc2ccccc2c1", "CCCCCCCC"}) mols.push_back(chem::parse_smiles(s));
  spec.fit(mols);
  EXPECT_EQ(spec.length(), 2050);
  double sum_heavy = 0, sum_rings = 0;
  for (const auto& m : mols) {
    const auto x = featurize(m, spec);
    ASSERT_EQ(x.size(), 2050);
    sum_heavy += x[2048];
    sum_rings += x[2049];
  }
  EXPECT_NEAR(sum_heavy, 0.0, 1e-12);
  EXPECT_NEAR(sum_rings, 0.0, 1e-12);
  EXPECT_EQ(descriptor(mols[2], "rings"), 2.0);
  EXPECT_EQ(descriptor(mols[0], "heavy_atoms"), 3.0);
  EXPECT_EQ(FeatureSpec::from_json(spec.to_json()), spec);
}

TEST(Featurize, RejectsBadSpec) {
  FeatureSpec spec;
  spec.descriptors = {"logp"};
  EXPECT_THROW(spec.validate(), PredictorError);
  spec = {};
  spec.width = 1000;
  EXPECT_THROW(spec.validate(), PredictorError);
}

TEST(Regressor, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (HeadKind kind : {HeadKind::Gaussian, HeadKind::Point}) {
    for (int rep = 0; rep < 5; ++rep) {
      Regressor model(kind, 5, 7, static_cast<std::uint64_t>(rep));
      const Eigen::MatrixXd x = random_matrix(rng, 3, 5);
      const Eigen::VectorXd y = random_matrix(rng, 3, 1);
      Eigen::MatrixXd mask;
      if (rep % 2 == 1) mask = (random_matrix(rng, 3, 7).array() > 0).cast<double>() / 0.7;
      Parameters grad;
      model.loss_and_gradient(x, y, 0.2, mask, &grad);
      const Eigen::VectorXd analytic = grad.flatten();
      const Eigen::VectorXd theta = model.parameters().flatten();
      Eigen::VectorXd numeric(theta.size());
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd t = theta;
        t[i] += 1e-6;
        model.parameters().assign(t);
        const double up = model.loss_and_gradient(x, y, 0.2, mask, nullptr);
        t[i] -= 2e-6;
        model.parameters().assign(t);
        const double down = model.loss_and_gradient(x, y, 0.2, mask, nullptr);
        numeric[i] = (up - down) / 2e-6;
      }
      model.parameters().assign(theta);
      EXPECT_LT((analytic - numeric).norm() / (analytic.norm() + numeric.norm()), 1e-4);
    }
  }
}

TEST(Regressor, ConstantTargetConverges) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = (random_matrix(rng, 40, 16).array() > 0.5).cast<double>();
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 7.5);
  TrainConfig cfg;
  cfg.hidden = 64;
  cfg.epochs = 500;
  cfg.batch_size = 8;
  cfg.learning_rate = 3e-3;
  cfg.dropout = 0.0;  // dropout noise would otherwise be all that sigma learns
  const auto model = Regressor::train(x, y, HeadKind::Gaussian, cfg);
  for (Eigen::Index i = 0; i < 40; i += 7) {
    const auto out = model.predict(Eigen::VectorXd(x.row(i).transpose()));
    EXPECT_NEAR(out.mu, 7.5, 0.1);
    EXPECT_LT(out.sigma, 0.25);
  }
}

TEST(Regressor, SameSeedSameBytes) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 6);
  const Eigen::VectorXd y = random_matrix(rng, 30, 1);
  TrainConfig cfg;
  cfg.hidden = 32;
  cfg.epochs = 20;
  cfg.batch_size = 8;
  cfg.seed = 99;
  const auto a = Regressor::train(x, y, HeadKind::Gaussian, cfg).to_json().dump();
  const auto b = Regressor::train(x, y, HeadKind::Gaussian, cfg).to_json().dump();
  EXPECT_EQ(a, b);
  cfg.seed = 100;
  EXPECT_NE(a, Regressor::train(x, y, HeadKind::Gaussian, cfg).to_json().dump());
}

TEST(Regressor, PredictionContract) {
  std::mt19937_64 rng(3);
  const Regressor model(HeadKind::Gaussian, 6, 16, 1);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = 50.0 * random_matrix(rng, 6, 1);
    const auto a = model.predict(x), b = model.predict(x);
    EXPECT_GT(a.sigma, 0.0);
    EXPECT_EQ(a.mu, b.mu);
    EXPECT_EQ(a.sigma, b.sigma);
  }
  try {
    model.predict(Eigen::VectorXd::Zero(5));
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_EQ(e.kind(), "SpecMismatch");
  }
  EXPECT_THROW(model.predict(chem::parse_smiles("CCO")), PredictorError);
}

TEST(Regressor, WellFitTrainingPointsBeatTheMae) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = random_matrix(rng, 60, 3);
  const Eigen::VectorXd y = x.col(0) - 0.5 * x.col(1) + 0.05 * random_matrix(rng, 60, 1);
  TrainConfig cfg;
  cfg.hidden = 64;
  cfg.epochs = 300;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  const auto model = Regressor::train(x, y, HeadKind::Gaussian, cfg);
  double mae = 0;
  int below = 0;
  for (Eigen::Index i = 0; i < 60; ++i) {
    const double r = std::abs(model.predict(Eigen::VectorXd(x.row(i).transpose())).mu - y[i]);
    mae += r / 60.0;
    below += r < model.metadata().train_mae ? 1 : 0;
  }
  EXPECT_NEAR(mae, model.metadata().train_mae, 1e-12);
  EXPECT_GE(below, 30);
  EXPECT_LT(model.metadata().train_mae, 0.3);
}

TEST(Regressor, HeteroscedasticSigmaTracksNoise) {
  const auto data = synthetic::heteroscedastic(500, 7);
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.seed = 7;
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = Regressor::train(data.x, data.y, HeadKind::Gaussian, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<double> sigma, truth;
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    sigma.push_back(model.predict(Eigen::VectorXd(data.x.row(i).transpose())).sigma);
    truth.push_back(data.noise_scale[i]);
  }
  EXPECT_GT(synthetic::spearman(sigma, truth), 0.5);
  EXPECT_LT(secs, 60.0);
}

TEST(Regressor, LossDropsOnDemoData) {
  const FeatureSpec spec;
  const auto set = demo_set(spec);
  Eigen::VectorXd y(set.x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = set.records[static_cast<std::size_t>(i)].pce;
  TrainConfig cfg;
  cfg.epochs = 15;
  const auto model = Regressor::train(set.x, y, HeadKind::Gaussian, cfg);
  const auto& losses = model.metadata().epoch_losses;
  ASSERT_EQ(losses.size(), 15u);
  EXPECT_LE(losses.back(), losses.front());
  EXPECT_EQ(model.hidden(), 768);
}

TEST(Regressor, NonFiniteLossAborts) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(4, 1e200);
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 2;
  try {
    Regressor::train(x, y, HeadKind::Point, cfg);
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_EQ(e.kind(), "NonFiniteLoss");
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
  EXPECT_THROW(Regressor::train(x.topRows(1), y.head(1), HeadKind::Point, cfg), PredictorError);
}

TEST(Regressor, PersistenceRoundTrip) {
  FeatureSpec spec;
  spec.width = 64;
  spec.descriptors = {"rings"};
  spec.mean = {1.0};
  spec.stdev = {0.5};
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = random_matrix(rng, 10, spec.length());
  TrainConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 3;
  auto model = Regressor::train(x, random_matrix(rng, 10, 1), HeadKind::Gaussian, cfg);
  model.set_feature_spec(spec);
  const auto path = temp_file("model.json");
  model.save(path);
  const auto back = Regressor::load(path);
  EXPECT_EQ(back.to_json().dump(), model.to_json().dump());
  const auto mol = chem::parse_smiles("c1ccccc1O");
  EXPECT_EQ(back.predict(mol).mu, model.predict(mol).mu);
  EXPECT_EQ(back.metadata().config.alpha, 0.2);

  auto j = model.to_json();
  j["version"] = 2;
  try {
    Regressor::from_json(j);
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_EQ(e.kind(), "UnsupportedVersion");
  }
  j = model.to_json();
  j["parameters"]["b1"] = std::vector<double>{1.0};
  EXPECT_THROW(Regressor::from_json(j), PredictorError);
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(Regressor::load(path), PredictorError);
  std::filesystem::remove(path);
}

TEST(Orbitals, PointModels) {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = (random_matrix(rng, 30, 12).array() > 0).cast<double>();
  TrainConfig cfg;
  cfg.hidden = 32;
  cfg.epochs = 500;
  cfg.batch_size = 8;
  cfg.learning_rate = 3e-3;
  cfg.dropout = 0.0;
  // Deliberately inverted levels: the models do not enforce homo < lumo.
  OrbitalModels m{Regressor::train(x, Eigen::VectorXd::Constant(30, -3.2), HeadKind::Point, cfg),
                  Regressor::train(x, Eigen::VectorXd::Constant(30, -5.4), HeadKind::Point, cfg)};
  EXPECT_TRUE(m.homo.parameters().w_lv.size() == 0);
  const Eigen::VectorXd probe = x.row(3).transpose();
  const auto [homo, lumo] = predict_homo_lumo(m, probe);
  EXPECT_NEAR(homo, -3.2, 0.1);
  EXPECT_NEAR(lumo, -5.4, 0.1);
  EXPECT_GT(homo, lumo);
  EXPECT_EQ(predict_homo_lumo(m, probe), std::make_pair(homo, lumo));
}

TEST(SaScore, MatchesReferenceFixtures) {
  for (const auto& row : fixtures::read_tsv("sascore_fixtures.tsv")) {
    const double got = sa_score(chem::parse_smiles(row[0]), reference_table());
    EXPECT_NEAR(got, std::stod(row[1]), 0.05) << row[0];
  }
}

TEST(SaScore, Examples) {
  const double ethanol = sa_score(chem::parse_smiles("CCO"), reference_table());
  EXPECT_GE(ethanol, 1.0);
  EXPECT_LE(ethanol, 3.0);
  const auto acceptor = chem::parse_smiles(
      "CCCCCCCCCCCc1c(/C=C2\\C(=O)c3cc(F)c(F)cc3C2=C(C#N)C#N)sc2c1sc1c2c2nsnc2c2c3sc4c(CCCCCCCCCCC)c(/"
      "C=C5\\C(=O)c6cc(F)c(F)cc6C5=C(C#N)C#N)sc4c3n(CC(CC)CCCC)c12");
  EXPECT_GT(sa_score(acceptor, reference_table()), ethanol);
}

TEST(SaScore, TermCountsMatchReference) {
  for (const auto& row : fixtures::read_tsv("sa_terms.tsv")) {
    const auto mol = chem::parse_smiles(row[0]);
    EXPECT_EQ(potential_stereocenters(mol).size(), std::stoul(row[1])) << row[0];
    EXPECT_EQ(spiro_atoms(mol).size(), std::stoul(row[2])) << row[0];
    EXPECT_EQ(bridgehead_atoms(mol).size(), std::stoul(row[3])) << row[0];
  }
}

TEST(SaScore, BoundedAndSpellingInvariant) {
  std::mt19937 rng(10);
  for (const auto& row : fixtures::read_jsonl("smiles_corpus.jsonl")) {
    chem::MoleculeGraph mol;
    try {
      mol = chem::parse_smiles(row.at("smiles").get<std::string>());
    } catch (const chem::ChemistryError&) {
      continue;
    }
    const double s = sa_score(mol, reference_table());
    ASSERT_GE(s, 1.0);
    ASSERT_LE(s, 10.0);
    std::vector<int> priority(static_cast<std::size_t>(mol.num_atoms()));
    std::iota(priority.begin(), priority.end(), 0);
    std::shuffle(priority.begin(), priority.end(), rng);
    const auto rewritten = chem::parse_smiles(chem::write_smiles(mol, priority));
    EXPECT_NEAR(sa_score(rewritten, reference_table()), s, 1e-12) << row.at("smiles");
  }
}

TEST(SaScoreTable, PlainAndCompressedFiles) {
  const auto plain = temp_file("table.tsv");
  const auto packed = temp_file("table.tsv.gz");
  std::ofstream(plain) << "# id\tscore\n2245384272\t-0.5\n2246728737\t0.25\n";
  gzFile gz = gzopen(packed.c_str(), "wb");
  const std::string body = "2245384272\t-0.5\n2246728737\t0.25";
  gzwrite(gz, body.data(), static_cast<unsigned>(body.size()));
  gzclose(gz);
  for (const auto& path : {plain, packed}) {
    const auto t = SaScoreTable::load(path);
    EXPECT_EQ(t.scores.size(), 2u);
    EXPECT_EQ(t.contribution(2246728737ULL), 0.25);
    EXPECT_EQ(t.contribution(1), -4.0);
    EXPECT_FALSE(t.approximate);
  }
  std::ofstream(plain) << "123 4.5\n";
  try {
    SaScoreTable::load(plain);
    FAIL();
  } catch (const PredictorError& e) {
    EXPECT_EQ(e.kind(), "BadTable");
  }
  EXPECT_THROW(SaScoreTable::load(temp_file("missing.tsv")), PredictorError);
  std::filesystem::remove(plain);
  std::filesystem::remove(packed);
}

TEST(SaScoreTable, CorpusFallback) {
  std::vector<chem::MoleculeGraph> corpus;
  for (const auto& r : retrieval::read_reference_csv(std::string(OSC_DATA_DIR) + "/demo/reference.csv").records) {
    corpus.push_back(chem::parse_smiles(r.smiles));
  }
  const auto table = SaScoreTable::from_corpus(corpus);
  EXPECT_TRUE(table.approximate);
  EXPECT_FALSE(table.scores.empty());
  double max_c = -1e9;
  for (const auto& [_, v] : table.scores) {
    ASSERT_TRUE(std::isfinite(v));
    max_c = std::max(max_c, v);
  }
  EXPECT_GT(max_c, 0.0);
  const double s = sa_score(corpus.front(), table);
  EXPECT_GE(s, 1.0);
  EXPECT_LE(s, 10.0);
}
