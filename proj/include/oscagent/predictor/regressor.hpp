// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "oscagent/chem/molecule.hpp"
#include "oscagent/predictor/features.hpp"

namespace osc::predictor {

/// Gaussian: mean and log-variance heads, trained on the fine-tuning
/// objective. Point: mean head only, trained on MSE.
enum class HeadKind { Gaussian, Point };

struct TrainConfig {
  int hidden = 768;
  double dropout = 0.3;
  double learning_rate = 3e-4;
  int batch_size = 128;
  double weight_decay = 5e-5;
  double alpha = 0.2;
  int epochs = 200;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  int epochs = 0;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
  double train_mae = 0.0;
  std::string optimizer = "adam";
  TrainConfig config;
};

struct ModelOutput {
  double mu = 0.0;
  double sigma = 0.0;
};

/// input -> hidden (SiLU, dropout during training) -> heads.
struct Parameters {
  Eigen::MatrixXd w1;    // hidden x input
  Eigen::VectorXd b1;    // hidden
  Eigen::VectorXd w_mu;  // hidden
  Eigen::VectorXd b_mu;  // 1
  Eigen::VectorXd w_lv;  // hidden; empty for point models
  Eigen::VectorXd b_lv;  // 1 or empty

  Eigen::Index count() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

class Regressor {
 public:
  Regressor() = default;
  /// Fresh, randomly initialised network.
  Regressor(HeadKind kind, int input_dim, int hidden, std::uint64_t seed);

  HeadKind kind() const { return kind_; }
  int input_dim() const { return static_cast<int>(params_.w1.cols()); }
  int hidden() const { return static_cast<int>(params_.w1.rows()); }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }
  const TrainingMetadata& metadata() const { return meta_; }
  const std::optional<FeatureSpec>& feature_spec() const { return spec_; }
  void set_feature_spec(FeatureSpec spec) { spec_ = std::move(spec); }

  /// Inference with dropout off. Throws SpecMismatch on a wrong length.
  ModelOutput predict(const Eigen::VectorXd& x) const;
  /// Featurizes with the stored spec first.
  ModelOutput predict(const chem::MoleculeGraph& mol) const;

  /// Batch objective and its gradient with respect to every parameter.
  /// `dropout_mask` (batch x hidden, already scaled) may be empty.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                           const Eigen::MatrixXd& dropout_mask, Parameters* grad) const;

  /// Minibatch Adam on the head's objective, L2 weight decay added to the
  /// gradient. Targets must be finite and at least two.
  static Regressor train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, HeadKind kind,
                         const TrainConfig& cfg = {});

  nlohmann::ordered_json to_json() const;
  static Regressor from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Regressor load(const std::string& path);

 private:
  HeadKind kind_ = HeadKind::Gaussian;
  Parameters params_;
  TrainingMetadata meta_;
  std::optional<FeatureSpec> spec_;
};

/// Point regressors for the frontier orbital energies.
struct OrbitalModels {
  Regressor homo;
  Regressor lumo;
};

/// (homo, lumo) in eV, unclamped.
std::pair<double, double> predict_homo_lumo(const OrbitalModels& models, const Eigen::VectorXd& x);

}  // namespace osc::predictor
