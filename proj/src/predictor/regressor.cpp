// SPDX-License-Identifier: Apache-2.0
#include "oscagent/predictor/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "oscagent/losses/losses.hpp"
#include "oscagent/predictor/sascore.hpp"

namespace osc::predictor {
namespace {

constexpr int kFormatVersion = 1;

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

template <class F>
void for_each_block(Parameters& p, F&& f) {
  f(p.w1.data(), p.w1.size());
  f(p.b1.data(), p.b1.size());
  f(p.w_mu.data(), p.w_mu.size());
  f(p.b_mu.data(), p.b_mu.size());
  f(p.w_lv.data(), p.w_lv.size());
  f(p.b_lv.data(), p.b_lv.size());
}

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out.data(), m.rows(), m.cols()) = m;
  return out;
}

Eigen::VectorXd vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string head_name(HeadKind k) { return k == HeadKind::Gaussian ? "gaussian" : "point"; }

}  // namespace

void TrainConfig::validate() const {
  if (hidden < 1) throw PredictorError("InvalidConfig", "hidden width must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw PredictorError("InvalidConfig", "dropout must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw PredictorError("InvalidConfig", "learning rate must be positive");
  if (batch_size < 1 || epochs < 1) throw PredictorError("InvalidConfig", "batch size and epochs must be positive");
  if (!(weight_decay >= 0.0)) throw PredictorError("InvalidConfig", "weight decay must be non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw PredictorError("InvalidConfig", "alpha must lie in [0, 1]");
}

Eigen::Index Parameters::count() const {
  return w1.size() + b1.size() + w_mu.size() + b_mu.size() + w_lv.size() + b_lv.size();
}

Eigen::VectorXd Parameters::flatten() const {
  Eigen::VectorXd flat(count());
  Eigen::Index at = 0;
  for_each_block(const_cast<Parameters&>(*this), [&](double* d, Eigen::Index n) {
    flat.segment(at, n) = Eigen::Map<const Eigen::VectorXd>(d, n);
    at += n;
  });
  return flat;
}

void Parameters::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != count()) throw PredictorError("BadModel", "parameter vector has the wrong length");
  Eigen::Index at = 0;
  for_each_block(*this, [&](double* d, Eigen::Index n) {
    Eigen::Map<Eigen::VectorXd>(d, n) = flat.segment(at, n);
    at += n;
  });
}

Regressor::Regressor(HeadKind kind, int input_dim, int hidden, std::uint64_t seed) : kind_(kind) {
  if (input_dim < 1 || hidden < 1) throw PredictorError("InvalidConfig", "network dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto fill = [&](double* d, Eigen::Index n, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = u(rng);
  };
  params_.w1.resize(hidden, input_dim);
  params_.b1.resize(hidden);
  params_.w_mu.resize(hidden);
  params_.b_mu.resize(1);
  fill(params_.w1.data(), params_.w1.size(), input_dim);
  fill(params_.b1.data(), params_.b1.size(), input_dim);
  fill(params_.w_mu.data(), hidden, hidden);
  fill(params_.b_mu.data(), 1, hidden);
  if (kind == HeadKind::Gaussian) {
    params_.w_lv.resize(hidden);
    params_.b_lv.resize(1);
    fill(params_.w_lv.data(), hidden, hidden);
    fill(params_.b_lv.data(), 1, hidden);
  }
  meta_.seed = seed;
}

ModelOutput Regressor::predict(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw PredictorError("SpecMismatch", "feature vector has length " + std::to_string(x.size()) +
                                             ", model expects " + std::to_string(input_dim()));
  }
  const Eigen::ArrayXd z = (params_.w1 * x + params_.b1).array();
  const Eigen::VectorXd a = (z / (1.0 + (-z).exp())).matrix();
  ModelOutput out;
  out.mu = a.dot(params_.w_mu) + params_.b_mu[0];
  if (kind_ == HeadKind::Gaussian) {
    // Clamped so that sigma stays a positive normal number.
    const double lv = std::clamp(a.dot(params_.w_lv) + params_.b_lv[0], -40.0, 40.0);
    out.sigma = std::exp(0.5 * lv);
  } else {
    out.sigma = std::max(meta_.train_mae, 1e-12);
  }
  return out;
}

ModelOutput Regressor::predict(const chem::MoleculeGraph& mol) const {
  if (!spec_) throw PredictorError("SpecMismatch", "model carries no feature spec");
  return predict(featurize(mol, *spec_));
}

double Regressor::loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                                    const Eigen::MatrixXd& dropout_mask, Parameters* grad) const {
  const Eigen::ArrayXXd z = ((x * params_.w1.transpose()).rowwise() + params_.b1.transpose()).array();
  const Eigen::ArrayXXd sg = sigmoid(z);
  Eigen::ArrayXXd a = z * sg;
  if (dropout_mask.size() > 0) a *= dropout_mask.array();
  const Eigen::MatrixXd am = a.matrix();
  const Eigen::VectorXd mu = (am * params_.w_mu).array() + params_.b_mu[0];

  double value = 0.0;
  Eigen::VectorXd d_mu, d_lv;
  if (kind_ == HeadKind::Gaussian) {
    const Eigen::VectorXd lv = (am * params_.w_lv).array() + params_.b_lv[0];
    losses::LossWeights w;
    w.alpha = alpha;
    const auto g = losses::finetune_objective_grad({y, mu, lv}, w);
    value = g.value;
    d_mu = g.d_means;
    d_lv = g.d_log_variances;
  } else {
    const auto g = losses::mse_grad(y, mu);
    value = g.value;
    d_mu = g.d_predictions;
  }
  if (grad == nullptr) return value;

  grad->w_mu = am.transpose() * d_mu;
  grad->b_mu = Eigen::VectorXd::Constant(1, d_mu.sum());
  Eigen::MatrixXd d_a = d_mu * params_.w_mu.transpose();
  if (kind_ == HeadKind::Gaussian) {
    grad->w_lv = am.transpose() * d_lv;
    grad->b_lv = Eigen::VectorXd::Constant(1, d_lv.sum());
    d_a += d_lv * params_.w_lv.transpose();
  } else {
    grad->w_lv.resize(0);
    grad->b_lv.resize(0);
  }
  Eigen::ArrayXXd d_z = d_a.array();
  if (dropout_mask.size() > 0) d_z *= dropout_mask.array();
  d_z *= sg * (1.0 + z * (1.0 - sg));  // SiLU derivative
  grad->w1 = d_z.matrix().transpose() * x;
  grad->b1 = d_z.colwise().sum().transpose();
  return value;
}

Regressor Regressor::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, HeadKind kind, const TrainConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = x.rows();
  if (n < 2) throw PredictorError("TooFewSamples", "training needs at least two samples");
  if (y.size() != n) throw PredictorError("ShapeMismatch", "feature rows and targets differ in count");
  if (!y.allFinite() || !x.allFinite()) throw PredictorError("NonFiniteInput", "training data must be finite");

  Regressor model(kind, static_cast<int>(x.cols()), cfg.hidden, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  std::bernoulli_distribution keep(1.0 - cfg.dropout);
  const double keep_scale = 1.0 / (1.0 - cfg.dropout);

  Eigen::VectorXd theta = model.params_.flatten();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Parameters grad;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd xb(b, x.cols());
      Eigen::VectorXd yb(b);
      for (Eigen::Index r = 0; r < b; ++r) {
        xb.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);
        yb[r] = y[order[static_cast<std::size_t>(start + r)]];
      }
      Eigen::MatrixXd mask;
      if (cfg.dropout > 0.0) {
        mask.resize(b, cfg.hidden);
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? keep_scale : 0.0;
      }
      const double loss = model.loss_and_gradient(xb, yb, cfg.alpha, mask, &grad);
      if (!std::isfinite(loss)) {
        throw PredictorError("NonFiniteLoss", "loss became non-finite at epoch " + std::to_string(epoch) +
                                                  ", batch starting at sample " + std::to_string(start) +
                                                  "; try a lower learning rate");
      }
      epoch_sum += loss * static_cast<double>(b);

      ++step;
      const Eigen::VectorXd g = grad.flatten() + cfg.weight_decay * theta;
      m1 = beta1 * m1 + (1.0 - beta1) * g;
      m2 = beta2 * m2 + (1.0 - beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      theta.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
      model.params_.assign(theta);
    }
    model.meta_.epoch_losses.push_back(epoch_sum / static_cast<double>(n));
  }

  model.meta_.seed = cfg.seed;
  model.meta_.epochs = cfg.epochs;
  model.meta_.final_loss = model.meta_.epoch_losses.back();
  model.meta_.config = cfg;
  double abs_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) abs_sum += std::abs(model.predict(Eigen::VectorXd(x.row(i).transpose())).mu - y[i]);
  model.meta_.train_mae = abs_sum / static_cast<double>(n);
  return model;
}

nlohmann::ordered_json Regressor::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "oscagent-regressor";
  j["version"] = kFormatVersion;
  j["head"] = head_name(kind_);
  j["activation"] = "silu";
  j["input_dim"] = input_dim();
  j["hidden"] = hidden();
  j["feature_spec"] = spec_ ? spec_->to_json() : nlohmann::ordered_json();
  auto& p = j["parameters"];
  p["w1"] = row_major(params_.w1);
  p["b1"] = std::vector<double>(params_.b1.data(), params_.b1.data() + params_.b1.size());
  p["w_mu"] = std::vector<double>(params_.w_mu.data(), params_.w_mu.data() + params_.w_mu.size());
  p["b_mu"] = params_.b_mu[0];
  if (kind_ == HeadKind::Gaussian) {
    p["w_lv"] = std::vector<double>(params_.w_lv.data(), params_.w_lv.data() + params_.w_lv.size());
    p["b_lv"] = params_.b_lv[0];
  }
  auto& m = j["metadata"];
  m["seed"] = meta_.seed;
  m["epochs"] = meta_.epochs;
  m["final_loss"] = meta_.final_loss;
  m["train_mae"] = meta_.train_mae;
  m["epoch_losses"] = meta_.epoch_losses;
  m["optimizer"] = meta_.optimizer;
  const auto& c = meta_.config;
  m["config"] = {{"hidden", c.hidden},         {"dropout", c.dropout},
                 {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
                 {"weight_decay", c.weight_decay},   {"alpha", c.alpha},
                 {"epochs", c.epochs},               {"seed", c.seed}};
  return j;
}

Regressor Regressor::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "oscagent-regressor") throw PredictorError("BadModel", "not a regressor file");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw PredictorError("UnsupportedVersion", "model format version " + j.at("version").dump() + " is not supported");
    }
    const auto head = j.at("head").get<std::string>();
    if (head != "gaussian" && head != "point") throw PredictorError("BadModel", "unknown head '" + head + "'");
    Regressor r;
    r.kind_ = head == "gaussian" ? HeadKind::Gaussian : HeadKind::Point;
    const int in = j.at("input_dim").get<int>();
    const int hid = j.at("hidden").get<int>();
    const auto& p = j.at("parameters");
    const auto w1 = p.at("w1").get<std::vector<double>>();
    if (w1.size() != static_cast<std::size_t>(in) * static_cast<std::size_t>(hid)) {
      throw PredictorError("BadModel", "w1 has the wrong size");
    }
    r.params_.w1 = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w1.data(), hid, in);
    r.params_.b1 = vec(p.at("b1"));
    r.params_.w_mu = vec(p.at("w_mu"));
    r.params_.b_mu = Eigen::VectorXd::Constant(1, p.at("b_mu").get<double>());
    if (r.kind_ == HeadKind::Gaussian) {
      r.params_.w_lv = vec(p.at("w_lv"));
      r.params_.b_lv = Eigen::VectorXd::Constant(1, p.at("b_lv").get<double>());
    }
    if (r.params_.b1.size() != hid || r.params_.w_mu.size() != hid ||
        (r.kind_ == HeadKind::Gaussian && r.params_.w_lv.size() != hid)) {
      throw PredictorError("BadModel", "head sizes do not match the hidden width");
    }
    if (!r.params_.flatten().allFinite()) throw PredictorError("BadModel", "non-finite parameters");
    if (!j.at("feature_spec").is_null()) {
      r.spec_ = FeatureSpec::from_json(j.at("feature_spec"));
      if (r.spec_->length() != in) throw PredictorError("BadModel", "feature spec length differs from input_dim");
    }
    const auto& m = j.at("metadata");
    r.meta_.seed = m.at("seed").get<std::uint64_t>();
    r.meta_.epochs = m.at("epochs").get<int>();
    r.meta_.final_loss = m.at("final_loss").get<double>();
    r.meta_.train_mae = m.at("train_mae").get<double>();
    r.meta_.epoch_losses = m.at("epoch_losses").get<std::vector<double>>();
    r.meta_.optimizer = m.at("optimizer").get<std::string>();
    const auto& c = m.at("config");
    r.meta_.config.hidden = c.at("hidden").get<int>();
    r.meta_.config.dropout = c.at("dropout").get<double>();
    r.meta_.config.learning_rate = c.at("learning_rate").get<double>();
    r.meta_.config.batch_size = c.at("batch_size").get<int>();
    r.meta_.config.weight_decay = c.at("weight_decay").get<double>();
    r.meta_.config.alpha = c.at("alpha").get<double>();
    r.meta_.config.epochs = c.at("epochs").get<int>();
    r.meta_.config.seed = c.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw PredictorError("BadModel", std::string("malformed model file: ") + e.what());
  }
}

void Regressor::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PredictorError("IoError", "cannot write " + tmp);
    out << to_json().dump() << '\n';
    if (!out) throw PredictorError("IoError", "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw PredictorError("IoError", "cannot replace " + path + ": " + ec.message());
}

Regressor Regressor::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PredictorError("IoError", "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw PredictorError("BadModel", path + ": " + e.what());
  }
  return from_json(j);
}

std::pair<double, double> predict_homo_lumo(const OrbitalModels& models, const Eigen::VectorXd& x) {
  return {models.homo.predict(x).mu, models.lumo.predict(x).mu};
}

}  // namespace osc::predictor
