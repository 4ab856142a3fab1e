// SPDX-License-Identifier: Apache-2.0
#include "oscagent/predictor/features.hpp"

#include <cmath>

#include "oscagent/fp/fingerprint.hpp"
#include "oscagent/predictor/sascore.hpp"

namespace osc::predictor {

void FeatureSpec::validate() const {
  if (radius < 0 || radius > 6) throw PredictorError("InvalidSpec", "fingerprint radius must lie in [0, 6]");
  if (width < 64 || (width & (width - 1)) != 0) throw PredictorError("InvalidSpec", "width must be a power of two >= 64");
  for (const auto& d : descriptors) {
    if (d != "heavy_atoms" && d != "rings") throw PredictorError("InvalidSpec", "unknown descriptor '" + d + "'");
  }
  if (!mean.empty() || !stdev.empty()) {
    if (mean.size() != descriptors.size() || stdev.size() != descriptors.size()) {
      throw PredictorError("InvalidSpec", "descriptor statistics do not match the descriptor list");
    }
    for (double s : stdev) {
      if (!(s > 0.0) || !std::isfinite(s)) throw PredictorError("InvalidSpec", "descriptor stdev must be positive");
    }
  }
}

void FeatureSpec::fit(const std::vector<chem::MoleculeGraph>& mols) {
  validate();
  mean.assign(descriptors.size(), 0.0);
  stdev.assign(descriptors.size(), 1.0);
  if (mols.empty()) return;
  for (std::size_t k = 0; k < descriptors.size(); ++k) {
    double sum = 0.0, sq = 0.0;
    for (const auto& m : mols) {
      const double v = descriptor(m, descriptors[k]);
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(mols.size());
    mean[k] = sum / n;
    const double var = sq / n - mean[k] * mean[k];
    stdev[k] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
}

nlohmann::ordered_json FeatureSpec::to_json() const {
  nlohmann::ordered_json j;
  j["fingerprint"] = "morgan";
  j["radius"] = radius;
  j["width"] = width;
  j["descriptors"] = descriptors;
  j["mean"] = mean;
  j["stdev"] = stdev;
  return j;
}

FeatureSpec FeatureSpec::from_json(const nlohmann::json& j) {
  FeatureSpec s;
  if (j.value("fingerprint", "morgan") != "morgan") {
    throw PredictorError("InvalidSpec", "only Morgan feature specs are supported");
  }
  s.radius = j.at("radius").get<int>();
  s.width = j.at("width").get<int>();
  s.descriptors = j.at("descriptors").get<std::vector<std::string>>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stdev = j.at("stdev").get<std::vector<double>>();
  s.validate();
  return s;
}

double descriptor(const chem::MoleculeGraph& mol, const std::string& name) {
  if (name == "heavy_atoms") {
    int n = 0;
    for (const auto& a : mol.atoms()) n += a.atomic_number > 1 ? 1 : 0;
    return n;
  }
  if (name == "rings") return static_cast<double>(mol.ring_info().atom_rings.size());
  throw PredictorError("InvalidSpec", "unknown descriptor '" + name + "'");
}

Eigen::VectorXd featurize(const chem::MoleculeGraph& mol, const FeatureSpec& spec) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.length());
  for (int bit : fp::morgan_fingerprint(mol, spec.radius, spec.width).on_bits()) x[bit] = 1.0;
  for (std::size_t k = 0; k < spec.descriptors.size(); ++k) {
    double v = descriptor(mol, spec.descriptors[k]);
    if (!spec.mean.empty()) v = (v - spec.mean[k]) / spec.stdev[k];
    x[spec.width + static_cast<Eigen::Index>(k)] = v;
  }
  return x;
}

}  // namespace osc::predictor
