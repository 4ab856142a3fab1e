// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "oscagent/chem/molecule.hpp"

namespace osc::predictor {

/// Morgan bits (0/1) followed by optional scalar descriptors, which are
/// z-scored with the stored statistics.
struct FeatureSpec {
  int radius = 2;
  int width = 2048;
  std::vector<std::string> descriptors;  // any of "heavy_atoms", "rings"
  std::vector<double> mean;              // one per descriptor
  std::vector<double> stdev;

  int length() const { return width + static_cast<int>(descriptors.size()); }
  void validate() const;

  /// Learns descriptor statistics from a training corpus.
  void fit(const std::vector<chem::MoleculeGraph>& mols);

  nlohmann::ordered_json to_json() const;
  static FeatureSpec from_json(const nlohmann::json& j);
  bool operator==(const FeatureSpec&) const = default;
};

/// Raw descriptor value before standardization.
double descriptor(const chem::MoleculeGraph& mol, const std::string& name);

Eigen::VectorXd featurize(const chem::MoleculeGraph& mol, const FeatureSpec& spec);

}  // namespace osc::predictor
