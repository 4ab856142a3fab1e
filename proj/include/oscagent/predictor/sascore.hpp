// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "oscagent/chem/molecule.hpp"

namespace osc::predictor {

class PredictorError : public std::runtime_error {
 public:
  PredictorError(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Fragment contributions keyed by unfolded radius-2 environment id.
struct SaScoreTable {
  std::unordered_map<std::uint64_t, double> scores;
  double default_contribution = -4.0;
  /// Set for tables estimated from a local corpus rather than loaded.
  bool approximate = false;

  /// Reads `fragment_id<TAB>score` lines; gzip-compressed files are
  /// detected and inflated transparently. Lines starting with '#' are skipped.
  static SaScoreTable load(const std::string& path);

  /// Estimates contributions as log10(count / c80), where c80 is the count of
  /// the fragment at which the most frequent fragments reach 80% of all
  /// occurrences in the corpus.
  static SaScoreTable from_corpus(const std::vector<chem::MoleculeGraph>& corpus);

  double contribution(std::uint64_t id) const;
};

/// Breakdown of one score, mostly for diagnostics.
struct SaScoreTerms {
  double fragment_score = 0.0;
  double size_penalty = 0.0;
  double stereo_penalty = 0.0;
  double spiro_penalty = 0.0;
  double bridge_penalty = 0.0;
  double macrocycle_penalty = 0.0;
  double symmetry_correction = 0.0;
  int heavy_atoms = 0;
  int stereo_centers = 0;
  int spiro_atoms = 0;
  int bridgehead_atoms = 0;
  double value = 10.0;
};

SaScoreTerms sa_score_terms(const chem::MoleculeGraph& mol, const SaScoreTable& table);

/// Synthetic accessibility in [1, 10]; 1 is easy.
double sa_score(const chem::MoleculeGraph& mol, const SaScoreTable& table);

/// Atoms that could carry tetrahedral stereo: a tetrahedral-capable centre
/// whose neighbors (hydrogen included) are pairwise symmetry-distinct.
std::vector<int> potential_stereocenters(const chem::MoleculeGraph& mol);

/// Atoms shared by exactly one atom between two smallest rings.
std::vector<int> spiro_atoms(const chem::MoleculeGraph& mol);

/// End atoms of the bond path shared by two smallest rings that have more
/// than one bond in common.
std::vector<int> bridgehead_atoms(const chem::MoleculeGraph& mol);

}  // namespace osc::predictor
