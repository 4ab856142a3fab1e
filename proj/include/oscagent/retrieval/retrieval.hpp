// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oscagent/fp/fingerprint.hpp"

namespace osc::retrieval {

class RetrievalError : public std::runtime_error {
 public:
  RetrievalError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct MoleculeRecord {
  std::string smiles;
  double pce = 0.0;      // percent
  double sascore = 1.0;  // [1, 10]
  double homo = 0.0;     // eV
  double lumo = 0.0;     // eV

  /// Empty when the record is usable, otherwise the first violated rule.
  std::optional<std::string> problem() const;
};

struct OrbitalPolicy {
  double homo_min = -6.0;
  double homo_max = -5.0;
  double lumo_min = -4.5;
  double lumo_max = -3.0;
  double gamma = 3.0;  // reward inside both windows
  double delta = 3.0;  // penalty otherwise

  void validate() const;
};

struct ScoredCandidate {
  MoleculeRecord record;
  double pce_sigma = 0.0;
  double orbital_reward = 0.0;
  double score = 0.0;
  int iteration = 0;
  std::int64_t timestamp = 0;  // logical clock supplied by the caller

  /// Recomputes pce - sascore + orbital_reward and compares exactly.
  bool score_identity_holds() const;
  /// score with pce replaced by pce - pce_sigma.
  double risk_adjusted_score() const;
};

/// +gamma when homo and lumo both sit inside their windows (bounds
/// included), -delta otherwise.
double orbital_feasibility(double homo, double lumo, const OrbitalPolicy& policy = {});

ScoredCandidate composite_score(const MoleculeRecord& rec, const OrbitalPolicy& policy = {},
                                double pce_sigma = 0.0);

/// 1 - Tanimoto over a set of fingerprints. Symmetric, zero diagonal.
struct DistanceMatrix {
  Eigen::MatrixXd values;

  static DistanceMatrix from_fingerprints(const std::vector<fp::Fingerprint>& fps);
  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

struct RetrievalConfig {
  std::size_t k_reference = 5;
  std::size_t k_candidate = 3;
  std::uint64_t seed = 0;
};

/// SplitMix64 step; the generator behind every seeded choice here.
std::uint64_t splitmix64(std::uint64_t x);

/// First K-center pick: splitmix64(seed) mod n.
std::size_t seeded_first_index(std::uint64_t seed, std::size_t n);

/// delta_j = min(delta_j, row_j).
void update_min_distance(Eigen::VectorXd& delta, const Eigen::VectorXd& row);

/// Greedy K-center from a fixed first pick; ties go to the lowest index.
std::vector<std::size_t> kcenter_greedy(const DistanceMatrix& d, std::size_t first, std::size_t k);

struct Selection {
  std::vector<std::size_t> indices;   // into the input database, in pick order
  std::vector<std::size_t> excluded;  // records skipped as unparsable
  std::size_t first_local = 0;        // seeded pick among the usable records
};

/// Morgan radius 2 / 2048 bits, Tanimoto distance, seeded greedy K-center.
Selection kcenter_select(const std::vector<MoleculeRecord>& db, const RetrievalConfig& cfg);

struct IngestReport {
  std::vector<MoleculeRecord> records;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // line number, reason
};

/// Reads `smiles,pce,sascore,homo,lumo` (header required). SMILES are
/// canonicalized; rows breaking a record rule are reported, not loaded.
IngestReport read_reference_csv(const std::string& path);

}  // namespace osc::retrieval
