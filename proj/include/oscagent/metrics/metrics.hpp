// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscagent/chem/molecule.hpp"
#include "oscagent/fp/fingerprint.hpp"

namespace osc::metrics {

class MetricsError : public std::runtime_error {
 public:
  MetricsError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// c / (a + b - c). Two empty fingerprints count as identical.
double tanimoto(const fp::Fingerprint& x, const fp::Fingerprint& y);

struct GeneratedMolecule {
  std::string smiles;
  std::optional<chem::MoleculeGraph> graph;  // empty when parsing failed
  std::optional<std::string> canonical;
  std::optional<double> pce;
  std::optional<double> sascore;

  bool parsed() const { return graph.has_value(); }
};

struct GenerationSet {
  std::vector<GeneratedMolecule> molecules;

  /// Parses `smiles`; failures are kept as unparsed entries.
  GeneratedMolecule& add(const std::string& smiles, std::optional<double> pce = std::nullopt,
                         std::optional<double> sascore = std::nullopt);
  std::size_t size() const { return molecules.size(); }
};

struct Thresholds {
  double pce_min = 10.0;  // valid requires pce > pce_min
  double sa_max = 8.0;    // valid requires sascore < sa_max
};

bool is_valid(const GeneratedMolecule& m, const Thresholds& t = {});

struct ValidityReport {
  std::size_t generated = 0;
  std::size_t valid = 0;
  /// Parsed molecules with a missing pce or sascore; counted invalid.
  std::vector<std::size_t> missing_predictions;

  double rate() const { return static_cast<double>(valid) / static_cast<double>(generated); }
};

double uniqueness(const GenerationSet& g);
/// Per-instance: duplicates of a novel molecule each count.
double novelty(const GenerationSet& g, const std::set<std::string>& reference_canonical);
ValidityReport validity(const GenerationSet& g, const Thresholds& t = {});
double validity_rate(const GenerationSet& g, const Thresholds& t = {});
double avg_pce(const GenerationSet& g, const Thresholds& t = {});

}  // namespace osc::metrics
