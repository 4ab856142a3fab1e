// SPDX-License-Identifier: Apache-2.0
#include "oscagent/metrics/metrics.hpp"

#include <bit>
#include <utility>

#include "oscagent/chem/smiles.hpp"

namespace osc::metrics {
namespace {

void require_nonempty(const GenerationSet& g) {
  if (g.molecules.empty()) throw MetricsError("EmptySet", "generation set is empty");
}

}  // namespace

double tanimoto(const fp::Fingerprint& x, const fp::Fingerprint& y) {
  if (x.width() != y.width() || x.kind() != y.kind()) {
    throw MetricsError("WidthMismatch", "fingerprints differ in width or kind (" +
                                            std::to_string(x.width()) + " vs " +
                                            std::to_string(y.width()) + ")");
  }
  long a = 0, b = 0, c = 0;
  const auto& wx = x.words();
  const auto& wy = y.words();
  for (std::size_t i = 0; i < wx.size(); ++i) {
    a += std::popcount(wx[i]);
    b += std::popcount(wy[i]);
    c += std::popcount(wx[i] & wy[i]);
  }
  if (a + b == 0) return 1.0;
  return static_cast<double>(c) / static_cast<double>(a + b - c);
}

GeneratedMolecule& GenerationSet::add(const std::string& smiles, std::optional<double> pce,
                                      std::optional<double> sascore) {
  GeneratedMolecule m;
  m.smiles = smiles;
  m.pce = pce;
  m.sascore = sascore;
  try {
    m.graph = chem::parse_smiles(smiles);
    m.canonical = chem::canonicalize(*m.graph);
  } catch (const chem::ChemistryError&) {
    m.graph.reset();
    m.canonical.reset();
  }
  molecules.push_back(std::move(m));
  return molecules.back();
}

bool is_valid(const GeneratedMolecule& m, const Thresholds& t) {
  return m.parsed() && m.pce && m.sascore && *m.pce > t.pce_min && *m.sascore < t.sa_max;
}

double uniqueness(const GenerationSet& g) {
  require_nonempty(g);
  // Unparsed entries fall back to their raw text; the flag keeps the two
  // namespaces apart.
  std::set<std::pair<bool, std::string>> seen;
  for (const auto& m : g.molecules) {
    seen.emplace(m.canonical.has_value(), m.canonical.value_or(m.smiles));
  }
  return static_cast<double>(seen.size()) / static_cast<double>(g.size());
}

double novelty(const GenerationSet& g, const std::set<std::string>& reference_canonical) {
  require_nonempty(g);
  std::size_t novel = 0;
  for (const auto& m : g.molecules) {
    if (m.canonical && !reference_canonical.count(*m.canonical)) ++novel;
  }
  return static_cast<double>(novel) / static_cast<double>(g.size());
}

ValidityReport validity(const GenerationSet& g, const Thresholds& t) {
  require_nonempty(g);
  ValidityReport r;
  r.generated = g.size();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& m = g.molecules[i];
    if (m.parsed() && (!m.pce || !m.sascore)) r.missing_predictions.push_back(i);
    if (is_valid(m, t)) ++r.valid;
  }
  return r;
}

double validity_rate(const GenerationSet& g, const Thresholds& t) { return validity(g, t).rate(); }

double avg_pce(const GenerationSet& g, const Thresholds& t) {
  require_nonempty(g);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : g.molecules) {
    if (!is_valid(m, t)) continue;
    sum += *m.pce;
    ++n;
  }
  if (n == 0) throw MetricsError("NoValidMolecules", "no valid molecules to average");
  return sum / static_cast<double>(n);
}

}  // namespace osc::metrics
