// SPDX-License-Identifier: Apache-2.0
#include "oscagent/predictor/sascore.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "oscagent/chem/smiles.hpp"
#include "oscagent/fp/fingerprint.hpp"

namespace osc::predictor {
namespace {

bool all_single(const chem::MoleculeGraph& mol, int atom) {
  for (const auto& nb : mol.neighbors(atom)) {
    if (mol.bond(nb.bond).order != chem::BondOrder::Single) return false;
  }
  return true;
}

// A neighbor with a multiple bond flattens the atom.
bool conjugated(const chem::MoleculeGraph& mol, int atom) {
  for (const auto& nb : mol.neighbors(atom)) {
    if (!all_single(mol, nb.atom)) return true;
  }
  return false;
}

bool in_ring_of_size(const chem::MoleculeGraph& mol, int atom, std::size_t size) {
  for (const auto& ring : mol.ring_info().atom_rings) {
    if (ring.size() == size && std::find(ring.begin(), ring.end(), atom) != ring.end()) return true;
  }
  return false;
}

// Phosphorus and arsenic centres are judged on their heavy neighbors alone,
// whatever their hydrogen count.
bool ignores_hydrogens(int z) { return z == 15 || z == 33; }

bool tetrahedral_capable(const chem::MoleculeGraph& mol, int i) {
  const auto& a = mol.atom(i);
  const int h = a.total_h();
  const int coord = mol.degree(i) + h;
  if (ignores_hydrogens(a.atomic_number)) return coord == 3 || coord == 4;
  if (h > 1) return false;
  switch (a.atomic_number) {
    case 6:
    case 14:
    case 32:
    case 50:
      return coord == 4 && all_single(mol, i);
    case 7:
      if (coord == 4 && a.formal_charge == 1) return all_single(mol, i);
      return coord == 3 && h == 0 && a.formal_charge == 0 && in_ring_of_size(mol, i, 3) && !conjugated(mol, i);
    case 16:
    case 34:
      return (coord == 3 || coord == 4) && h == 0;
    default:
      return false;
  }
}

}  // namespace

SaScoreTable SaScoreTable::load(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");  // plain files pass through unchanged
  if (f == nullptr) throw PredictorError("IoError", "cannot open SA table " + path);
  SaScoreTable table;
  std::string line;
  char buf[4096];
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    gzclose(f);
    throw PredictorError("BadTable", path + ":" + std::to_string(line_no) + ": " + why);
  };
  while (gzgets(f, buf, sizeof buf) != nullptr) {
    line += buf;
    if (line.empty() || (line.back() != '\n' && !gzeof(f))) continue;
    ++line_no;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty() || line[0] == '#') {
      line.clear();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail("expected fragment_id<TAB>score");
    std::uint64_t id = 0;
    double score = 0.0;
    const char* end = line.data() + line.size();
    const auto r1 = std::from_chars(line.data(), line.data() + tab, id);
    const auto r2 = std::from_chars(line.data() + tab + 1, end, score);
    if (r1.ec != std::errc() || r1.ptr != line.data() + tab || r2.ec != std::errc() || r2.ptr != end ||
        !std::isfinite(score)) {
      fail("malformed entry");
    }
    table.scores[id] = score;
    line.clear();
  }
  gzclose(f);
  if (table.scores.empty()) throw PredictorError("BadTable", path + " holds no fragment scores");
  return table;
}

SaScoreTable SaScoreTable::from_corpus(const std::vector<chem::MoleculeGraph>& corpus) {
  std::map<std::uint64_t, long long> counts;
  long long total = 0;
  for (const auto& mol : corpus) {
    for (const auto& [id, c] : fp::fragment_bag(mol, 2).counts) {
      counts[id] += c;
      total += c;
    }
  }
  SaScoreTable table;
  table.approximate = true;
  if (counts.empty()) return table;
  std::vector<long long> sorted;
  for (const auto& [_, c] : counts) sorted.push_back(c);
  std::sort(sorted.rbegin(), sorted.rend());
  long long running = 0;
  long long c80 = sorted.back();
  for (long long c : sorted) {
    running += c;
    if (running * 5 >= total * 4) {
      c80 = c;
      break;
    }
  }
  for (const auto& [id, c] : counts) {
    table.scores[id] = std::log10(static_cast<double>(c) / static_cast<double>(c80));
  }
  return table;
}

double SaScoreTable::contribution(std::uint64_t id) const {
  const auto it = scores.find(id);
  return it == scores.end() ? default_contribution : it->second;
}

std::vector<int> potential_stereocenters(const chem::MoleculeGraph& mol) {
  const auto cls = chem::symmetry_classes(mol);
  std::vector<int> out;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (!tetrahedral_capable(mol, i)) continue;
    std::set<int> seen;
    bool distinct = true;
    if (mol.atom(i).total_h() == 1 && !ignores_hydrogens(mol.atom(i).atomic_number)) seen.insert(-1);
    for (const auto& nb : mol.neighbors(i)) {
      distinct = distinct && seen.insert(cls[static_cast<std::size_t>(nb.atom)]).second;
    }
    if (distinct) out.push_back(i);
  }
  return out;
}

std::vector<int> spiro_atoms(const chem::MoleculeGraph& mol) {
  const auto& rings = mol.ring_info().atom_rings;
  std::set<int> out;
  for (std::size_t a = 0; a < rings.size(); ++a) {
    const std::set<int> ra(rings[a].begin(), rings[a].end());
    for (std::size_t b = a + 1; b < rings.size(); ++b) {
      std::vector<int> shared;
      for (int atom : rings[b]) {
        if (ra.count(atom)) shared.push_back(atom);
      }
      if (shared.size() == 1) out.insert(shared.front());
    }
  }
  return {out.begin(), out.end()};
}

std::vector<int> bridgehead_atoms(const chem::MoleculeGraph& mol) {
  const auto& rings = mol.ring_info().bond_rings;
  std::set<int> out;
  for (std::size_t a = 0; a < rings.size(); ++a) {
    const std::set<int> ra(rings[a].begin(), rings[a].end());
    for (std::size_t b = a + 1; b < rings.size(); ++b) {
      std::vector<int> shared;
      for (int bond : rings[b]) {
        if (ra.count(bond)) shared.push_back(bond);
      }
      if (shared.size() < 2) continue;
      std::map<int, int> ends;
      for (int bond : shared) {
        ++ends[mol.bond(bond).begin];
        ++ends[mol.bond(bond).end];
      }
      for (const auto& [atom, n] : ends) {
        if (n == 1) out.insert(atom);
      }
    }
  }
  return {out.begin(), out.end()};
}

SaScoreTerms sa_score_terms(const chem::MoleculeGraph& mol, const SaScoreTable& table) {
  SaScoreTerms t;
  if (mol.num_atoms() == 0) return t;
  const auto bag = fp::fragment_bag(mol, 2);
  double sum = 0.0;
  for (const auto& [id, c] : bag.counts) sum += table.contribution(id) * c;
  t.fragment_score = sum / bag.total();

  const int n = mol.num_atoms();
  t.heavy_atoms = n;
  t.stereo_centers = static_cast<int>(potential_stereocenters(mol).size());
  t.spiro_atoms = static_cast<int>(spiro_atoms(mol).size());
  t.bridgehead_atoms = static_cast<int>(bridgehead_atoms(mol).size());
  t.size_penalty = std::pow(n, 1.005) - n;
  t.stereo_penalty = std::log10(t.stereo_centers + 1.0);
  t.spiro_penalty = std::log10(t.spiro_atoms + 1.0);
  t.bridge_penalty = std::log10(t.bridgehead_atoms + 1.0);
  const bool macrocycle = std::any_of(mol.ring_info().atom_rings.begin(), mol.ring_info().atom_rings.end(),
                                      [](const auto& r) { return r.size() > 8; });
  // A flat log10(2) whatever the macrocycle count.
  t.macrocycle_penalty = macrocycle ? std::log10(2.0) : 0.0;
  const auto bits = static_cast<double>(bag.distinct());
  if (n > bits) t.symmetry_correction = 0.5 * std::log(n / bits);

  const double raw = t.fragment_score - t.size_penalty - t.stereo_penalty - t.spiro_penalty - t.bridge_penalty -
                     t.macrocycle_penalty + t.symmetry_correction;
  constexpr double lo = -4.0, hi = 2.5;
  double s = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0;
  if (s > 8.0) s = 8.0 + std::log(s - 8.0);
  t.value = std::clamp(s, 1.0, 10.0);
  return t;
}

double sa_score(const chem::MoleculeGraph& mol, const SaScoreTable& table) { return sa_score_terms(mol, table).value; }

}  // namespace osc::predictor
