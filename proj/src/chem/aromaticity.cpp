// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "oscagent/chem/elements.hpp"
#include "oscagent/chem/smiles.hpp"

namespace osc::chem {
namespace {

enum class Donor { None, Vacant, One, Two };

int donor_electrons(Donor d) {
  switch (d) {
    case Donor::One: return 1;
    case Donor::Two: return 2;
    default: return 0;
  }
}

bool aromatic_element(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34: case 52:
      return true;
    default:
      return false;
  }
}

struct AtomView {
  int multiple_bonds = 0;
  bool triple = false;
  int bond_order_sum = 0;
  int exocyclic_partner = -1;  // atom on the other end of a non-ring multiple bond
  bool ring_multiple = false;
};

AtomView inspect(const MoleculeGraph& mol, int i) {
  AtomView v;
  for (const auto& nb : mol.neighbors(i)) {
    const auto order = static_cast<int>(mol.bond(nb.bond).order);
    v.bond_order_sum += order;
    if (order >= 2) {
      ++v.multiple_bonds;
      if (order == 3) v.triple = true;
      if (mol.bond_in_ring(nb.bond)) {
        v.ring_multiple = true;
      } else {
        v.exocyclic_partner = nb.atom;
      }
    }
  }
  return v;
}

bool is_candidate(const MoleculeGraph& mol, int i, const AtomView& v) {
  const auto& a = mol.atom(i);
  if (!aromatic_element(a.atomic_number) || !mol.atom_in_ring(i)) return false;
  if (mol.degree(i) + a.total_h() > 3) return false;
  if (v.multiple_bonds > 1 || v.triple) return false;
  return v.bond_order_sum + a.total_h() <= outer_electrons(a.atomic_number) - a.formal_charge;
}

int electron_count(const MoleculeGraph& mol, int i, const AtomView& v) {
  const auto& a = mol.atom(i);
  const int dv = default_valence(a.atomic_number);
  if (dv <= 1) return -1;
  const int deg = mol.degree(i) + a.total_h();
  if (deg > 3) return -1;
  const int lone = std::max(outer_electrons(a.atomic_number) - dv - a.formal_charge, 0);
  int res = (dv - deg) + lone;
  if (res > 1 && v.bond_order_sum + a.explicit_h.value_or(0) - mol.degree(i) > 1) res = 1;
  return res;
}

Donor donor_type(const MoleculeGraph& mol, int i) {
  const AtomView v = inspect(mol, i);
  if (!is_candidate(mol, i, v)) return Donor::None;
  const int nelec = electron_count(mol, i, v);
  const bool exo = v.exocyclic_partner >= 0;
  if (nelec < 0) return Donor::None;
  if (nelec == 0) {
    if (exo) return Donor::Vacant;
    if (v.ring_multiple) return Donor::One;
    return Donor::None;
  }
  if (nelec == 1) {
    if (exo) {
      const int partner = mol.atom(v.exocyclic_partner).atomic_number;
      return more_electronegative(partner, mol.atom(i).atomic_number) ? Donor::Vacant : Donor::One;
    }
    if (v.multiple_bonds > 0) return Donor::One;
    return mol.atom(i).formal_charge == 1 ? Donor::Vacant : Donor::None;
  }
  return v.multiple_bonds > 0 ? Donor::One : Donor::Two;
}

bool huckel(int electrons) {
  return electrons == 2 || (electrons >= 6 && (electrons - 2) % 4 == 0);
}

// Combinations beyond this many rings in one fused system are not explored.
constexpr std::size_t kMaxFusedRings = 6;
constexpr std::size_t kMaxCombinations = 200000;

}  // namespace

void perceive_aromaticity(MoleculeGraph& mol) {
  const int n = mol.num_atoms();
  for (int i = 0; i < n; ++i) mol.atom(i).aromatic = false;
  const auto& rings = mol.ring_info();
  if (rings.atom_rings.empty()) return;

  std::vector<Donor> donors(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) donors[static_cast<std::size_t>(i)] = donor_type(mol, i);

  // Rings whose atoms are all candidates.
  std::vector<std::size_t> usable;
  for (std::size_t r = 0; r < rings.atom_rings.size(); ++r) {
    const auto& ring = rings.atom_rings[r];
    if (std::all_of(ring.begin(), ring.end(),
                    [&](int a) { return donors[static_cast<std::size_t>(a)] != Donor::None; })) {
      usable.push_back(r);
    }
  }
  if (usable.empty()) return;

  std::vector<bool> atom_arom(static_cast<std::size_t>(n), false);
  std::vector<bool> bond_arom(static_cast<std::size_t>(mol.num_bonds()), false);
  auto electrons_of = [&](const std::vector<int>& atoms) {
    int e = 0;
    for (int a : atoms) e += donor_electrons(donors[static_cast<std::size_t>(a)]);
    return e;
  };

  std::vector<bool> ring_arom(rings.atom_rings.size(), false);
  for (std::size_t r : usable) {
    if (!huckel(electrons_of(rings.atom_rings[r]))) continue;
    ring_arom[r] = true;
    for (int a : rings.atom_rings[r]) atom_arom[static_cast<std::size_t>(a)] = true;
    for (int b : rings.bond_rings[r]) bond_arom[static_cast<std::size_t>(b)] = true;
  }

  // Group usable rings into fused systems (rings sharing a bond).
  const std::size_t m = usable.size();
  std::vector<std::vector<bool>> fused(m, std::vector<bool>(m, false));
  for (std::size_t x = 0; x < m; ++x) {
    const auto& bx = rings.bond_rings[usable[x]];
    const std::set<int> sx(bx.begin(), bx.end());
    for (std::size_t y = x + 1; y < m; ++y) {
      for (int b : rings.bond_rings[usable[y]]) {
        if (sx.count(b)) {
          fused[x][y] = fused[y][x] = true;
          break;
        }
      }
    }
  }
  std::vector<int> system(m, -1);
  int systems = 0;
  for (std::size_t s = 0; s < m; ++s) {
    if (system[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    system[s] = systems;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (std::size_t y = 0; y < m; ++y) {
        if (fused[x][y] && system[y] < 0) {
          system[y] = systems;
          stack.push_back(y);
        }
      }
    }
    ++systems;
  }

  // Peri-fused combinations (an atom shared by three chosen rings) are
  // skipped when one atom sits in every chosen ring, or when the rings that
  // are not aromatic on their own fall apart into pieces.
  auto peri_ok = [&](const std::vector<std::size_t>& combo) {
    if (combo.size() < 3) return true;
    std::map<int, std::size_t> hits;
    bool peri = false;
    for (auto r : combo) {
      for (int a : rings.atom_rings[usable[r]]) {
        const auto h = ++hits[a];
        if (h == combo.size()) return false;
        if (h >= 3) peri = true;
      }
    }
    if (!peri) return true;
    std::vector<std::size_t> rest;
    for (auto r : combo) {
      if (!ring_arom[usable[r]]) rest.push_back(r);
    }
    if (rest.size() < 2) return true;
    std::vector<bool> seen(rest.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      for (std::size_t y = 0; y < rest.size(); ++y) {
        if (!seen[y] && fused[rest[x]][rest[y]]) {
          seen[y] = true;
          ++reached;
          stack.push_back(y);
        }
      }
    }
    return reached == rest.size();
  };

  for (int sys = 0; sys < systems; ++sys) {
    std::vector<std::size_t> members;
    for (std::size_t x = 0; x < m; ++x) {
      if (system[x] == sys) members.push_back(x);
    }
    const std::size_t k_max = std::min(members.size(), kMaxFusedRings);
    std::size_t explored = 0;
    for (std::size_t k = 2; k <= k_max && explored < kMaxCombinations; ++k) {
      std::vector<bool> pick(members.size(), false);
      std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
      do {
        if (++explored > kMaxCombinations) break;
        std::vector<std::size_t> combo;
        for (std::size_t j = 0; j < members.size(); ++j) {
          if (pick[j]) combo.push_back(members[j]);
        }
        // The chosen rings must form one fused block.
        std::vector<bool> seen(combo.size(), false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t reached = 1;
        while (!stack.empty()) {
          const auto x = stack.back();
          stack.pop_back();
          for (std::size_t y = 0; y < combo.size(); ++y) {
            if (!seen[y] && fused[combo[x]][combo[y]]) {
              seen[y] = true;
              ++reached;
              stack.push_back(y);
            }
          }
        }
        if (reached != combo.size()) continue;
        if (!peri_ok(combo)) continue;

        std::set<int> atoms;
        std::map<int, int> atom_count;
        std::vector<int> bond_count(static_cast<std::size_t>(mol.num_bonds()), 0);
        for (auto r : combo) {
          const auto ring = usable[r];
          for (int a : rings.atom_rings[ring]) {
            atoms.insert(a);
            ++atom_count[a];
          }
          for (int b : rings.bond_rings[ring]) ++bond_count[static_cast<std::size_t>(b)];
        }
        if (!huckel(electrons_of(std::vector<int>(atoms.begin(), atoms.end())))) continue;
        for (int a : atoms) atom_arom[static_cast<std::size_t>(a)] = true;
        for (std::size_t b = 0; b < bond_count.size(); ++b) {
          if (bond_count[b] == 1) bond_arom[b] = true;
        }
      } while (std::prev_permutation(pick.begin(), pick.end()));
    }
  }

  for (int i = 0; i < n; ++i) mol.atom(i).aromatic = atom_arom[static_cast<std::size_t>(i)];
  for (int b = 0; b < mol.num_bonds(); ++b) {
    if (bond_arom[static_cast<std::size_t>(b)]) mol.bond(b).order = BondOrder::Aromatic;
  }
}

}  // namespace osc::chem
