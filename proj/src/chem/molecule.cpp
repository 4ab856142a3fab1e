// SPDX-License-Identifier: Apache-2.0
#include "oscagent/chem/molecule.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace osc::chem {

int RingInfo::num_atom_rings(int atom) const {
  int n = 0;
  for (const auto& ring : atom_rings) {
    n += static_cast<int>(std::count(ring.begin(), ring.end(), atom));
  }
  return n;
}

int MoleculeGraph::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return num_atoms() - 1;
}

int MoleculeGraph::add_bond(int a, int b, BondOrder order, BondStereo stereo) {
  if (a == b) throw std::invalid_argument("bond endpoints must differ");
  if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms()) {
    throw std::invalid_argument("bond endpoint out of range");
  }
  if (bond_between(a, b)) throw std::invalid_argument("duplicate bond");
  bonds_.push_back(Bond{a, b, order, stereo});
  const int idx = num_bonds() - 1;
  adjacency_[static_cast<std::size_t>(a)].push_back({b, idx});
  adjacency_[static_cast<std::size_t>(b)].push_back({a, idx});
  return idx;
}

std::optional<int> MoleculeGraph::bond_between(int a, int b) const {
  for (const auto& n : neighbors(a)) {
    if (n.atom == b) return n.bond;
  }
  return std::nullopt;
}

int MoleculeGraph::valence_sum(int atom) const {
  int sum = this->atom(atom).total_h();
  for (const auto& n : neighbors(atom)) {
    const auto order = bond(n.bond).order;
    sum += order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
  }
  return sum;
}

std::vector<int> MoleculeGraph::components() const {
  std::vector<int> comp(atoms_.size(), -1);
  int next = 0;
  for (int start = 0; start < num_atoms(); ++start) {
    if (comp[static_cast<std::size_t>(start)] >= 0) continue;
    std::vector<int> stack{start};
    comp[static_cast<std::size_t>(start)] = next;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (const auto& n : neighbors(a)) {
        if (comp[static_cast<std::size_t>(n.atom)] < 0) {
          comp[static_cast<std::size_t>(n.atom)] = next;
          stack.push_back(n.atom);
        }
      }
    }
    ++next;
  }
  return comp;
}

int MoleculeGraph::component_count() const {
  const auto comp = components();
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

void MoleculeGraph::update_ring_info() { rings_ = find_rings(*this); }

MoleculeGraph MoleculeGraph::permuted(std::span<const int> order) const {
  if (order.size() != atoms_.size()) throw std::invalid_argument("permutation size mismatch");
  std::vector<int> new_index(atoms_.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    new_index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  }
  MoleculeGraph out;
  for (int old : order) out.add_atom(atom(old));
  std::vector<std::pair<std::pair<int, int>, int>> edges;
  for (int b = 0; b < num_bonds(); ++b) {
    int u = new_index[static_cast<std::size_t>(bond(b).begin)];
    int v = new_index[static_cast<std::size_t>(bond(b).end)];
    if (u > v) std::swap(u, v);
    edges.push_back({{u, v}, b});
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& [uv, b] : edges) {
    out.add_bond(uv.first, uv.second, bond(b).order, bond(b).stereo);
  }
  out.update_ring_info();
  return out;
}

namespace {

using BondSet = std::vector<std::uint64_t>;

void mark_bridges(const MoleculeGraph& mol, std::vector<bool>& is_bridge) {
  const int n = mol.num_atoms();
  std::vector<int> disc(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  int timer = 0;
  // Iterative DFS to stay safe on long chains.
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      auto& f = stack.back();
      const auto nbrs = mol.neighbors(f.atom);
      if (f.next < nbrs.size()) {
        const auto nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        const auto v = static_cast<std::size_t>(nb.atom);
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[static_cast<std::size_t>(f.atom)] =
              std::min(low[static_cast<std::size_t>(f.atom)], disc[v]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          auto& parent = stack.back();
          const auto pu = static_cast<std::size_t>(parent.atom);
          const auto du = static_cast<std::size_t>(done.atom);
          low[pu] = std::min(low[pu], low[du]);
          if (low[du] > disc[pu]) is_bridge[static_cast<std::size_t>(done.parent_bond)] = true;
        }
      }
    }
  }
}

struct Cycle {
  std::vector<int> atoms;  // in traversal order
  std::vector<int> bonds;
  BondSet bits;
};

bool reduce_against(BondSet v, const std::vector<std::pair<int, BondSet>>& basis) {
  // Returns true when v is independent of the (row-echelon) basis.
  for (const auto& [pivot, row] : basis) {
    const auto word = static_cast<std::size_t>(pivot / 64);
    if ((v[word] >> (pivot % 64)) & 1U) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] ^= row[i];
    }
  }
  return std::any_of(v.begin(), v.end(), [](std::uint64_t w) { return w != 0; });
}

void insert_basis(BondSet v, std::vector<std::pair<int, BondSet>>& basis) {
  for (const auto& [pivot, row] : basis) {
    const auto word = static_cast<std::size_t>(pivot / 64);
    if ((v[word] >> (pivot % 64)) & 1U) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] ^= row[i];
    }
  }
  for (std::size_t w = 0; w < v.size(); ++w) {
    if (v[w] == 0) continue;
    const int bit = static_cast<int>(w * 64) + __builtin_ctzll(v[w]);
    // Keep the basis fully reduced so later reductions are a single pass.
    for (auto& [p, row] : basis) {
      const auto pw = static_cast<std::size_t>(bit / 64);
      if ((row[pw] >> (bit % 64)) & 1U) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] ^= v[i];
      }
    }
    basis.emplace_back(bit, std::move(v));
    return;
  }
}

}  // namespace

RingInfo find_rings(const MoleculeGraph& mol) {
  RingInfo info;
  const int n = mol.num_atoms();
  const int m = mol.num_bonds();
  std::vector<bool> is_bridge(static_cast<std::size_t>(m), false);
  mark_bridges(mol, is_bridge);
  info.bond_in_ring.assign(static_cast<std::size_t>(m), false);
  info.atom_in_ring.assign(static_cast<std::size_t>(n), false);
  for (int b = 0; b < m; ++b) {
    if (!is_bridge[static_cast<std::size_t>(b)]) {
      info.bond_in_ring[static_cast<std::size_t>(b)] = true;
      info.atom_in_ring[static_cast<std::size_t>(mol.bond(b).begin)] = true;
      info.atom_in_ring[static_cast<std::size_t>(mol.bond(b).end)] = true;
    }
  }
  if (std::none_of(info.bond_in_ring.begin(), info.bond_in_ring.end(), [](bool b) { return b; })) {
    return info;
  }

  const std::size_t words = static_cast<std::size_t>((m + 63) / 64);
  std::map<BondSet, Cycle> candidates;

  auto add_candidate = [&](std::vector<int> atoms) {
    Cycle c;
    c.bits.assign(words, 0);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const int a = atoms[i];
      const int b = atoms[(i + 1) % atoms.size()];
      const int bond = *mol.bond_between(a, b);
      c.bonds.push_back(bond);
      c.bits[static_cast<std::size_t>(bond / 64)] |= std::uint64_t{1} << (bond % 64);
    }
    c.atoms = std::move(atoms);
    if (!candidates.count(c.bits)) candidates.emplace(c.bits, std::move(c));
  };

  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> pred(static_cast<std::size_t>(n));
  auto path_to_root = [&](int v) {
    std::vector<int> path;
    while (v >= 0) {
      path.push_back(v);
      v = pred[static_cast<std::size_t>(v)];
    }
    return path;  // v ... root
  };
  auto disjoint_except_root = [](const std::vector<int>& p, const std::vector<int>& q) {
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      for (std::size_t j = 0; j + 1 < q.size(); ++j) {
        if (p[i] == q[j]) return false;
      }
    }
    return true;
  };

  for (int root = 0; root < n; ++root) {
    if (!info.atom_in_ring[static_cast<std::size_t>(root)]) continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(pred.begin(), pred.end(), -1);
    std::queue<int> q;
    q.push(root);
    dist[static_cast<std::size_t>(root)] = 0;
    std::vector<int> order;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      order.push_back(u);
      std::vector<Neighbor> nbrs(mol.neighbors(u).begin(), mol.neighbors(u).end());
      std::sort(nbrs.begin(), nbrs.end(), [](auto a, auto b) { return a.atom < b.atom; });
      for (const auto& nb : nbrs) {
        if (!info.bond_in_ring[static_cast<std::size_t>(nb.bond)]) continue;
        if (dist[static_cast<std::size_t>(nb.atom)] < 0) {
          dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(u)] + 1;
          pred[static_cast<std::size_t>(nb.atom)] = u;
          q.push(nb.atom);
        }
      }
    }
    for (int w : order) {
      const int dw = dist[static_cast<std::size_t>(w)];
      std::vector<int> lower;
      for (const auto& nb : mol.neighbors(w)) {
        if (!info.bond_in_ring[static_cast<std::size_t>(nb.bond)]) continue;
        const int dx = dist[static_cast<std::size_t>(nb.atom)];
        if (dx == dw - 1) lower.push_back(nb.atom);
        // Odd cycles: edge between two atoms at equal distance.
        if (dx == dw && nb.atom > w) {
          auto p = path_to_root(w);
          auto r = path_to_root(nb.atom);
          if (disjoint_except_root(p, r)) {
            std::vector<int> atoms(p.rbegin(), p.rend());
            for (std::size_t i = 0; i + 1 < r.size(); ++i) atoms.push_back(r[i]);
            add_candidate(std::move(atoms));
          }
        }
      }
      // Even cycles: two shortest paths meeting at w.
      std::sort(lower.begin(), lower.end());
      for (std::size_t i = 0; i < lower.size(); ++i) {
        for (std::size_t j = i + 1; j < lower.size(); ++j) {
          auto p = path_to_root(lower[i]);
          auto r = path_to_root(lower[j]);
          if (!disjoint_except_root(p, r)) continue;
          std::vector<int> atoms(p.rbegin(), p.rend());
          atoms.push_back(w);
          for (std::size_t k = 0; k + 1 < r.size(); ++k) atoms.push_back(r[k]);
          add_candidate(std::move(atoms));
        }
      }
    }
  }

  std::vector<const Cycle*> sorted;
  for (const auto& [bits, c] : candidates) sorted.push_back(&c);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Cycle* a, const Cycle* b) { return a->atoms.size() < b->atoms.size(); });

  // A cycle is kept when it is independent of all strictly smaller cycles;
  // this selects every relevant cycle and does not depend on atom order.
  std::vector<std::pair<int, BondSet>> basis;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    const auto size = sorted[i]->atoms.size();
    std::vector<const Cycle*> keep;
    while (j < sorted.size() && sorted[j]->atoms.size() == size) {
      if (reduce_against(sorted[j]->bits, basis)) keep.push_back(sorted[j]);
      ++j;
    }
    for (const Cycle* c : keep) {
      insert_basis(c->bits, basis);
      auto atoms = c->atoms;
      // Canonical rotation: start at the smallest atom index, go toward the
      // smaller neighbor.
      const auto mn = std::min_element(atoms.begin(), atoms.end()) - atoms.begin();
      std::rotate(atoms.begin(), atoms.begin() + mn, atoms.end());
      if (atoms.size() > 2 && atoms.back() < atoms[1]) std::reverse(atoms.begin() + 1, atoms.end());
      std::vector<int> bonds;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        bonds.push_back(*mol.bond_between(atoms[k], atoms[(k + 1) % atoms.size()]));
      }
      info.atom_rings.push_back(std::move(atoms));
      info.bond_rings.push_back(std::move(bonds));
    }
    i = j;
  }
  // Order rings by size, then atom list, for reproducible iteration.
  std::vector<std::size_t> idx(info.atom_rings.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (info.atom_rings[a].size() != info.atom_rings[b].size()) {
      return info.atom_rings[a].size() < info.atom_rings[b].size();
    }
    return info.atom_rings[a] < info.atom_rings[b];
  });
  RingInfo ordered;
  ordered.atom_in_ring = std::move(info.atom_in_ring);
  ordered.bond_in_ring = std::move(info.bond_in_ring);
  for (auto k : idx) {
    ordered.atom_rings.push_back(std::move(info.atom_rings[k]));
    ordered.bond_rings.push_back(std::move(info.bond_rings[k]));
  }
  return ordered;
}

}  // namespace osc::chem
