// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "oscagent/chem/elements.hpp"
#include "oscagent/chem/smiles.hpp"

namespace osc::chem {
namespace {

int dense_renumber(std::vector<std::vector<long long>>& keys, std::vector<int>& cls) {
  const auto n = keys.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
  int next = -1;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || keys[order[k]] != keys[order[k - 1]]) ++next;
    cls[order[k]] = next;
  }
  return next + 1;
}

int refine(const MoleculeGraph& mol, std::vector<int>& cls) {
  const auto n = static_cast<std::size_t>(mol.num_atoms());
  int count = static_cast<int>(std::set<int>(cls.begin(), cls.end()).size());
  while (true) {
    std::vector<std::vector<long long>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<long long> nbrs;
      for (const auto& nb : mol.neighbors(static_cast<int>(i))) {
        const auto code = static_cast<long long>(mol.bond(nb.bond).order);
        nbrs.push_back(code * (1LL << 32) + cls[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(nbrs.begin(), nbrs.end());
      keys[i].push_back(cls[i]);
      keys[i].insert(keys[i].end(), nbrs.begin(), nbrs.end());
    }
    const int next = dense_renumber(keys, cls);
    if (next == count) return count;
    count = next;
  }
}

bool aromatic_symbol_allowed(int z) {
  switch (z) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34: case 52:
      return true;
    default:
      return false;
  }
}

std::string atom_symbol(const Atom& a) {
  std::string s(element_symbol(a.atomic_number));
  if (a.aromatic && aromatic_symbol_allowed(a.atomic_number)) {
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  }
  return s;
}

class Writer {
 public:
  Writer(const MoleculeGraph& mol, std::span<const int> priority)
      : mol_(mol), priority_(priority.begin(), priority.end()) {
    const auto n = static_cast<std::size_t>(mol.num_atoms());
    bare_.assign(n, false);
    const MoleculeGraph kek = kekulize(mol);
    for (int i = 0; i < mol.num_atoms(); ++i) bare_[static_cast<std::size_t>(i)] = can_write_bare(kek, i);
  }

  std::string run() {
    const auto n = static_cast<std::size_t>(mol_.num_atoms());
    visited_.assign(n, false);
    std::vector<std::string> parts;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return prio(a) < prio(b); });
    for (int start : order) {
      if (visited_[static_cast<std::size_t>(start)]) continue;
      parts.push_back(write_component(start));
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += '.';
      out += parts[i];
    }
    return out;
  }

 private:
  int prio(int atom) const { return priority_[static_cast<std::size_t>(atom)]; }

  bool can_write_bare(const MoleculeGraph& kek, int i) const {
    const auto& a = mol_.atom(i);
    if (!is_organic_subset(a.atomic_number) || a.isotope || a.formal_charge != 0) return false;
    if (a.aromatic && !may_be_aromatic(a.atomic_number)) return false;
    int kek_sum = 0;
    bool has_double = false;
    for (const auto& nb : kek.neighbors(i)) {
      const int o = static_cast<int>(kek.bond(nb.bond).order);
      kek_sum += o;
      if (o == 2 && mol_.bond(nb.bond).order == BondOrder::Aromatic) has_double = true;
    }
    const auto v = smallest_valence_at_least(a.atomic_number, 0, kek_sum);
    if (!v || *v - kek_sum != a.total_h()) return false;
    if (!a.aromatic) return true;
    // A lowercase atom with no hydrogen written is read as needing a double
    // bond whenever its lowest valence leaves room for one.
    int used = 0;
    for (const auto& nb : mol_.neighbors(i)) {
      const auto o = mol_.bond(nb.bond).order;
      used += o == BondOrder::Aromatic ? 1 : static_cast<int>(o);
    }
    const auto dv = smallest_valence_at_least(a.atomic_number, 0, used);
    const bool reads_as_needing = dv && *dv - used >= 1;
    return reads_as_needing == has_double;
  }

  std::string atom_text(int i) const {
    const auto& a = mol_.atom(i);
    if (bare_[static_cast<std::size_t>(i)]) return atom_symbol(a);
    std::string s = "[";
    if (a.isotope) s += std::to_string(*a.isotope);
    s += atom_symbol(a);
    const int h = a.total_h();
    if (h == 1) s += "H";
    if (h > 1) s += "H" + std::to_string(h);
    if (a.formal_charge != 0) {
      s += a.formal_charge > 0 ? '+' : '-';
      const int mag = std::abs(a.formal_charge);
      if (mag > 1) s += std::to_string(mag);
    }
    s += "]";
    return s;
  }

  std::string bond_text(int bond) const {
    const auto& b = mol_.bond(bond);
    switch (b.order) {
      case BondOrder::Single:
        return mol_.atom(b.begin).aromatic && mol_.atom(b.end).aromatic ? "-" : "";
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return "";
    }
    return "";
  }

  std::vector<Neighbor> sorted_neighbors(int atom) const {
    std::vector<Neighbor> nbs(mol_.neighbors(atom).begin(), mol_.neighbors(atom).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor& x, const Neighbor& y) { return prio(x.atom) < prio(y.atom); });
    return nbs;
  }

  // First pass: spanning tree, with ring closures recorded per atom.
  void plan(int atom, int parent_bond) {
    visited_[static_cast<std::size_t>(atom)] = true;
    for (const auto& nb : sorted_neighbors(atom)) {
      if (nb.bond == parent_bond) continue;
      if (visited_[static_cast<std::size_t>(nb.atom)]) {
        if (!closure_seen_.count(nb.bond)) {
          closure_seen_.insert(nb.bond);
          closures_[atom].push_back(nb);
          closures_[nb.atom].push_back({atom, nb.bond});
        }
        continue;
      }
      children_[atom].push_back(nb);
      plan(nb.atom, nb.bond);
    }
  }

  std::string write_component(int start) {
    plan(start, -1);
    std::string out;
    emit(start, out);
    return out;
  }

  static std::string digit_text(int d) { return d < 10 ? std::to_string(d) : "%" + std::to_string(d); }

  int take_digit() {
    int d = 1;
    while (digits_in_use_.count(d)) ++d;
    digits_in_use_.insert(d);
    return d;
  }

  void emit(int atom, std::string& out) {
    out += atom_text(atom);
    auto& rings = closures_[atom];
    // Closures of rings opened earlier come first, then new openings; both
    // follow partner priority.
    std::vector<Neighbor> closing;
    std::vector<Neighbor> opening;
    for (const auto& nb : rings) {
      (open_digit_.count(nb.bond) ? closing : opening).push_back(nb);
    }
    auto by_prio = [&](const Neighbor& x, const Neighbor& y) { return prio(x.atom) < prio(y.atom); };
    std::sort(closing.begin(), closing.end(), by_prio);
    std::sort(opening.begin(), opening.end(), by_prio);
    std::vector<int> freed;
    for (const auto& nb : closing) {
      const int d = open_digit_[nb.bond];
      out += digit_text(d);
      freed.push_back(d);
      open_digit_.erase(nb.bond);
    }
    for (const auto& nb : opening) {
      const int d = take_digit();
      open_digit_[nb.bond] = d;
      out += bond_text(nb.bond) + digit_text(d);
    }
    for (int d : freed) digits_in_use_.erase(d);

    const auto& kids = children_[atom];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool branch = k + 1 < kids.size();
      if (branch) out += '(';
      out += bond_text(kids[k].bond);
      emit(kids[k].atom, out);
      if (branch) out += ')';
    }
  }

  const MoleculeGraph& mol_;
  std::vector<int> priority_;
  std::vector<bool> bare_;
  std::vector<bool> visited_;
  std::map<int, std::vector<Neighbor>> children_;
  std::map<int, std::vector<Neighbor>> closures_;
  std::set<int> closure_seen_;
  std::map<int, int> open_digit_;
  std::set<int> digits_in_use_;
};

}  // namespace

std::vector<int> symmetry_classes(const MoleculeGraph& mol) {
  const auto n = static_cast<std::size_t>(mol.num_atoms());
  std::vector<std::vector<long long>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = mol.atom(static_cast<int>(i));
    keys[i] = {a.atomic_number,
               a.isotope.value_or(0),
               a.formal_charge,
               mol.degree(static_cast<int>(i)),
               a.total_h(),
               a.aromatic ? 1 : 0,
               mol.ring_info().atom_in_ring.empty() ? 0 : (mol.atom_in_ring(static_cast<int>(i)) ? 1 : 0)};
  }
  std::vector<int> cls(n, 0);
  dense_renumber(keys, cls);
  refine(mol, cls);
  return cls;
}

std::vector<int> canonical_ranks(const MoleculeGraph& mol) {
  const auto n = static_cast<std::size_t>(mol.num_atoms());
  std::vector<int> cls = symmetry_classes(mol);
  int count = static_cast<int>(std::set<int>(cls.begin(), cls.end()).size());
  while (static_cast<std::size_t>(count) < n) {
    // Break the lowest tied class at its first atom.
    std::vector<int> size(n, 0);
    for (int c : cls) ++size[static_cast<std::size_t>(c)];
    int target = -1;
    for (std::size_t c = 0; c < n; ++c) {
      if (size[c] > 1) {
        target = static_cast<int>(c);
        break;
      }
    }
    bool chosen = false;
    for (std::size_t i = 0; i < n; ++i) {
      cls[i] *= 2;
      if (cls[i] == 2 * target) {
        if (chosen) cls[i] += 1;
        chosen = true;
      }
    }
    count = refine(mol, cls);
  }
  return cls;
}

std::string write_smiles(const MoleculeGraph& mol, std::span<const int> priority) {
  if (static_cast<int>(priority.size()) != mol.num_atoms()) {
    throw std::invalid_argument("priority length does not match atom count");
  }
  if (mol.num_atoms() == 0) return "";
  return Writer(mol, priority).run();
}

std::string canonicalize(const MoleculeGraph& mol) {
  const auto ranks = canonical_ranks(mol);
  return write_smiles(mol, ranks);
}

std::string canonical_smiles(std::string_view text) { return canonicalize(parse_smiles(text)); }

}  // namespace osc::chem
