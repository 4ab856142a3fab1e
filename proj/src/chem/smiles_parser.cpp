// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>

#include "matching.hpp"
#include "oscagent/chem/elements.hpp"
#include "oscagent/chem/smiles.hpp"

namespace osc::chem {
namespace {

struct PendingBond {
  std::optional<BondOrder> order;
  BondStereo stereo = BondStereo::None;
  std::size_t position = 0;
  bool present() const { return order.has_value() || stereo != BondStereo::None; }
};

struct RingOpening {
  int atom;
  PendingBond bond;
  std::size_t position;
};

std::string atom_label(const MoleculeGraph& mol, int i) {
  const auto& a = mol.atom(i);
  return "atom " + std::to_string(i) + " (" + std::string(element_symbol(a.atomic_number)) + ")";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  MoleculeGraph run() {
    if (text_.empty()) throw GrammarError("empty SMILES", 0);
    while (pos_ < text_.size()) step();
    if (!rings_.empty()) {
      const auto& [label, open] = *rings_.begin();
      throw GrammarError("unclosed ring bond " + ring_label(label), open.position);
    }
    if (!branches_.empty()) throw GrammarError("unclosed branch '('", branch_positions_.back());
    if (pending_.present()) throw GrammarError("bond symbol without a following atom", pending_.position);
    if (mol_.num_atoms() == 0) throw GrammarError("no atoms", 0);
    return std::move(mol_);
  }

 private:
  static std::string ring_label(int n) { return n < 10 ? std::to_string(n) : "%" + std::to_string(n); }

  char peek(std::size_t off = 0) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  void step() {
    const char c = peek();
    switch (c) {
      case '(':
        if (prev_ < 0) throw GrammarError("branch without a preceding atom", pos_);
        if (pending_.present()) throw GrammarError("bond symbol before '('", pos_);
        if (peek(1) == ')') throw GrammarError("empty branch", pos_);
        branches_.push_back(prev_);
        branch_positions_.push_back(pos_);
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) throw GrammarError("unbalanced ')'", pos_);
        if (pending_.present()) throw GrammarError("bond symbol before ')'", pos_);
        prev_ = branches_.back();
        branches_.pop_back();
        branch_positions_.pop_back();
        ++pos_;
        return;
      case '-': case '=': case '#': case '$': case ':': case '/': case '\\':
        read_bond();
        return;
      case '.':
        if (pending_.present()) throw GrammarError("bond symbol before '.'", pos_);
        if (prev_ < 0) throw GrammarError("'.' without a preceding atom", pos_);
        prev_ = -1;
        ++pos_;
        return;
      case '%':
        read_ring_closure();
        return;
      case '[':
        add_atom(read_bracket_atom());
        return;
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      read_ring_closure();
      return;
    }
    add_atom(read_bare_atom());
  }

  void read_bond() {
    if (pending_.present()) throw GrammarError("two consecutive bond symbols", pos_);
    if (prev_ < 0) throw GrammarError("bond symbol without a preceding atom", pos_);
    pending_.position = pos_;
    switch (peek()) {
      case '-': pending_.order = BondOrder::Single; break;
      case '=': pending_.order = BondOrder::Double; break;
      case '#': pending_.order = BondOrder::Triple; break;
      case ':': pending_.order = BondOrder::Aromatic; break;
      case '/': pending_.stereo = BondStereo::Up; break;
      case '\\': pending_.stereo = BondStereo::Down; break;
      case '$': throw GrammarError("quadruple bonds are not supported", pos_);
      default: break;
    }
    ++pos_;
  }

  void read_ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0) throw GrammarError("ring bond without a preceding atom", pos_);
    int label = 0;
    if (peek() == '%') {
      if (!std::isdigit(static_cast<unsigned char>(peek(1))) ||
          !std::isdigit(static_cast<unsigned char>(peek(2)))) {
        throw GrammarError("'%' must be followed by two digits", pos_);
      }
      label = (peek(1) - '0') * 10 + (peek(2) - '0');
      pos_ += 3;
    } else {
      label = peek() - '0';
      ++pos_;
    }
    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_.emplace(label, RingOpening{prev_, pending_, start});
      pending_ = {};
      return;
    }
    const RingOpening open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) throw GrammarError("ring bond " + ring_label(label) + " closes on its own atom", start);
    std::optional<BondOrder> order = pending_.order;
    if (open.bond.order && order && *open.bond.order != *order) {
      throw GrammarError("conflicting bond orders on ring bond " + ring_label(label), start);
    }
    if (!order) order = open.bond.order;
    const BondStereo stereo = pending_.stereo != BondStereo::None ? pending_.stereo : open.bond.stereo;
    pending_ = {};
    connect(open.atom, prev_, order, stereo, start);
  }

  void connect(int a, int b, std::optional<BondOrder> order, BondStereo stereo, std::size_t where) {
    if (mol_.bond_between(a, b)) throw GrammarError("duplicate bond between the same atoms", where);
    BondOrder o = BondOrder::Single;
    if (order) {
      o = *order;
    } else if (mol_.atom(a).aromatic && mol_.atom(b).aromatic) {
      o = BondOrder::Aromatic;
    }
    mol_.add_bond(a, b, o, stereo);
  }

  void add_atom(Atom atom) {
    const int idx = mol_.add_atom(std::move(atom));
    if (prev_ >= 0) {
      connect(prev_, idx, pending_.order, pending_.stereo, pending_.position);
    } else if (pending_.present()) {
      throw GrammarError("bond symbol without a preceding atom", pending_.position);
    }
    pending_ = {};
    prev_ = idx;
  }

  Atom read_bare_atom() {
    Atom a;
    const char c = peek();
    const char n = peek(1);
    if (c == 'C' && n == 'l') {
      a.atomic_number = 17;
      pos_ += 2;
      return a;
    }
    if (c == 'B' && n == 'r') {
      a.atomic_number = 35;
      pos_ += 2;
      return a;
    }
    switch (c) {
      case 'B': a.atomic_number = 5; break;
      case 'C': a.atomic_number = 6; break;
      case 'N': a.atomic_number = 7; break;
      case 'O': a.atomic_number = 8; break;
      case 'P': a.atomic_number = 15; break;
      case 'S': a.atomic_number = 16; break;
      case 'F': a.atomic_number = 9; break;
      case 'I': a.atomic_number = 53; break;
      case 'b': a.atomic_number = 5; a.aromatic = true; break;
      case 'c': a.atomic_number = 6; a.aromatic = true; break;
      case 'n': a.atomic_number = 7; a.aromatic = true; break;
      case 'o': a.atomic_number = 8; a.aromatic = true; break;
      case 'p': a.atomic_number = 15; a.aromatic = true; break;
      case 's': a.atomic_number = 16; a.aromatic = true; break;
      default:
        throw GrammarError(std::string("unknown token '") + c + "'", pos_);
    }
    ++pos_;
    return a;
  }

  int read_number() {
    int v = 0;
    bool any = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (peek() - '0');
      any = true;
      ++pos_;
      if (v > 100000) throw GrammarError("number too large", pos_);
    }
    return any ? v : -1;
  }

  Atom read_bracket_atom() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    Atom a;
    a.bracket = true;
    a.explicit_h = 0;
    if (const int iso = read_number(); iso >= 0) a.isotope = iso;

    // Element symbol, aromatic forms first.
    static constexpr std::pair<std::string_view, int> kAromatic[] = {
        {"se", 34}, {"as", 33}, {"te", 52}, {"b", 5}, {"c", 6}, {"n", 7}, {"o", 8}, {"p", 15}, {"s", 16}};
    bool matched = false;
    for (const auto& [sym, z] : kAromatic) {
      if (text_.substr(pos_, sym.size()) == sym) {
        a.atomic_number = z;
        a.aromatic = true;
        pos_ += sym.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      const char c = peek();
      if (!std::isupper(static_cast<unsigned char>(c))) {
        throw GrammarError("expected element symbol in bracket atom", pos_);
      }
      std::optional<int> z;
      if (std::islower(static_cast<unsigned char>(peek(1)))) {
        z = element_from_symbol(text_.substr(pos_, 2));
        if (z) pos_ += 2;
      }
      if (!z) {
        z = element_from_symbol(text_.substr(pos_, 1));
        if (!z) throw GrammarError("unknown element in bracket atom", pos_);
        pos_ += 1;
      }
      a.atomic_number = *z;
    }

    if (peek() == '@') {
      const std::size_t start = pos_;
      ++pos_;
      if (peek() == '@') {
        ++pos_;
      } else if (std::isupper(static_cast<unsigned char>(peek())) &&
                 std::isupper(static_cast<unsigned char>(peek(1)))) {
        pos_ += 2;
        if (read_number() < 0) throw GrammarError("chirality class needs a number", pos_);
      }
      a.chirality = std::string(text_.substr(start, pos_ - start));
    }
    if (peek() == 'H') {
      ++pos_;
      const int h = read_number();
      a.explicit_h = h < 0 ? 1 : h;
    }
    if (peek() == '+' || peek() == '-') {
      const int sign = peek() == '+' ? 1 : -1;
      const char sym = peek();
      ++pos_;
      int magnitude = read_number();
      if (magnitude < 0) {
        magnitude = 1;
        while (peek() == sym) {
          ++magnitude;
          ++pos_;
        }
      }
      a.formal_charge = sign * magnitude;
    }
    if (peek() == ':') {
      ++pos_;
      if (read_number() < 0) throw GrammarError("atom class needs a number", pos_);
    }
    if (peek() != ']') throw GrammarError("unclosed bracket atom", open);
    ++pos_;
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MoleculeGraph mol_;
  int prev_ = -1;
  PendingBond pending_;
  std::vector<int> branches_;
  std::vector<std::size_t> branch_positions_;
  std::map<int, RingOpening> rings_;
};

/// Removes plain [H] atoms bonded to a heavy atom and folds them into the
/// neighbor's hydrogen count.
MoleculeGraph fold_explicit_hydrogens(const MoleculeGraph& mol) {
  std::vector<bool> drop(static_cast<std::size_t>(mol.num_atoms()), false);
  std::vector<int> extra_h(static_cast<std::size_t>(mol.num_atoms()), 0);
  bool any = false;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const auto& a = mol.atom(i);
    if (a.atomic_number != 1 || a.isotope || a.formal_charge != 0 || mol.degree(i) != 1 ||
        a.explicit_h.value_or(0) != 0) {
      continue;
    }
    const auto nb = mol.neighbors(i)[0];
    if (mol.atom(nb.atom).atomic_number == 1) continue;
    if (mol.bond(nb.bond).order != BondOrder::Single) continue;
    drop[static_cast<std::size_t>(i)] = true;
    ++extra_h[static_cast<std::size_t>(nb.atom)];
    any = true;
  }
  if (!any) return mol;
  MoleculeGraph out;
  std::vector<int> remap(static_cast<std::size_t>(mol.num_atoms()), -1);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (drop[static_cast<std::size_t>(i)]) continue;
    Atom a = mol.atom(i);
    if (a.bracket) a.explicit_h = a.explicit_h.value_or(0) + extra_h[static_cast<std::size_t>(i)];
    remap[static_cast<std::size_t>(i)] = out.add_atom(std::move(a));
  }
  for (const auto& b : mol.bonds()) {
    const int u = remap[static_cast<std::size_t>(b.begin)];
    const int v = remap[static_cast<std::size_t>(b.end)];
    if (u >= 0 && v >= 0) out.add_bond(u, v, b.order, b.stereo);
  }
  return out;
}

/// Hydrogen count known before kekulization: bracket atoms carry it; bare
/// atoms are treated as having none until their valence is settled. When
/// `use_total_h` is set (re-kekulizing an already sanitized graph) the stored
/// total is used for every atom.
int known_hydrogens(const Atom& a, bool use_total_h) {
  return use_total_h ? a.total_h() : a.explicit_h.value_or(0);
}

/// Assigns single/double orders to the aromatic bonds of `mol` in place.
void assign_kekule(MoleculeGraph& mol, bool use_total_h) {
  const int n = mol.num_atoms();
  std::vector<int> needs;
  std::vector<int> vertex_of(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    int aromatic_bonds = 0;
    int fixed = 0;
    for (const auto& nb : mol.neighbors(i)) {
      const auto o = mol.bond(nb.bond).order;
      if (o == BondOrder::Aromatic) {
        ++aromatic_bonds;
      } else {
        fixed += static_cast<int>(o);
      }
    }
    const auto& a = mol.atom(i);
    if (aromatic_bonds == 0 && !a.aromatic) continue;
    const int used = fixed + aromatic_bonds + known_hydrogens(a, use_total_h);
    const auto valence = smallest_valence_at_least(a.atomic_number, a.formal_charge, used);
    if (!valence) {
      throw ValenceError(atom_label(mol, i) + " has valence " + std::to_string(used) +
                         ", more than allowed");
    }
    if (*valence - used >= 1) {
      vertex_of[static_cast<std::size_t>(i)] = static_cast<int>(needs.size());
      needs.push_back(i);
    }
  }

  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_bond;
  for (int b = 0; b < mol.num_bonds(); ++b) {
    const auto& bond = mol.bond(b);
    if (bond.order != BondOrder::Aromatic) continue;
    const int u = vertex_of[static_cast<std::size_t>(bond.begin)];
    const int v = vertex_of[static_cast<std::size_t>(bond.end)];
    if (u >= 0 && v >= 0) {
      edges.emplace_back(u, v);
      edge_bond.push_back(b);
    }
  }
  const auto mate = detail::maximum_matching(static_cast<int>(needs.size()), edges);
  std::string unmatched;
  for (std::size_t v = 0; v < needs.size(); ++v) {
    if (mate[v] < 0) unmatched += (unmatched.empty() ? "" : " ") + std::to_string(needs[v]);
  }
  if (!unmatched.empty()) throw AromaticityError("cannot kekulize; unmatched aromatic atoms: " + unmatched);

  for (int b = 0; b < mol.num_bonds(); ++b) {
    if (mol.bond(b).order == BondOrder::Aromatic) mol.bond(b).order = BondOrder::Single;
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    if (mate[static_cast<std::size_t>(u)] == v) {
      mol.bond(edge_bond[e]).order = BondOrder::Double;
    }
  }
  for (int i = 0; i < n; ++i) mol.atom(i).aromatic = false;
}

void fill_hydrogens_and_check(MoleculeGraph& mol) {
  for (int i = 0; i < mol.num_atoms(); ++i) {
    auto& a = mol.atom(i);
    int bonds = 0;
    for (const auto& nb : mol.neighbors(i)) bonds += static_cast<int>(mol.bond(nb.bond).order);
    if (a.bracket) {
      const int used = bonds + a.explicit_h.value_or(0);
      const auto allowed = allowed_valences(a.atomic_number, a.formal_charge);
      if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), used) == allowed.end()) {
        throw ValenceError(atom_label(mol, i) + " has valence " + std::to_string(used) +
                           ", not an allowed valence");
      }
      a.implicit_h = 0;
      continue;
    }
    const auto valence = smallest_valence_at_least(a.atomic_number, a.formal_charge, bonds);
    if (!valence) {
      throw ValenceError(atom_label(mol, i) + " has valence " + std::to_string(bonds) +
                         ", more than allowed");
    }
    a.implicit_h = *valence - bonds;
  }
}

}  // namespace

MoleculeGraph parse_smiles(std::string_view text) {
  MoleculeGraph mol = fold_explicit_hydrogens(Parser(text).run());
  mol.update_ring_info();
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (mol.atom(i).aromatic && !mol.atom_in_ring(i)) {
      throw AromaticityError("aromatic " + atom_label(mol, i) + " is not in a ring");
    }
  }
  assign_kekule(mol, /*use_total_h=*/false);
  fill_hydrogens_and_check(mol);
  mol.update_ring_info();
  perceive_aromaticity(mol);
  return mol;
}

MoleculeGraph kekulize(const MoleculeGraph& mol) {
  MoleculeGraph out = mol;
  assign_kekule(out, /*use_total_h=*/true);
  return out;
}

}  // namespace osc::chem
