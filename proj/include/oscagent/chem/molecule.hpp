// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace osc::chem {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 12 };

/// Directional markers ('/' and '\') are kept so a round trip through the
/// parser does not silently lose them, but nothing downstream reads them.
enum class BondStereo : std::uint8_t { None, Up, Down };

struct Atom {
  int atomic_number = 6;
  bool aromatic = false;
  int formal_charge = 0;
  std::optional<int> isotope;
  /// Hydrogen count written inside brackets. Absent for bare atoms.
  std::optional<int> explicit_h;
  /// Hydrogens inferred from the valence model; zero for bracket atoms.
  int implicit_h = 0;
  /// "@", "@@", "@TH1", ... Retained, excluded from identity.
  std::string chirality;
  bool bracket = false;

  int total_h() const { return explicit_h.value_or(0) + implicit_h; }
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::Single;
  BondStereo stereo = BondStereo::None;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

/// Smallest-set-of-smallest-rings style ring data plus exact ring membership
/// (an atom or bond is "in a ring" iff it lies on some cycle).
struct RingInfo {
  std::vector<std::vector<int>> atom_rings;
  std::vector<std::vector<int>> bond_rings;
  std::vector<bool> atom_in_ring;
  std::vector<bool> bond_in_ring;

  int num_atom_rings(int atom) const;
};

/// Atoms, bonds and an adjacency index. The graph never stores explicit
/// hydrogen atoms; hydrogens are counts on their heavy atom.
class MoleculeGraph {
 public:
  int add_atom(Atom atom);
  /// Throws std::invalid_argument on a self loop or a duplicate bond.
  int add_bond(int a, int b, BondOrder order, BondStereo stereo = BondStereo::None);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }

  std::span<const Neighbor> neighbors(int atom) const {
    return adjacency_[static_cast<std::size_t>(atom)];
  }
  int degree(int atom) const { return static_cast<int>(neighbors(atom).size()); }
  std::optional<int> bond_between(int a, int b) const;

  /// Sum of bond orders (aromatic counted as 1) plus hydrogens.
  int valence_sum(int atom) const;

  int component_count() const;
  /// Component id per atom, numbered in order of first appearance.
  std::vector<int> components() const;

  /// Ring data is derived; call after the topology is final.
  void update_ring_info();
  const RingInfo& ring_info() const { return rings_; }
  bool atom_in_ring(int atom) const { return rings_.atom_in_ring[static_cast<std::size_t>(atom)]; }
  bool bond_in_ring(int bond) const { return rings_.bond_in_ring[static_cast<std::size_t>(bond)]; }

  /// New graph whose atom i is this graph's atom order[i]. Bond list order
  /// follows the new atom order.
  MoleculeGraph permuted(std::span<const int> order) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  RingInfo rings_;
};

/// Ring perception over an arbitrary graph (used by MoleculeGraph).
RingInfo find_rings(const MoleculeGraph& mol);

}  // namespace osc::chem
