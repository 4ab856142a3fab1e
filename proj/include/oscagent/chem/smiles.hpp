// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "oscagent/chem/molecule.hpp"

namespace osc::chem {

/// Base of all chemistry errors. `kind()` is a stable machine-readable tag.
class ChemistryError : public std::runtime_error {
 public:
  ChemistryError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Malformed SMILES text: bad token, unbalanced branch or bracket, ring bond
/// left open.
class GrammarError : public ChemistryError {
 public:
  GrammarError(const std::string& what, std::size_t position)
      : ChemistryError("GrammarError", what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ValenceError : public ChemistryError {
 public:
  explicit ValenceError(const std::string& what) : ChemistryError("ValenceError", what) {}
};

/// Lowercase atoms whose aromatic bonds admit no alternating assignment.
class AromaticityError : public ChemistryError {
 public:
  explicit AromaticityError(const std::string& what) : ChemistryError("AromaticityError", what) {}
};

/// Parses SMILES into a sanitized graph: hydrogens filled, valences checked,
/// aromaticity re-perceived from the kekule structure. Explicit [H] atoms
/// attached to a heavy atom are folded into its hydrogen count.
MoleculeGraph parse_smiles(std::string_view text);

/// Copy of `mol` with every aromatic bond replaced by single/double bonds
/// and all aromatic flags cleared.
MoleculeGraph kekulize(const MoleculeGraph& mol);

/// Re-derives aromatic flags from a graph that has no aromatic bonds. Used by
/// the parser; exposed for tests.
void perceive_aromaticity(MoleculeGraph& mol);

/// Graph-symmetry classes from iterative neighbor refinement, no tie
/// breaking: equal values mark symmetry-equivalent atoms.
std::vector<int> symmetry_classes(const MoleculeGraph& mol);

/// Canonical atom ranks: equal ranks only for symmetry-equivalent atoms
/// before tie breaking; after tie breaking ranks are a permutation.
std::vector<int> canonical_ranks(const MoleculeGraph& mol);

/// Writes SMILES visiting atoms in order of `priority` (lower first). Stereo
/// markers are not written.
std::string write_smiles(const MoleculeGraph& mol, std::span<const int> priority);

/// Unique SMILES for the molecule's labeled graph.
std::string canonicalize(const MoleculeGraph& mol);

/// Convenience: parse then canonicalize.
std::string canonical_smiles(std::string_view text);

}  // namespace osc::chem
