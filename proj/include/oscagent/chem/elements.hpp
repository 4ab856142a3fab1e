// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace osc::chem {

/// Atomic number → symbol, covering the whole periodic table (0 is unused).
std::string_view element_symbol(int atomic_number);

/// Looks up an element by its exact (case-sensitive) symbol, e.g. "Cl".
std::optional<int> element_from_symbol(std::string_view symbol);

/// Average atomic weight; only needed to derive isotope mass shifts.
double average_atomic_weight(int atomic_number);

/// Number of valence-shell electrons for main-group elements, 0 otherwise.
int outer_electrons(int atomic_number);

/// Allowed valences for a neutral element, ascending. Empty when the element
/// has no entry in the table (transition metals etc.); such atoms are not
/// valence-checked.
std::span<const int> neutral_valences(int atomic_number);

/// Allowed valences with formal charge applied. A charged atom takes the
/// valences of its isoelectronic neighbor (Z - charge): N+ behaves like C,
/// O- like F, C- like N, B- like C. Returns empty when unchecked.
std::span<const int> allowed_valences(int atomic_number, int formal_charge);

/// Smallest allowed valence that is >= `used`, or nullopt if `used` exceeds
/// the maximum. Elements outside the table always return `used`.
std::optional<int> smallest_valence_at_least(int atomic_number, int formal_charge, int used);

/// Default (lowest) valence of the neutral element, 0 when unknown.
int default_valence(int atomic_number);

/// True for B, C, N, O, P, S, F, Cl, Br, I: the atoms that may appear outside
/// brackets.
bool is_organic_subset(int atomic_number);

/// True for elements that may be written as lowercase aromatic symbols.
bool may_be_aromatic(int atomic_number);

/// Pauling-style electronegativity ordering used to decide whether an
/// exocyclic multiple bond withdraws the ring atom's pi electron.
bool more_electronegative(int lhs, int rhs);

}  // namespace osc::chem
