// SPDX-License-Identifier: Apache-2.0
#include "oscagent/chem/elements.hpp"

#include <array>
#include <vector>

namespace osc::chem {
namespace {

constexpr std::array<std::string_view, 119> kSymbols = {
    "*",  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Average weights for Z = 1..56; heavier elements fall back to 2.5 * Z, which
// only matters for isotope labels on exotic atoms.
constexpr std::array<double, 57> kWeights = {
    0.0,     1.008,   4.003,   6.941,   9.012,   10.812,  12.011,  14.007,  15.999,  18.998,
    20.18,   22.99,   24.305,  26.982,  28.086,  30.974,  32.067,  35.453,  39.948,  39.098,
    40.078,  44.956,  47.867,  50.942,  51.996,  54.938,  55.845,  58.933,  58.693,  63.546,
    65.39,   69.723,  72.61,   74.922,  78.96,   79.904,  83.8,    85.468,  87.62,   88.906,
    91.224,  92.906,  95.94,   98.0,    101.07,  102.906, 106.42,  107.868, 112.412, 114.818,
    118.711, 121.76,  127.6,   126.904, 131.29,  132.905, 137.328};

struct ValenceEntry {
  int atomic_number;
  std::vector<int> valences;
};

const std::vector<ValenceEntry>& valence_table() {
  static const std::vector<ValenceEntry> table = {
      {1, {1}},         {2, {0}},        {3, {1}},         {4, {2}},        {5, {3}},
      {6, {4}},         {7, {3}},        {8, {2}},         {9, {1}},        {10, {0}},
      {11, {1}},        {12, {2}},       {13, {3}},        {14, {4}},       {15, {3, 5}},
      {16, {2, 4, 6}},  {17, {1}},       {18, {0}},        {19, {1}},       {20, {2}},
      {31, {3}},        {32, {4}},       {33, {3, 5}},     {34, {2, 4, 6}}, {35, {1}},
      {36, {0}},        {37, {1}},       {38, {2}},        {51, {3, 5}},    {52, {2, 4, 6}},
      {53, {1, 3, 5}},  {54, {0}},       {55, {1}},        {56, {2}},
  };
  return table;
}

int main_group_column(int z) {
  // Returns the number of valence electrons for s/p block elements.
  if (z == 1) return 1;
  if (z == 2) return 2;
  auto period_offset = [](int zz, int start) { return zz - start + 1; };
  if (z >= 3 && z <= 10) return period_offset(z, 3);
  if (z >= 11 && z <= 18) return period_offset(z, 11);
  if (z == 19 || z == 20) return z - 18;
  if (z >= 31 && z <= 36) return z - 28;
  if (z == 37 || z == 38) return z - 36;
  if (z >= 49 && z <= 54) return z - 46;
  if (z == 55 || z == 56) return z - 54;
  if (z >= 81 && z <= 86) return z - 78;
  return 0;
}

}  // namespace

std::string_view element_symbol(int atomic_number) {
  if (atomic_number < 0 || atomic_number >= static_cast<int>(kSymbols.size())) return "?";
  return kSymbols[static_cast<std::size_t>(atomic_number)];
}

std::optional<int> element_from_symbol(std::string_view symbol) {
  for (std::size_t z = 1; z < kSymbols.size(); ++z) {
    if (kSymbols[z] == symbol) return static_cast<int>(z);
  }
  return std::nullopt;
}

double average_atomic_weight(int atomic_number) {
  if (atomic_number > 0 && atomic_number < static_cast<int>(kWeights.size())) {
    return kWeights[static_cast<std::size_t>(atomic_number)];
  }
  return 2.5 * atomic_number;
}

int outer_electrons(int atomic_number) { return main_group_column(atomic_number); }

std::span<const int> neutral_valences(int atomic_number) {
  for (const auto& e : valence_table()) {
    if (e.atomic_number == atomic_number) return e.valences;
  }
  return {};
}

std::span<const int> allowed_valences(int atomic_number, int formal_charge) {
  if (formal_charge == 0) return neutral_valences(atomic_number);
  // Only main-group elements get the isoelectronic shift; for everything else
  // the charged atom is left unchecked.
  if (neutral_valences(atomic_number).empty()) return {};
  static constexpr std::array<int, 1> kBare = {0};
  const int shifted = atomic_number - formal_charge;
  if (shifted <= 0) return kBare;
  return neutral_valences(shifted);
}

std::optional<int> smallest_valence_at_least(int atomic_number, int formal_charge, int used) {
  const auto allowed = allowed_valences(atomic_number, formal_charge);
  if (allowed.empty()) {
    if (neutral_valences(atomic_number).empty()) return used;
    return std::nullopt;
  }
  for (int v : allowed) {
    if (v >= used) return v;
  }
  return std::nullopt;
}

int default_valence(int atomic_number) {
  const auto v = neutral_valences(atomic_number);
  return v.empty() ? 0 : v.front();
}

bool is_organic_subset(int atomic_number) {
  switch (atomic_number) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 9: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

bool may_be_aromatic(int atomic_number) {
  switch (atomic_number) {
    case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34: case 52:
      return true;
    default:
      return false;
  }
}

bool more_electronegative(int lhs, int rhs) {
  const int el = outer_electrons(lhs);
  const int er = outer_electrons(rhs);
  if (el != er) return el > er;
  return lhs < rhs;
}

}  // namespace osc::chem
