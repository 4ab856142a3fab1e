// SPDX-License-Identifier: Apache-2.0
#include "oscagent/fp/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <tuple>

#include "oscagent/chem/elements.hpp"

namespace osc::fp {

using chem::BondOrder;
using chem::MoleculeGraph;

std::string_view to_string(FingerprintKind kind) {
  return kind == FingerprintKind::Morgan ? "morgan" : "path";
}

FingerprintKind kind_from_string(std::string_view text) {
  if (text == "morgan" || text == "ecfp4" || text == "ecfp6") return FingerprintKind::Morgan;
  if (text == "path") return FingerprintKind::Path;
  throw FingerprintError("UnknownKind", "unknown fingerprint kind '" + std::string(text) + "'");
}

Fingerprint::Fingerprint(FingerprintKind kind, int width, int parameter)
    : kind_(kind), width_(width), parameter_(parameter) {
  if (width < 64 || !std::has_single_bit(static_cast<unsigned>(width))) {
    throw FingerprintError("InvalidWidth", "fingerprint width must be a power of two >= 64, got " +
                                               std::to_string(width));
  }
  words_.assign(static_cast<std::size_t>(width / 64), 0);
}

int Fingerprint::popcount() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < width_; ++i) {
    if (test(i)) bits.push_back(i);
  }
  return bits;
}

int FragmentBag::total() const {
  int n = 0;
  for (const auto& [id, c] : counts) n += c;
  return n;
}

namespace {

// 32-bit hash combination compatible with the widely used boost recipe, so
// environment ids line up with published fragment tables.
void hash_combine(std::uint32_t& seed, std::uint32_t v) {
  seed ^= v + 0x9e3779b9U + (seed << 6) + (seed >> 2);
}

std::uint32_t hash_pair(std::uint32_t a, std::uint32_t b) {
  std::uint32_t seed = 0;
  hash_combine(seed, a);
  hash_combine(seed, b);
  return seed;
}

double isotope_mass(int z, int mass_number) {
  static const std::map<std::pair<int, int>, double> kMasses = {
      {{1, 1}, 1.007825}, {{1, 2}, 2.014102}, {{1, 3}, 3.016049}, {{6, 11}, 11.011434},
      {{6, 12}, 12.0}, {{6, 13}, 13.003355}, {{6, 14}, 14.003242}, {{7, 14}, 14.003074},
      {{7, 15}, 15.000109}, {{8, 16}, 15.994915}, {{8, 17}, 16.999132}, {{8, 18}, 17.999160},
      {{9, 18}, 18.000938}, {{9, 19}, 18.998403}, {{15, 31}, 30.973762}, {{15, 32}, 31.973907},
      {{16, 32}, 31.972071}, {{16, 34}, 33.967867}, {{16, 35}, 34.969032}, {{17, 35}, 34.968853},
      {{17, 37}, 36.965903}, {{35, 79}, 78.918338}, {{35, 81}, 80.916291}, {{53, 123}, 122.905589},
      {{53, 125}, 124.904630}, {{53, 127}, 126.904473}, {{53, 131}, 130.906124}};
  const auto it = kMasses.find({z, mass_number});
  return it != kMasses.end() ? it->second : static_cast<double>(mass_number);
}

std::vector<std::uint32_t> atom_invariants(const MoleculeGraph& mol) {
  std::vector<std::uint32_t> inv(static_cast<std::size_t>(mol.num_atoms()));
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const auto& a = mol.atom(i);
    const int h = a.total_h();
    // Hydrogen neighbors kept as graph atoms (isotopes, H2) count as H too.
    int h_all = h;
    for (const auto& nb : mol.neighbors(i)) {
      if (mol.atom(nb.atom).atomic_number == 1) ++h_all;
    }
    int delta_mass = 0;
    if (a.isotope) {
      delta_mass = static_cast<int>(isotope_mass(a.atomic_number, *a.isotope) -
                                    chem::average_atomic_weight(a.atomic_number));
    }
    std::uint32_t seed = 0;
    hash_combine(seed, static_cast<std::uint32_t>(a.atomic_number));
    hash_combine(seed, static_cast<std::uint32_t>(mol.degree(i) + h));
    hash_combine(seed, static_cast<std::uint32_t>(h_all));
    hash_combine(seed, static_cast<std::uint32_t>(a.formal_charge));
    hash_combine(seed, static_cast<std::uint32_t>(delta_mass));
    if (mol.atom_in_ring(i)) hash_combine(seed, 1U);
    inv[static_cast<std::size_t>(i)] = seed;
  }
  return inv;
}

/// Calls `emit(id)` for every non-redundant environment up to `radius`.
template <typename Emit>
void morgan_environments(const MoleculeGraph& mol, int radius, Emit emit) {
  const auto n = static_cast<std::size_t>(mol.num_atoms());
  const auto nb = static_cast<std::size_t>(mol.num_bonds());
  std::vector<std::uint32_t> current = atom_invariants(mol);
  std::vector<bool> dead(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    emit(current[i]);
    if (mol.degree(static_cast<int>(i)) == 0) dead[i] = true;
  }
  using BondSet = std::vector<bool>;
  std::vector<BondSet> cover(n, BondSet(nb, false));
  std::vector<BondSet> seen_sets;
  for (int layer = 0; layer < radius; ++layer) {
    std::vector<std::uint32_t> next(n, 0);
    std::vector<BondSet> round_cover = cover;
    std::vector<std::tuple<BondSet, std::uint32_t, std::size_t>> round;
    for (std::size_t i = 0; i < n; ++i) {
      if (dead[i]) continue;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> nbrs;
      for (const auto& e : mol.neighbors(static_cast<int>(i))) {
        const auto j = static_cast<std::size_t>(e.atom);
        nbrs.emplace_back(static_cast<std::uint32_t>(mol.bond(e.bond).order), current[j]);
        auto& rc = round_cover[i];
        for (std::size_t b = 0; b < nb; ++b) {
          if (cover[j][b]) rc[b] = true;
        }
        rc[static_cast<std::size_t>(e.bond)] = true;
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::uint32_t inv = static_cast<std::uint32_t>(layer);
      hash_combine(inv, current[i]);
      for (const auto& [bt, ni] : nbrs) hash_combine(inv, hash_pair(bt, ni));
      next[i] = inv;
      round.emplace_back(round_cover[i], inv, i);
    }
    std::sort(round.begin(), round.end());
    for (const auto& [set, inv, atom] : round) {
      if (std::find(seen_sets.begin(), seen_sets.end(), set) == seen_sets.end()) {
        emit(inv);
        seen_sets.push_back(set);
      } else {
        dead[atom] = true;
      }
    }
    current = std::move(next);
    cover = std::move(round_cover);
  }
}

void check_width(int width) {
  if (width < 64 || !std::has_single_bit(static_cast<unsigned>(width))) {
    throw FingerprintError("InvalidWidth", "fingerprint width must be a power of two >= 64, got " +
                                               std::to_string(width));
  }
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t atom_label(const MoleculeGraph& mol, int i) {
  const auto& a = mol.atom(i);
  return static_cast<std::uint64_t>(a.atomic_number) * 4 + (a.aromatic ? 1 : 0);
}

}  // namespace

Fingerprint morgan_fingerprint(const MoleculeGraph& mol, int radius, int width) {
  if (radius < 0) throw FingerprintError("InvalidRadius", "radius must be >= 0");
  Fingerprint fp(FingerprintKind::Morgan, width, radius);
  morgan_environments(mol, radius, [&](std::uint32_t id) { fp.set(static_cast<int>(id % static_cast<std::uint32_t>(width))); });
  return fp;
}

FragmentBag fragment_bag(const MoleculeGraph& mol, int radius) {
  if (radius < 0) throw FingerprintError("InvalidRadius", "radius must be >= 0");
  FragmentBag bag;
  morgan_environments(mol, radius, [&](std::uint32_t id) { ++bag.counts[id]; });
  return bag;
}

Fingerprint path_fingerprint(const MoleculeGraph& mol, int max_len, int width) {
  check_width(width);
  if (max_len < 1 || max_len > 7) throw FingerprintError("InvalidLength", "max_len must be in [1, 7]");
  Fingerprint fp(FingerprintKind::Path, width, max_len);
  const auto n = static_cast<std::size_t>(mol.num_atoms());
  // Label sequence atom, bond, atom, ...; a path and its reverse hash alike.
  std::vector<std::uint64_t> labels;
  std::vector<bool> on_path(n, false);
  auto hash_seq = [](const std::vector<std::uint64_t>& seq, bool reverse) {
    std::uint64_t h = 0x51ed270b27a3f1d5ULL ^ seq.size();
    for (std::size_t k = 0; k < seq.size(); ++k) {
      h = mix64(h ^ seq[reverse ? seq.size() - 1 - k : k]);
    }
    return h;
  };
  auto record = [&]() {
    const std::uint64_t h = std::min(hash_seq(labels, false), hash_seq(labels, true));
    fp.set(static_cast<int>(h % static_cast<std::uint64_t>(width)));
  };
  auto extend = [&](auto&& self, int atom, int bonds) -> void {
    if (bonds == max_len) return;
    for (const auto& e : mol.neighbors(atom)) {
      if (on_path[static_cast<std::size_t>(e.atom)]) continue;
      labels.push_back(0x100 + static_cast<std::uint64_t>(mol.bond(e.bond).order));
      labels.push_back(atom_label(mol, e.atom));
      on_path[static_cast<std::size_t>(e.atom)] = true;
      record();
      self(self, e.atom, bonds + 1);
      on_path[static_cast<std::size_t>(e.atom)] = false;
      labels.pop_back();
      labels.pop_back();
    }
  };
  for (int start = 0; start < mol.num_atoms(); ++start) {
    labels.assign(1, atom_label(mol, start));
    on_path[static_cast<std::size_t>(start)] = true;
    extend(extend, start, 0);
    on_path[static_cast<std::size_t>(start)] = false;
  }
  return fp;
}

Fingerprint make_fingerprint(const MoleculeGraph& mol, FingerprintKind kind, int parameter, int width) {
  return kind == FingerprintKind::Morgan ? morgan_fingerprint(mol, parameter, width)
                                         : path_fingerprint(mol, parameter, width);
}

}  // namespace osc::fp
