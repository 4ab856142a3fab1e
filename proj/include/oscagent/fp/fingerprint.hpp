// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oscagent/chem/molecule.hpp"

namespace osc::fp {

enum class FingerprintKind { Morgan, Path };

std::string_view to_string(FingerprintKind kind);
/// Accepts "morgan", "ecfp4", "ecfp6" (Morgan) and "path".
FingerprintKind kind_from_string(std::string_view text);

class FingerprintError : public std::invalid_argument {
 public:
  FingerprintError(std::string kind, const std::string& what)
      : std::invalid_argument(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Fixed-width bit vector. Width is a power of two, at least 64.
class Fingerprint {
 public:
  Fingerprint(FingerprintKind kind, int width, int parameter);

  FingerprintKind kind() const { return kind_; }
  int width() const { return width_; }
  /// Radius for Morgan, maximum path length for path fingerprints.
  int parameter() const { return parameter_; }

  void set(int bit) { words_[static_cast<std::size_t>(bit) >> 6] |= 1ULL << (bit & 63); }
  bool test(int bit) const { return (words_[static_cast<std::size_t>(bit) >> 6] >> (bit & 63)) & 1ULL; }
  int popcount() const;
  std::vector<int> on_bits() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const Fingerprint&) const = default;

 private:
  FingerprintKind kind_;
  int width_;
  int parameter_;
  std::vector<std::uint64_t> words_;
};

/// Unfolded environment identifiers with multiplicities.
struct FragmentBag {
  std::map<std::uint64_t, int> counts;

  int total() const;
  std::size_t distinct() const { return counts.size(); }
};

/// Circular fingerprint; bit = environment id mod width. ECFP4 is radius 2,
/// ECFP6 radius 3.
Fingerprint morgan_fingerprint(const chem::MoleculeGraph& mol, int radius, int width = 2048);

/// Hashes every simple bond path of 1..max_len bonds (max_len in [1, 7]).
Fingerprint path_fingerprint(const chem::MoleculeGraph& mol, int max_len, int width = 2048);

FragmentBag fragment_bag(const chem::MoleculeGraph& mol, int radius);

/// Dispatch on kind; `parameter` is the radius or path length.
Fingerprint make_fingerprint(const chem::MoleculeGraph& mol, FingerprintKind kind, int parameter,
                             int width = 2048);

}  // namespace osc::fp
