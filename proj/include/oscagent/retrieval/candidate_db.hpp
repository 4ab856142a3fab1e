// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscagent/retrieval/retrieval.hpp"

namespace osc::retrieval {

enum class UpsertOutcome { Inserted, Replaced, KeptExisting };

nlohmann::ordered_json to_json(const ScoredCandidate& c);
ScoredCandidate candidate_from_json(const nlohmann::json& j);

/// Candidates keyed by canonical SMILES, keeping the best score per key.
/// With a backing file, every change rewrites it through a temporary file
/// and a rename, one JSON object per line in SMILES order.
class CandidateDatabase {
 public:
  CandidateDatabase() = default;
  /// Opens (or starts) the database stored at `path`.
  explicit CandidateDatabase(std::string path);

  UpsertOutcome upsert(const ScoredCandidate& cand);
  std::optional<ScoredCandidate> find(const std::string& smiles) const;
  bool contains(const std::string& smiles) const { return entries_.count(smiles) > 0; }

  /// Descending score, ties by SMILES. `risk_adjusted` ranks by
  /// score - sigma instead.
  std::vector<ScoredCandidate> topk(std::size_t k, bool risk_adjusted = false) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<ScoredCandidate> all() const;
  const std::optional<std::string>& path() const { return path_; }

  void save() const;
  std::string serialize() const;

 private:
  std::optional<std::string> path_;
  std::map<std::string, ScoredCandidate> entries_;
};

}  // namespace osc::retrieval
