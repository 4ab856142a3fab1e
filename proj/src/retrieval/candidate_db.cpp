// SPDX-License-Identifier: Apache-2.0
#include "oscagent/retrieval/candidate_db.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace osc::retrieval {

namespace {

// Field order is fixed so that files diff cleanly between runs.
nlohmann::ordered_json ordered(const ScoredCandidate& c) {
  nlohmann::ordered_json j;
  j["smiles"] = c.record.smiles;
  j["pce"] = c.record.pce;
  j["pce_sigma"] = c.pce_sigma;
  j["sascore"] = c.record.sascore;
  j["homo"] = c.record.homo;
  j["lumo"] = c.record.lumo;
  j["orbital_reward"] = c.orbital_reward;
  j["score"] = c.score;
  j["iteration"] = c.iteration;
  j["timestamp"] = c.timestamp;
  return j;
}

std::string dump_line(const ScoredCandidate& c) { return ordered(c).dump(); }

}  // namespace

nlohmann::ordered_json to_json(const ScoredCandidate& c) { return ordered(c); }

ScoredCandidate candidate_from_json(const nlohmann::json& j) {
  ScoredCandidate c;
  c.record.smiles = j.at("smiles").get<std::string>();
  c.record.pce = j.at("pce").get<double>();
  c.pce_sigma = j.at("pce_sigma").get<double>();
  c.record.sascore = j.at("sascore").get<double>();
  c.record.homo = j.at("homo").get<double>();
  c.record.lumo = j.at("lumo").get<double>();
  c.orbital_reward = j.at("orbital_reward").get<double>();
  c.score = j.at("score").get<double>();
  c.iteration = j.at("iteration").get<int>();
  c.timestamp = j.at("timestamp").get<std::int64_t>();
  return c;
}

CandidateDatabase::CandidateDatabase(std::string path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;  // a fresh database
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto c = candidate_from_json(nlohmann::json::parse(line));
      entries_[c.record.smiles] = std::move(c);
    } catch (const nlohmann::json::exception& e) {
      throw RetrievalError("PersistenceError",
                           *path_ + ":" + std::to_string(line_no) + ": bad candidate record: " + e.what());
    }
  }
}

UpsertOutcome CandidateDatabase::upsert(const ScoredCandidate& cand) {
  UpsertOutcome out = UpsertOutcome::Inserted;
  auto it = entries_.find(cand.record.smiles);
  if (it == entries_.end()) {
    entries_.emplace(cand.record.smiles, cand);
  } else if (cand.score > it->second.score) {
    it->second = cand;
    out = UpsertOutcome::Replaced;
  } else {
    return UpsertOutcome::KeptExisting;
  }
  if (path_) save();
  return out;
}

std::optional<ScoredCandidate> CandidateDatabase::find(const std::string& smiles) const {
  auto it = entries_.find(smiles);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<ScoredCandidate> CandidateDatabase::topk(std::size_t k, bool risk_adjusted) const {
  std::vector<ScoredCandidate> all = this->all();
  auto value = [&](const ScoredCandidate& c) { return risk_adjusted ? c.risk_adjusted_score() : c.score; };
  std::stable_sort(all.begin(), all.end(), [&](const ScoredCandidate& a, const ScoredCandidate& b) {
    const double va = value(a), vb = value(b);
    if (va != vb) return va > vb;
    return a.record.smiles < b.record.smiles;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::vector<ScoredCandidate> CandidateDatabase::all() const {
  std::vector<ScoredCandidate> out;
  out.reserve(entries_.size());
  for (const auto& [_, c] : entries_) out.push_back(c);
  return out;
}

std::string CandidateDatabase::serialize() const {
  std::string out;
  for (const auto& [_, c] : entries_) {
    out += dump_line(c);
    out += '\n';
  }
  return out;
}

void CandidateDatabase::save() const {
  if (!path_) throw RetrievalError("PersistenceError", "database has no backing file");
  const std::filesystem::path target(*path_);
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RetrievalError("PersistenceError", "cannot write " + tmp.string());
    out << serialize();
    out.flush();
    if (!out) throw RetrievalError("PersistenceError", "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw RetrievalError("PersistenceError", "cannot replace " + target.string() + ": " + ec.message());
}

}  // namespace osc::retrieval
