// SPDX-License-Identifier: Apache-2.0
#include "oscagent/retrieval/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "oscagent/chem/smiles.hpp"
#include "oscagent/metrics/metrics.hpp"

namespace osc::retrieval {
namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::optional<std::string> MoleculeRecord::problem() const {
  if (smiles.empty()) return "empty SMILES";
  if (!std::isfinite(pce) || !std::isfinite(sascore) || !std::isfinite(homo) || !std::isfinite(lumo)) {
    return "non-finite value";
  }
  if (sascore < 1.0 || sascore > 10.0) return "sascore outside [1, 10]";
  if (!(lumo > homo)) return "lumo must exceed homo";
  try {
    chem::parse_smiles(smiles);
  } catch (const chem::ChemistryError& e) {
    return std::string("unparsable SMILES: ") + e.what();
  }
  return std::nullopt;
}

void OrbitalPolicy::validate() const {
  if (!(homo_min < homo_max) || !(lumo_min < lumo_max)) {
    throw RetrievalError("InvalidPolicy", "orbital window bounds must satisfy min < max");
  }
  if (!(gamma > 0.0) || !(delta > 0.0)) throw RetrievalError("InvalidPolicy", "gamma and delta must be positive");
}

bool ScoredCandidate::score_identity_holds() const {
  return score == record.pce - record.sascore + orbital_reward;
}

double ScoredCandidate::risk_adjusted_score() const {
  return (record.pce - pce_sigma) - record.sascore + orbital_reward;
}

double orbital_feasibility(double homo, double lumo, const OrbitalPolicy& policy) {
  const bool homo_ok = policy.homo_min <= homo && homo <= policy.homo_max;
  const bool lumo_ok = policy.lumo_min <= lumo && lumo <= policy.lumo_max;
  return homo_ok && lumo_ok ? policy.gamma : -policy.delta;
}

ScoredCandidate composite_score(const MoleculeRecord& rec, const OrbitalPolicy& policy, double pce_sigma) {
  ScoredCandidate c;
  c.record = rec;
  c.pce_sigma = pce_sigma;
  c.orbital_reward = orbital_feasibility(rec.homo, rec.lumo, policy);
  c.score = rec.pce - rec.sascore + c.orbital_reward;
  return c;
}

DistanceMatrix DistanceMatrix::from_fingerprints(const std::vector<fp::Fingerprint>& fps) {
  const auto n = static_cast<Eigen::Index>(fps.size());
  DistanceMatrix d;
  d.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist =
          1.0 - metrics::tanimoto(fps[static_cast<std::size_t>(i)], fps[static_cast<std::size_t>(j)]);
      d.values(i, j) = dist;
      d.values(j, i) = dist;
    }
  }
  return d;
}

void DistanceMatrix::validate() const {
  if (values.rows() != values.cols()) throw RetrievalError("InvalidMatrix", "distance matrix must be square");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    if (values(i, i) != 0.0) throw RetrievalError("InvalidMatrix", "distance matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (!(v >= 0.0 && v <= 1.0) || v != values(j, i)) {
        throw RetrievalError("InvalidMatrix", "distances must be symmetric and within [0, 1]");
      }
    }
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t seeded_first_index(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw RetrievalError("AllInvalid", "no records to choose from");
  return static_cast<std::size_t>(splitmix64(seed) % n);
}

void update_min_distance(Eigen::VectorXd& delta, const Eigen::VectorXd& row) { delta = delta.cwiseMin(row); }

std::vector<std::size_t> kcenter_greedy(const DistanceMatrix& d, std::size_t first, std::size_t k) {
  const std::size_t n = d.size();
  if (k == 0) throw RetrievalError("KTooSmall", "k must be at least 1");
  if (k > n) {
    throw RetrievalError("KTooLarge", "k = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                          " usable records");
  }
  if (first >= n) throw RetrievalError("InvalidIndex", "first pick out of range");
  std::vector<std::size_t> picks{first};
  std::vector<bool> chosen(n, false);
  chosen[first] = true;
  Eigen::VectorXd delta = d.values.row(static_cast<Eigen::Index>(first)).transpose();
  while (picks.size() < k) {
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (chosen[j]) continue;
      if (best == n || delta[static_cast<Eigen::Index>(j)] > delta[static_cast<Eigen::Index>(best)]) best = j;
    }
    picks.push_back(best);
    chosen[best] = true;
    update_min_distance(delta, d.values.row(static_cast<Eigen::Index>(best)).transpose());
  }
  return picks;
}

Selection kcenter_select(const std::vector<MoleculeRecord>& db, const RetrievalConfig& cfg) {
  Selection sel;
  std::vector<std::size_t> usable;
  std::vector<fp::Fingerprint> fps;
  for (std::size_t i = 0; i < db.size(); ++i) {
    try {
      fps.push_back(fp::morgan_fingerprint(chem::parse_smiles(db[i].smiles), 2, 2048));
      usable.push_back(i);
    } catch (const chem::ChemistryError&) {
      sel.excluded.push_back(i);
    }
  }
  if (usable.empty()) throw RetrievalError("AllInvalid", "no parsable records in the reference database");
  if (cfg.k_reference > usable.size()) {
    throw RetrievalError("KTooLarge", "k = " + std::to_string(cfg.k_reference) + " exceeds the " +
                                          std::to_string(usable.size()) + " usable records");
  }
  const auto d = DistanceMatrix::from_fingerprints(fps);
  sel.first_local = seeded_first_index(cfg.seed, usable.size());
  for (std::size_t local : kcenter_greedy(d, sel.first_local, cfg.k_reference)) {
    sel.indices.push_back(usable[local]);
  }
  return sel;
}

IngestReport read_reference_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RetrievalError("IoError", "cannot open " + path);
  IngestReport report;
  std::string line;
  if (!std::getline(in, line)) throw RetrievalError("BadHeader", path + " is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const std::vector<std::string> expected{"smiles", "pce", "sascore", "homo", "lumo"};
  if (split_commas(trim(line)) != expected) {
    throw RetrievalError("BadHeader", "expected header smiles,pce,sascore,homo,lumo in " + path);
  }
  std::size_t line_no = 1;
  std::map<std::string, std::pair<std::size_t, std::size_t>> seen;  // smiles -> record index, line
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 5) {
      report.rejected.emplace_back(line_no, "expected 5 fields, got " + std::to_string(cells.size()));
      continue;
    }
    MoleculeRecord rec;
    rec.smiles = cells[0];
    std::optional<double> nums[4];
    bool ok = true;
    for (int k = 0; k < 4; ++k) {
      nums[k] = parse_number(cells[static_cast<std::size_t>(k) + 1]);
      if (!nums[k]) {
        report.rejected.emplace_back(line_no, "bad number in column " + expected[static_cast<std::size_t>(k) + 1]);
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    rec.pce = *nums[0];
    rec.sascore = *nums[1];
    rec.homo = *nums[2];
    rec.lumo = *nums[3];
    if (auto why = rec.problem()) {
      report.rejected.emplace_back(line_no, *why);
      continue;
    }
    rec.smiles = chem::canonical_smiles(rec.smiles);
    // Repeated molecules keep the highest reported PCE.
    const auto [it, fresh] = seen.emplace(rec.smiles, std::make_pair(report.records.size(), line_no));
    if (fresh) {
      report.records.push_back(std::move(rec));
      continue;
    }
    auto& kept = report.records[it->second.first];
    if (rec.pce > kept.pce) {
      report.rejected.emplace_back(it->second.second, "duplicate of line " + std::to_string(line_no) + " with higher PCE");
      kept = std::move(rec);
      it->second.second = line_no;
    } else {
      report.rejected.emplace_back(line_no, "duplicate of line " + std::to_string(it->second.second));
    }
  }
  std::sort(report.rejected.begin(), report.rejected.end());
  return report;
}

}  // namespace osc::retrieval
