// SPDX-License-Identifier: Apache-2.0
#include "oscagent/agents/agents.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "oscagent/chem/smiles.hpp"
#include "oscagent/predictor/features.hpp"

namespace osc::agents {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// Markdown and quoting around a token; trailing sentence punctuation.
std::string clean_token(std::string t) {
  static const std::string wrap = "`*\"'";
  static const std::string tail = ".,;:";
  while (!t.empty() && (wrap.find(t.front()) != std::string::npos)) t.erase(t.begin());
  while (!t.empty() && (wrap.find(t.back()) != std::string::npos || tail.find(t.back()) != std::string::npos)) {
    t.pop_back();
  }
  return t;
}

std::string first_token(const std::string& s) {
  std::istringstream in(s);
  std::string tok;
  in >> tok;
  return clean_token(tok);
}

// Text following a `SMILES:` label, possibly empty; nullopt if no label.
std::optional<std::string> label_value(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && std::string(" \t*`#->").find(line[i]) != std::string::npos) ++i;
  if (line.compare(i, 6, "SMILES") != 0) return std::nullopt;
  i += 6;
  while (i < line.size() && (line[i] == '*' || line[i] == ' ')) ++i;
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  return trim(line.substr(i + 1));
}

bool parses(const std::string& s) {
  if (s.empty()) return false;
  try {
    chem::parse_smiles(s);
    return true;
  } catch (const chem::ChemistryError&) {
    return false;
  }
}

std::string mlp_summary(const predictor::Regressor& m) {
  std::ostringstream out;
  out << "mlp hidden=" << m.hidden() << " head=" << (m.kind() == predictor::HeadKind::Gaussian ? "gaussian" : "point");
  if (const auto& spec = m.feature_spec()) {
    out << " features=morgan r" << spec->radius << "/" << spec->width;
    for (const auto& d : spec->descriptors) out << "+" << d;
  }
  out << " seed=" << m.metadata().seed << " epochs=" << m.metadata().epochs;
  return out.str();
}

}  // namespace

std::map<std::string, std::string> StubModels::settings() const {
  return {{"orbitals", "stub"}, {"pce", "stub"}, {"sascore", "stub"}};
}

Target target_from_string(const std::string& name) {
  if (name == "pce") return Target::Pce;
  if (name == "homo") return Target::Homo;
  if (name == "lumo") return Target::Lumo;
  throw AgentError("InvalidTarget", "target must be pce, homo or lumo, got '" + name + "'");
}

const char* to_string(Target t) {
  switch (t) {
    case Target::Pce: return "pce";
    case Target::Homo: return "homo";
    case Target::Lumo: return "lumo";
  }
  return "pce";
}

predictor::Regressor train_target(const std::vector<retrieval::MoleculeRecord>& records, Target target,
                                  const predictor::TrainConfig& cfg) {
  std::vector<chem::MoleculeGraph> mols;
  mols.reserve(records.size());
  for (const auto& r : records) mols.push_back(chem::parse_smiles(r.smiles));
  predictor::FeatureSpec spec;
  spec.descriptors = {"heavy_atoms", "rings"};
  spec.fit(mols);
  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd x(n, spec.length());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    x.row(i) = predictor::featurize(mols[static_cast<std::size_t>(i)], spec).transpose();
    y[i] = target == Target::Pce ? r.pce : target == Target::Homo ? r.homo : r.lumo;
  }
  const auto kind = target == Target::Pce ? predictor::HeadKind::Gaussian : predictor::HeadKind::Point;
  auto model = predictor::Regressor::train(x, y, kind, cfg);
  model.set_feature_spec(spec);
  return model;
}

SurrogateModels SurrogateModels::load(const std::string& dir, const std::string& table_path) {
  SurrogateModels m;
  m.pce_model = predictor::Regressor::load(dir + "/pce.json");
  m.orbital_models.homo = predictor::Regressor::load(dir + "/homo.json");
  m.orbital_models.lumo = predictor::Regressor::load(dir + "/lumo.json");
  for (const auto* r : {&m.pce_model, &m.orbital_models.homo, &m.orbital_models.lumo}) {
    if (!r->feature_spec()) throw predictor::PredictorError("BadModel", "model in " + dir + " has no feature spec");
  }
  m.table = predictor::SaScoreTable::load(table_path);
  m.table_source = std::filesystem::path(table_path).filename().string();
  return m;
}

SurrogateModels SurrogateModels::train(const std::vector<retrieval::MoleculeRecord>& records,
                                       const predictor::TrainConfig& cfg, const std::string& table_path) {
  SurrogateModels m;
  m.pce_model = train_target(records, Target::Pce, cfg);
  m.orbital_models.homo = train_target(records, Target::Homo, cfg);
  m.orbital_models.lumo = train_target(records, Target::Lumo, cfg);
  m.table = predictor::SaScoreTable::load(table_path);
  m.table_source = std::filesystem::path(table_path).filename().string();
  return m;
}

predictor::ModelOutput SurrogateModels::pce(const chem::MoleculeGraph& mol) const { return pce_model.predict(mol); }

double SurrogateModels::sascore(const chem::MoleculeGraph& mol) const { return predictor::sa_score(mol, table); }

std::pair<double, double> SurrogateModels::orbitals(const chem::MoleculeGraph& mol) const {
  return {orbital_models.homo.predict(mol).mu, orbital_models.lumo.predict(mol).mu};
}

std::map<std::string, std::string> SurrogateModels::settings() const {
  return {{"homo", mlp_summary(orbital_models.homo)},
          {"lumo", mlp_summary(orbital_models.lumo)},
          {"pce", mlp_summary(pce_model)},
          {"sascore", "fragment table " + table_source + (table.approximate ? " (approximate)" : "")}};
}

PlannerResult run_planner(LlmBackend& backend, const PromptContext& ctx, const CallOptions& opts,
                          const PromptTemplates& templates) {
  const auto call = call_with_retries(backend, build_task_prompt(ctx, templates), opts.decoding, opts.max_attempts);
  if (trim(call.text).empty()) throw AgentError("EmptyResponse", "planner returned an empty reply");
  return {call.text, call.attempts};
}

std::optional<std::string> extract_smiles(const std::string& response) {
  const auto lines = split_lines(response);
  for (std::size_t i = lines.size(); i-- > 0;) {
    const auto value = label_value(lines[i]);
    if (!value) continue;
    if (!value->empty()) {
      if (auto tok = first_token(*value); !tok.empty()) return tok;
    }
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (trim(lines[j]).empty()) continue;
      if (auto tok = first_token(lines[j]); !tok.empty()) return tok;
      break;
    }
    break;
  }
  std::vector<std::string> tokens;
  std::istringstream in(response);
  for (std::string t; in >> t;) tokens.push_back(clean_token(t));
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (parses(*it)) return *it;
  }
  return std::nullopt;
}

std::string extract_design_focus(const std::string& response) {
  for (const auto& line : split_lines(response)) {
    const auto pos = line.find("Design Focus:");
    if (pos != std::string::npos) return trim(line.substr(pos + 13));
  }
  return "";
}

GeneratorProposal run_generator(LlmBackend& backend, const PromptContext& ctx, const std::string& plan,
                                int max_generation_retries, const CallOptions& opts,
                                const PromptTemplates& templates) {
  if (max_generation_retries < 1) throw AgentError("InvalidConfig", "max_generation_retries must be positive");
  auto messages = build_generator_prompt(ctx, plan, templates);
  std::string candidate, error;
  for (int attempt = 1; attempt <= max_generation_retries; ++attempt) {
    const auto call = call_with_retries(backend, messages, opts.decoding, opts.max_attempts);
    const auto extracted = extract_smiles(call.text);
    candidate = extracted.value_or("");
    if (!extracted) {
      error = "no SMILES found in the reply";
    } else {
      try {
        chem::canonical_smiles(*extracted);
        return {call.text, *extracted, extract_design_focus(call.text), attempt};
      } catch (const chem::ChemistryError& e) {
        error = e.what();
      }
    }
    messages.emplace_back(Role::Assistant, call.text.empty() ? std::string("(empty reply)") : call.text);
    messages.emplace_back(Role::User, "The proposed SMILES was rejected: " + error +
                                          ". Reply with one corrected candidate on a line starting with \"SMILES:\".");
  }
  throw NoValidSmiles("no valid SMILES after " + std::to_string(max_generation_retries) + " attempts; last error: " +
                          error,
                      candidate, error);
}

ExperimentReport parse_failure_report(const std::string& text, const std::string& error, int iteration,
                                      const std::map<std::string, std::string>& tool_settings) {
  ExperimentReport r;
  r.iteration = iteration;
  r.candidate_smiles = text;
  r.error = error.empty() ? "unparsable SMILES" : error;
  r.tool_settings = tool_settings;
  const double nan = std::nan("");
  r.pce_mu = r.pce_sigma = r.sascore = r.homo = r.lumo = r.orbital_reward = r.score = nan;
  r.anomalies = {Anomaly::ParseFailure};
  r.db_outcome = "skipped";
  return r;
}

ExperimentReport run_experimenter(const std::string& smiles, const PropertyModels& models,
                                  retrieval::CandidateDatabase& db, const retrieval::OrbitalPolicy& policy,
                                  int iteration, const Thresholds& thresholds) {
  std::string canonical;
  chem::MoleculeGraph mol;
  try {
    canonical = chem::canonical_smiles(smiles);
    mol = chem::parse_smiles(canonical);
  } catch (const chem::ChemistryError& e) {
    return parse_failure_report(smiles, e.what(), iteration, models.settings());
  }
  ExperimentReport r;
  r.iteration = iteration;
  r.candidate_smiles = canonical;
  r.tool_settings = models.settings();
  const auto pce = models.pce(mol);
  const auto [homo, lumo] = models.orbitals(mol);
  retrieval::MoleculeRecord rec{canonical, pce.mu, models.sascore(mol), homo, lumo};
  auto cand = retrieval::composite_score(rec, policy, pce.sigma);
  cand.iteration = iteration;
  cand.timestamp = iteration;
  r.pce_mu = rec.pce;
  r.pce_sigma = pce.sigma;
  r.sascore = rec.sascore;
  r.homo = homo;
  r.lumo = lumo;
  r.orbital_reward = cand.orbital_reward;
  r.score = cand.score;
  const bool duplicate = db.contains(canonical);
  switch (db.upsert(cand)) {
    case retrieval::UpsertOutcome::Inserted: r.db_outcome = "inserted"; break;
    case retrieval::UpsertOutcome::Replaced: r.db_outcome = "replaced"; break;
    case retrieval::UpsertOutcome::KeptExisting: r.db_outcome = "kept-existing"; break;
  }
  if (!(rec.pce > thresholds.pce_min)) r.anomalies.push_back(Anomaly::BelowPceThreshold);
  if (!(rec.sascore < thresholds.sa_max)) r.anomalies.push_back(Anomaly::AboveSaThreshold);
  if (cand.orbital_reward < 0.0) r.anomalies.push_back(Anomaly::OrbitalsOutOfWindow);
  if (duplicate) r.anomalies.push_back(Anomaly::DuplicateOfExisting);
  return r;
}

}  // namespace osc::agents
