// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscagent/agents/backend.hpp"
#include "oscagent/agents/prompts.hpp"
#include "oscagent/chem/molecule.hpp"
#include "oscagent/predictor/regressor.hpp"
#include "oscagent/predictor/sascore.hpp"
#include "oscagent/retrieval/candidate_db.hpp"

namespace osc::agents {

/// The Experimenter's tools.
class PropertyModels {
 public:
  virtual ~PropertyModels() = default;
  virtual predictor::ModelOutput pce(const chem::MoleculeGraph& mol) const = 0;
  virtual double sascore(const chem::MoleculeGraph& mol) const = 0;
  virtual std::pair<double, double> orbitals(const chem::MoleculeGraph& mol) const = 0;
  /// Tool name -> configuration summary, copied into every report.
  virtual std::map<std::string, std::string> settings() const = 0;
};

/// Fixed outputs for every molecule.
class StubModels : public PropertyModels {
 public:
  double mu = 0.0, sigma = 0.0, sa = 1.0, homo = -5.5, lumo = -3.5;

  StubModels() = default;
  StubModels(double mu_, double sigma_, double sa_, double homo_, double lumo_)
      : mu(mu_), sigma(sigma_), sa(sa_), homo(homo_), lumo(lumo_) {}
  predictor::ModelOutput pce(const chem::MoleculeGraph&) const override { return {mu, sigma}; }
  double sascore(const chem::MoleculeGraph&) const override { return sa; }
  std::pair<double, double> orbitals(const chem::MoleculeGraph&) const override { return {homo, lumo}; }
  std::map<std::string, std::string> settings() const override;
};

enum class Target { Pce, Homo, Lumo };

Target target_from_string(const std::string& name);
const char* to_string(Target t);

/// Fits a feature spec on the records and trains one regressor: Gaussian
/// for PCE, point for the orbital energies. The spec is stored in the model.
predictor::Regressor train_target(const std::vector<retrieval::MoleculeRecord>& records, Target target,
                                  const predictor::TrainConfig& cfg);

/// Trained surrogates plus the fragment table.
class SurrogateModels : public PropertyModels {
 public:
  predictor::Regressor pce_model;
  predictor::OrbitalModels orbital_models;
  predictor::SaScoreTable table;
  std::string table_source;

  /// Loads pce.json, homo.json and lumo.json from `dir`.
  static SurrogateModels load(const std::string& dir, const std::string& table_path);
  static SurrogateModels train(const std::vector<retrieval::MoleculeRecord>& records, const predictor::TrainConfig& cfg,
                               const std::string& table_path);

  predictor::ModelOutput pce(const chem::MoleculeGraph& mol) const override;
  double sascore(const chem::MoleculeGraph& mol) const override;
  std::pair<double, double> orbitals(const chem::MoleculeGraph& mol) const override;
  std::map<std::string, std::string> settings() const override;
};

struct CallOptions {
  DecodingConfig decoding;
  int max_attempts = 3;  // sends per request, first try included
};

struct PlannerResult {
  std::string text;
  int attempts_used = 0;
};

/// Pass-through of the Planner's reply; EmptyResponse when it is blank.
PlannerResult run_planner(LlmBackend& backend, const PromptContext& ctx, const CallOptions& opts = {},
                          const PromptTemplates& templates = PromptTemplates::standard());

struct GeneratorProposal {
  std::string raw_response;
  std::string smiles;
  std::string design_focus;
  int attempts_used = 0;
};

/// Raised after the last generation attempt; keeps what was rejected.
class NoValidSmiles : public AgentError {
 public:
  NoValidSmiles(const std::string& what, std::string last_candidate, std::string last_error)
      : AgentError("NoValidSmiles", what), last_candidate_(std::move(last_candidate)),
        last_error_(std::move(last_error)) {}
  const std::string& last_candidate() const { return last_candidate_; }
  const std::string& last_error() const { return last_error_; }

 private:
  std::string last_candidate_;
  std::string last_error_;
};

/// The text after the last `SMILES:` label (or on the line below a bare
/// label); without a label, the last whitespace-separated token that parses.
std::optional<std::string> extract_smiles(const std::string& response);
std::string extract_design_focus(const std::string& response);

/// Up to `max_generation_retries` replies; each rejection is sent back
/// with the parser's message.
GeneratorProposal run_generator(LlmBackend& backend, const PromptContext& ctx, const std::string& plan,
                                int max_generation_retries = 3, const CallOptions& opts = {},
                                const PromptTemplates& templates = PromptTemplates::standard());

struct Thresholds {
  double pce_min = 10.0;  // below-PCE-threshold unless mu > pce_min
  double sa_max = 8.0;    // above-SA-threshold unless sascore < sa_max
};

/// Evaluates one proposal and upserts it into `db`. Never throws for a bad
/// molecule: unparsable input yields a parse-failure report and no update.
ExperimentReport run_experimenter(const std::string& smiles, const PropertyModels& models,
                                  retrieval::CandidateDatabase& db, const retrieval::OrbitalPolicy& policy,
                                  int iteration = 0, const Thresholds& thresholds = {});

ExperimentReport parse_failure_report(const std::string& text, const std::string& error, int iteration,
                                      const std::map<std::string, std::string>& tool_settings = {});

}  // namespace osc::agents
