// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscagent/agents/agents.hpp"

namespace osc::agents {

struct LoopConfig {
  int iterations = 10;
  int max_generation_retries = 3;
  int max_backend_attempts = 3;
  retrieval::RetrievalConfig retrieval;
  retrieval::OrbitalPolicy policy;
  DecodingConfig decoding;
  /// Total backend sends allowed. Checked before each iteration starts, so
  /// a started iteration always runs to the end.
  std::optional<std::size_t> budget;
  std::size_t summary_top_k = 5;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct IterationFailure {
  int iteration = 0;
  std::string kind;
  std::string message;
};

struct RunMetrics {
  std::size_t generated = 0;
  std::optional<double> uniqueness;
  std::optional<double> novelty;
  std::optional<double> validity;
  std::optional<double> avg_pce;
};

struct RunSummary {
  std::string status;  // completed or budget-exhausted
  int iterations_requested = 0;
  int iterations_run = 0;
  std::size_t requests_used = 0;
  std::vector<std::uint64_t> retrieval_seeds;
  std::vector<ExperimentReport> reports;
  std::vector<IterationFailure> failures;
  /// Best database score after each iteration; empty database gives null.
  std::vector<std::optional<double>> top1_history;
  RunMetrics metrics;
  std::vector<retrieval::ScoredCandidate> top_candidates;

  nlohmann::ordered_json to_json() const;
};

/// Seed of the reference retrieval for a 1-based iteration.
std::uint64_t iteration_seed(std::uint64_t base, int iteration);

/// Planner -> Generator -> Experimenter for `cfg.iterations` rounds.
/// Failures inside an iteration are recorded and skipped; PersistenceError
/// from the database propagates.
RunSummary run_loop(LlmBackend& backend, const LoopConfig& cfg,
                    const std::vector<retrieval::MoleculeRecord>& reference_db, const PropertyModels& models,
                    retrieval::CandidateDatabase& db, RunLog& log,
                    const PromptTemplates& templates = PromptTemplates::standard());

}  // namespace osc::agents
