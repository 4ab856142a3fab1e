// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscagent/retrieval/retrieval.hpp"

namespace osc::agents {

class AgentError : public std::runtime_error {
 public:
  AgentError(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

enum class Role { System, User, Assistant };

const char* to_string(Role r);
Role role_from_string(const std::string& s);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  /// Throws InvalidMessage on empty content.
  ChatMessage(Role r, std::string text);
};

nlohmann::ordered_json to_json(const std::vector<ChatMessage>& messages);

enum class Anomaly { ParseFailure, BelowPceThreshold, AboveSaThreshold, OrbitalsOutOfWindow, DuplicateOfExisting };

const char* to_string(Anomaly a);

struct ExperimentReport {
  int iteration = 0;
  std::string candidate_smiles;  // canonical; the raw text on parse failure
  std::string error;             // parser message on parse failure
  std::map<std::string, std::string> tool_settings;
  double pce_mu = 0.0;
  double pce_sigma = 0.0;
  double sascore = 0.0;
  double homo = 0.0;
  double lumo = 0.0;
  double orbital_reward = 0.0;
  double score = 0.0;
  std::vector<Anomaly> anomalies;
  std::string db_outcome;  // inserted, replaced, kept-existing or skipped

  bool has(Anomaly a) const;
  bool parsed() const { return !has(Anomaly::ParseFailure); }
  nlohmann::ordered_json to_json() const;
};

/// Plain-text report handed to the Planner on the next iteration.
std::string render_report(const ExperimentReport& report);

struct PromptContext {
  std::vector<retrieval::MoleculeRecord> reference_examples;
  std::vector<retrieval::ScoredCandidate> candidate_examples;
  std::optional<ExperimentReport> last_report;
  int iteration = 0;
};

/// The four role templates. Placeholders are `{{name}}`.
struct PromptTemplates {
  std::string task;
  std::string planner;
  std::string generator;
  std::string experimenter;

  /// Reads task.txt, planner.txt, generator.txt and experimenter.txt.
  static PromptTemplates load(const std::string& dir);
  /// The copies shipped under the data directory.
  static const PromptTemplates& standard();
  /// TemplateError when a required placeholder is missing.
  void validate() const;
};

inline constexpr const char* kNoCandidates = "(no prior candidates)";
inline constexpr const char* kNoReport = "(no prior report)";

/// Replaces every `{{key}}`; TemplateError for a key absent from the text
/// or a placeholder left without a value.
std::string render_template(const std::string& text, const std::map<std::string, std::string>& values);

std::string format_example(const retrieval::MoleculeRecord& rec);
std::string format_example(const retrieval::ScoredCandidate& cand);

/// Planner conversation: the planner role (with the last report) as the
/// system message and the task with both example blocks as the user message.
std::vector<ChatMessage> build_task_prompt(const PromptContext& ctx,
                                           const PromptTemplates& templates = PromptTemplates::standard());

/// Generator conversation: the generator role carrying the plan, then the task.
std::vector<ChatMessage> build_generator_prompt(const PromptContext& ctx, const std::string& plan,
                                                const PromptTemplates& templates = PromptTemplates::standard());

}  // namespace osc::agents
