// SPDX-License-Identifier: Apache-2.0
#include "oscagent/agents/prompts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace osc::agents {
namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AgentError("TemplateError", "cannot read template " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require(const std::string& text, const std::string& name, const char* key) {
  if (text.find(std::string("{{") + key + "}}") == std::string::npos) {
    throw AgentError("TemplateError", name + " template lacks the {{" + std::string(key) + "}} placeholder");
  }
}

nlohmann::json number_or_null(double v, bool present) { return present && std::isfinite(v) ? nlohmann::json(v) : nullptr; }

}  // namespace

const char* to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::System;
  if (s == "user") return Role::User;
  if (s == "assistant") return Role::Assistant;
  throw AgentError("InvalidMessage", "unknown chat role '" + s + "'");
}

ChatMessage::ChatMessage(Role r, std::string text) : role(r), content(std::move(text)) {
  if (content.empty()) throw AgentError("InvalidMessage", std::string("empty ") + agents::to_string(r) + " message");
}

nlohmann::ordered_json to_json(const std::vector<ChatMessage>& messages) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    nlohmann::ordered_json j;
    j["role"] = to_string(m.role);
    j["content"] = m.content;
    arr.push_back(std::move(j));
  }
  return arr;
}

const char* to_string(Anomaly a) {
  switch (a) {
    case Anomaly::ParseFailure: return "parse-failure";
    case Anomaly::BelowPceThreshold: return "below-PCE-threshold";
    case Anomaly::AboveSaThreshold: return "above-SA-threshold";
    case Anomaly::OrbitalsOutOfWindow: return "out-of-window-orbitals";
    case Anomaly::DuplicateOfExisting: return "duplicate-of-existing";
  }
  return "unknown";
}

bool ExperimentReport::has(Anomaly a) const {
  for (auto x : anomalies)
    if (x == a) return true;
  return false;
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  const bool ok = parsed();
  nlohmann::ordered_json j;
  j["iteration"] = iteration;
  j["candidate_smiles"] = candidate_smiles;
  if (!error.empty()) j["error"] = error;
  nlohmann::ordered_json tools = nlohmann::ordered_json::object();
  for (const auto& [k, v] : tool_settings) tools[k] = v;
  j["tool_settings"] = std::move(tools);
  j["pce_mu"] = number_or_null(pce_mu, ok);
  j["pce_sigma"] = number_or_null(pce_sigma, ok);
  j["sascore"] = number_or_null(sascore, ok);
  j["homo"] = number_or_null(homo, ok);
  j["lumo"] = number_or_null(lumo, ok);
  j["orbital_reward"] = number_or_null(orbital_reward, ok);
  j["score"] = number_or_null(score, ok);
  auto flags = nlohmann::ordered_json::array();
  for (auto a : anomalies) flags.push_back(to_string(a));
  j["anomalies"] = std::move(flags);
  j["db_outcome"] = db_outcome;
  return j;
}

std::string render_report(const ExperimentReport& r) {
  std::ostringstream out;
  out << "Iteration: " << r.iteration << "\n";
  out << "Candidate: " << (r.candidate_smiles.empty() ? "(none extracted)" : r.candidate_smiles) << "\n";
  out << "Tools used:\n";
  for (const auto& [tool, setting] : r.tool_settings) out << "  - " << tool << ": " << setting << "\n";
  if (r.parsed()) {
    out << "Objective values: PCE " << fixed2(r.pce_mu) << " (sigma " << fixed2(r.pce_sigma) << "), SA score "
        << fixed2(r.sascore) << ", HOMO " << fixed2(r.homo) << " eV, LUMO " << fixed2(r.lumo)
        << " eV, orbital reward " << fixed2(r.orbital_reward) << ", composite score " << fixed2(r.score) << "\n";
  } else {
    out << "Objective values: not evaluated (parse error: " << r.error << ")\n";
  }
  out << "Database: " << r.db_outcome << "\n";
  out << "Anomalies: ";
  if (r.anomalies.empty()) out << "none";
  for (std::size_t i = 0; i < r.anomalies.size(); ++i) out << (i ? ", " : "") << to_string(r.anomalies[i]);
  out << "\n";
  return out.str();
}

PromptTemplates PromptTemplates::load(const std::string& dir) {
  PromptTemplates t;
  t.task = read_file(dir + "/task.txt");
  t.planner = read_file(dir + "/planner.txt");
  t.generator = read_file(dir + "/generator.txt");
  t.experimenter = read_file(dir + "/experimenter.txt");
  t.validate();
  return t;
}

const PromptTemplates& PromptTemplates::standard() {
  static const PromptTemplates t = load(std::string(OSC_DATA_DIR) + "/prompts");
  return t;
}

void PromptTemplates::validate() const {
  require(task, "task", "reference_examples");
  require(task, "task", "candidate_examples");
  require(planner, "planner", "last_report");
  require(generator, "generator", "plan");
  if (experimenter.empty()) throw AgentError("TemplateError", "experimenter template is empty");
}

std::string render_template(const std::string& text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::set<std::string> used;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    if (open == std::string::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string::npos) break;
    const std::string key = text.substr(open + 2, close - open - 2);
    const auto it = values.find(key);
    if (it == values.end()) throw AgentError("TemplateError", "no value for placeholder {{" + key + "}}");
    out.append(text, pos, open - pos);
    out += it->second;
    used.insert(key);
    pos = close + 2;
  }
  out.append(text, pos, std::string::npos);
  for (const auto& [key, _] : values) {
    if (!used.count(key)) throw AgentError("TemplateError", "template lacks the {{" + key + "}} placeholder");
  }
  return out;
}

std::string format_example(const retrieval::MoleculeRecord& rec) {
  return "SMILES: " + rec.smiles + ", PCE: " + fixed2(rec.pce) + ", sascore: " + fixed2(rec.sascore) +
         ", HOMO/LUMO: " + fixed2(rec.homo) + "/" + fixed2(rec.lumo);
}

std::string format_example(const retrieval::ScoredCandidate& cand) { return format_example(cand.record); }

namespace {

std::string task_text(const PromptContext& ctx, const PromptTemplates& templates) {
  if (ctx.reference_examples.empty()) throw AgentError("InvalidContext", "prompt needs reference examples");
  std::string refs, cands;
  for (const auto& r : ctx.reference_examples) refs += (refs.empty() ? "" : "\n") + format_example(r);
  for (const auto& c : ctx.candidate_examples) cands += (cands.empty() ? "" : "\n") + format_example(c);
  if (cands.empty()) cands = kNoCandidates;
  return render_template(templates.task, {{"reference_examples", refs}, {"candidate_examples", cands}});
}

}  // namespace

std::vector<ChatMessage> build_task_prompt(const PromptContext& ctx, const PromptTemplates& templates) {
  const std::string report = ctx.last_report ? render_report(*ctx.last_report) : std::string(kNoReport);
  return {ChatMessage(Role::System, render_template(templates.planner, {{"last_report", report}})),
          ChatMessage(Role::User, task_text(ctx, templates))};
}

std::vector<ChatMessage> build_generator_prompt(const PromptContext& ctx, const std::string& plan,
                                                const PromptTemplates& templates) {
  if (plan.empty()) throw AgentError("InvalidContext", "generator needs a non-empty plan");
  return {ChatMessage(Role::System, render_template(templates.generator, {{"plan", plan}})),
          ChatMessage(Role::User, task_text(ctx, templates))};
}

}  // namespace osc::agents
