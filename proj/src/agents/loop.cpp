// SPDX-License-Identifier: Apache-2.0
#include "oscagent/agents/loop.hpp"

#include <set>

#include "oscagent/chem/smiles.hpp"
#include "oscagent/metrics/metrics.hpp"

namespace osc::agents {
namespace {

template <class F>
std::optional<double> metric_or_none(F&& f) {
  try {
    return f();
  } catch (const metrics::MetricsError&) {
    return std::nullopt;
  }
}

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void LoopConfig::validate() const {
  if (iterations < 1) throw AgentError("InvalidConfig", "iterations must be at least 1");
  if (max_generation_retries < 1) throw AgentError("InvalidConfig", "max_generation_retries must be at least 1");
  if (max_backend_attempts < 1) throw AgentError("InvalidConfig", "max_backend_attempts must be at least 1");
  if (retrieval.k_reference < 1) throw AgentError("InvalidConfig", "k_reference must be at least 1");
  policy.validate();
  decoding.validate();
}

nlohmann::ordered_json LoopConfig::to_json() const {
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["max_generation_retries"] = max_generation_retries;
  j["max_backend_attempts"] = max_backend_attempts;
  j["k_reference"] = retrieval.k_reference;
  j["k_candidate"] = retrieval.k_candidate;
  j["seed"] = retrieval.seed;
  j["policy"] = {{"homo_min", policy.homo_min}, {"homo_max", policy.homo_max}, {"lumo_min", policy.lumo_min},
                 {"lumo_max", policy.lumo_max}, {"gamma", policy.gamma},       {"delta", policy.delta}};
  j["model"] = decoding.model;
  j["temperature"] = decoding.temperature;
  j["max_tokens"] = decoding.max_tokens;
  j["decoding_seed"] = decoding.seed ? nlohmann::ordered_json(*decoding.seed) : nlohmann::ordered_json(nullptr);
  j["budget"] = budget ? nlohmann::ordered_json(*budget) : nlohmann::ordered_json(nullptr);
  j["summary_top_k"] = summary_top_k;
  return j;
}

nlohmann::ordered_json RunSummary::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = status;
  j["iterations_requested"] = iterations_requested;
  j["iterations_run"] = iterations_run;
  j["requests_used"] = requests_used;
  j["retrieval_seeds"] = retrieval_seeds;
  auto history = nlohmann::ordered_json::array();
  for (const auto& v : top1_history) history.push_back(optional_number(v));
  j["top1_history"] = std::move(history);
  j["metrics"] = {{"generated", metrics.generated},
                  {"uniqueness", optional_number(metrics.uniqueness)},
                  {"novelty", optional_number(metrics.novelty)},
                  {"validity", optional_number(metrics.validity)},
                  {"avg_pce", optional_number(metrics.avg_pce)}};
  auto top = nlohmann::ordered_json::array();
  for (const auto& c : top_candidates) top.push_back(retrieval::to_json(c));
  j["top_candidates"] = std::move(top);
  auto fails = nlohmann::ordered_json::array();
  for (const auto& f : failures) fails.push_back({{"iteration", f.iteration}, {"kind", f.kind}, {"message", f.message}});
  j["failures"] = std::move(fails);
  auto reps = nlohmann::ordered_json::array();
  for (const auto& r : reports) reps.push_back(r.to_json());
  j["reports"] = std::move(reps);
  return j;
}

std::uint64_t iteration_seed(std::uint64_t base, int iteration) {
  return retrieval::splitmix64(base + static_cast<std::uint64_t>(iteration));
}

RunSummary run_loop(LlmBackend& backend, const LoopConfig& cfg,
                    const std::vector<retrieval::MoleculeRecord>& reference_db, const PropertyModels& models,
                    retrieval::CandidateDatabase& db, RunLog& log, const PromptTemplates& templates) {
  cfg.validate();
  if (reference_db.empty()) throw AgentError("InvalidContext", "reference database is empty");
  RecordingBackend recorder(backend, log);
  const CallOptions opts{cfg.decoding, cfg.max_backend_attempts};

  log.set_context(0, "loop");
  log.append("start", {{"config", cfg.to_json()}, {"experimenter_role", templates.experimenter}});

  std::set<std::string> reference_canonical;
  for (const auto& r : reference_db) {
    try {
      reference_canonical.insert(chem::canonical_smiles(r.smiles));
    } catch (const chem::ChemistryError&) {
    }
  }

  RunSummary summary;
  summary.status = "completed";
  summary.iterations_requested = cfg.iterations;
  metrics::GenerationSet generated;
  std::optional<ExperimentReport> last;

  auto record_top = [&] {
    const auto top = db.topk(1);
    summary.top1_history.push_back(top.empty() ? std::nullopt : std::optional<double>(top.front().score));
  };
  auto fail = [&](int it, const std::string& kind, const std::string& message) {
    summary.failures.push_back({it, kind, message});
    log.append("failure", {{"kind", kind}, {"message", message}});
  };

  for (int it = 1; it <= cfg.iterations; ++it) {
    if (cfg.budget && recorder.requests() >= *cfg.budget) {
      summary.status = "budget-exhausted";
      log.set_context(it, "loop");
      log.append("stop", {{"reason", "budget-exhausted"}, {"requests_used", recorder.requests()}});
      break;
    }
    summary.iterations_run = it;

    retrieval::RetrievalConfig rc = cfg.retrieval;
    rc.seed = iteration_seed(cfg.retrieval.seed, it);
    summary.retrieval_seeds.push_back(rc.seed);
    const auto sel = retrieval::kcenter_select(reference_db, rc);
    PromptContext ctx;
    ctx.iteration = it;
    ctx.last_report = last;
    for (auto idx : sel.indices) ctx.reference_examples.push_back(reference_db[idx]);
    ctx.candidate_examples = db.topk(cfg.retrieval.k_candidate);
    {
      log.set_context(it, "retrieval");
      auto cands = nlohmann::ordered_json::array();
      for (const auto& c : ctx.candidate_examples) cands.push_back(c.record.smiles);
      log.append("retrieval", {{"seed", rc.seed}, {"reference_indices", sel.indices}, {"candidates", cands}});
    }

    log.set_context(it, "planner");
    PlannerResult plan;
    try {
      plan = run_planner(recorder, ctx, opts, templates);
    } catch (const AgentError& e) {
      fail(it, e.kind(), e.what());
      record_top();
      continue;
    }
    log.append("plan", {{"text", plan.text}, {"attempts_used", plan.attempts_used}});

    log.set_context(it, "generator");
    ExperimentReport report;
    try {
      const auto proposal = run_generator(recorder, ctx, plan.text, cfg.max_generation_retries, opts, templates);
      log.append("proposal", {{"smiles", proposal.smiles},
                              {"design_focus", proposal.design_focus},
                              {"attempts_used", proposal.attempts_used}});
      log.set_context(it, "experimenter");
      report = run_experimenter(proposal.smiles, models, db, cfg.policy, it);
    } catch (const NoValidSmiles& e) {
      fail(it, e.kind(), e.what());
      report = parse_failure_report(e.last_candidate(), e.last_error(), it, models.settings());
    } catch (const AgentError& e) {
      fail(it, e.kind(), e.what());
      record_top();
      continue;
    }
    log.set_context(it, "experimenter");
    log.append("report", report.to_json());
    if (report.parsed()) {
      generated.add(report.candidate_smiles, report.pce_mu, report.sascore);
    } else {
      generated.add(report.candidate_smiles);
    }
    summary.reports.push_back(report);
    last = std::move(report);
    record_top();
  }

  summary.requests_used = recorder.requests();
  summary.metrics.generated = generated.size();
  summary.metrics.uniqueness = metric_or_none([&] { return metrics::uniqueness(generated); });
  summary.metrics.novelty = metric_or_none([&] { return metrics::novelty(generated, reference_canonical); });
  summary.metrics.validity = metric_or_none([&] { return metrics::validity_rate(generated); });
  summary.metrics.avg_pce = metric_or_none([&] { return metrics::avg_pce(generated); });
  summary.top_candidates = db.topk(cfg.summary_top_k);
  log.set_context(summary.iterations_run, "loop");
  log.append("summary", {{"status", summary.status}, {"requests_used", summary.requests_used}});
  return summary;
}

}  // namespace osc::agents
