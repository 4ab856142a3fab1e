// SPDX-License-Identifier: Apache-2.0
#include "oscagent/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "oscagent/chem/smiles.hpp"
#include "oscagent/fp/fingerprint.hpp"
#include "oscagent/losses/losses.hpp"
#include "oscagent/metrics/metrics.hpp"
#include "oscagent/metrics/transport.hpp"
#include "oscagent/predictor/features.hpp"
#include "oscagent/retrieval/candidate_db.hpp"

namespace osc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class CliError : public std::runtime_error {
 public:
  CliError(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

std::string default_table() { return std::string(OSC_DATA_DIR) + "/sascore/fpscores.tsv.gz"; }

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <class T>
T config_number(const std::string& key, const std::string& value) {
  T v{};
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw agents::AgentError("ConfigError", key + ": not a valid number: '" + value + "'");
  }
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw CliError("IoError", "cannot write " + path);
}

fp::Fingerprint fingerprint(const chem::MoleculeGraph& mol, const std::string& kind, int parameter, int bits) {
  return fp::make_fingerprint(mol, fp::kind_from_string(kind), parameter, bits);
}

/// One entry per row, unparsable SMILES included. CSV needs a `smiles`
/// column; `.jsonl` lines need a "smiles" field. pce and sascore are optional.
metrics::GenerationSet read_generated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("IoError", "cannot open " + path);
  metrics::GenerationSet g;
  std::string line;
  if (fs::path(path).extension() == ".jsonl") {
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        auto number = [&](const char* a, const char* b) -> std::optional<double> {
          for (const char* k : {a, b}) {
            if (j.contains(k) && j.at(k).is_number()) return j.at(k).get<double>();
          }
          return std::nullopt;
        };
        g.add(j.at("smiles").get<std::string>(), number("pce", "pce_mu"), number("sascore", "sascore"));
      } catch (const nlohmann::json::exception& e) {
        throw CliError("BadInput", path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return g;
  }
  if (!std::getline(in, line)) throw CliError("BadInput", path + " is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(trim(c));
    return cells;
  };
  const auto header = split(trim(line));
  auto column = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto smiles_col = column("smiles");
  if (!smiles_col) throw CliError("BadInput", path + ": header has no smiles column");
  const auto pce_col = column("pce"), sa_col = column("sascore");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    auto cell = [&](std::optional<std::size_t> c) -> std::optional<double> {
      if (!c || *c >= cells.size()) return std::nullopt;
      return to_double(cells[*c]);
    };
    g.add(*smiles_col < cells.size() ? cells[*smiles_col] : "", cell(pce_col), cell(sa_col));
  }
  return g;
}

ordered_json candidate_json(const retrieval::ScoredCandidate& c) {
  auto j = retrieval::to_json(c);
  j["risk_adjusted_score"] = c.risk_adjusted_score();
  return j;
}

// ---- subcommands ----

void cmd_validate(const std::string& smiles, std::ostream& out) {
  const auto mol = chem::parse_smiles(smiles);
  ordered_json j;
  j["input"] = smiles;
  j["canonical"] = chem::canonicalize(mol);
  j["atoms"] = mol.num_atoms();
  j["bonds"] = mol.num_bonds();
  out << j.dump() << '\n';
}

void cmd_fingerprint(const std::string& smiles, const std::string& kind, int radius, int bits, std::ostream& out) {
  const auto f = fingerprint(chem::parse_smiles(smiles), kind, radius, bits);
  ordered_json j;
  j["smiles"] = smiles;
  j["kind"] = kind;
  j["parameter"] = radius;
  j["bits"] = bits;
  j["popcount"] = f.popcount();
  j["on_bits"] = f.on_bits();
  out << j.dump() << '\n';
}

void cmd_ingest(const std::string& csv, const std::string& out_path, std::ostream& out) {
  const auto report = retrieval::read_reference_csv(csv);
  ordered_json j;
  j["path"] = csv;
  j["records"] = report.records.size();
  auto rejected = ordered_json::array();
  for (const auto& [line, reason] : report.rejected) rejected.push_back({{"line", line}, {"reason", reason}});
  j["rejected"] = std::move(rejected);
  if (!out_path.empty()) {
    std::string text = "smiles,pce,sascore,homo,lumo\n";
    for (const auto& r : report.records) {
      text += r.smiles + "," + shortest(r.pce) + "," + shortest(r.sascore) + "," + shortest(r.homo) + "," +
              shortest(r.lumo) + "\n";
    }
    write_text(out_path, text);
    j["written"] = out_path;
  }
  out << j.dump(2) << '\n';
}

void cmd_train(const std::string& target_name, const std::string& data, const std::string& model_out,
               const predictor::TrainConfig& cfg, std::ostream& out) {
  const auto target = agents::target_from_string(target_name);
  const auto records = retrieval::read_reference_csv(data).records;
  if (records.size() < 2) throw CliError("TooFewSamples", data + " has fewer than two usable records");
  const auto model = agents::train_target(records, target, cfg);
  model.save(model_out);
  const auto& meta = model.metadata();
  ordered_json j;
  j["target"] = target_name;
  j["samples"] = records.size();
  j["head"] = model.kind() == predictor::HeadKind::Gaussian ? "gaussian" : "point";
  j["epochs"] = meta.epochs;
  j["seed"] = meta.seed;
  j["final_loss"] = meta.final_loss;
  j["train_mae"] = meta.train_mae;
  j["out"] = model_out;
  out << j.dump(2) << '\n';
}

void cmd_sa(const std::string& smiles, const std::string& table_path, std::ostream& out) {
  const auto table = predictor::SaScoreTable::load(table_path);
  const auto mol = chem::parse_smiles(smiles);
  const auto t = predictor::sa_score_terms(mol, table);
  ordered_json j;
  j["smiles"] = chem::canonicalize(mol);
  j["sascore"] = t.value;
  j["fragment_score"] = t.fragment_score;
  j["size_penalty"] = t.size_penalty;
  j["stereo_penalty"] = t.stereo_penalty;
  j["spiro_penalty"] = t.spiro_penalty;
  j["bridge_penalty"] = t.bridge_penalty;
  j["macrocycle_penalty"] = t.macrocycle_penalty;
  j["symmetry_correction"] = t.symmetry_correction;
  out << j.dump(2) << '\n';
}

void cmd_score(const std::string& smiles, const std::string& models_dir, const std::string& table_path,
               std::ostream& out) {
  const auto models = agents::SurrogateModels::load(models_dir, table_path);
  retrieval::CandidateDatabase scratch;
  const auto report = agents::run_experimenter(smiles, models, scratch, {});
  out << report.to_json().dump(2) << '\n';
}

void cmd_retrieve(const std::string& reference, std::size_t k, std::uint64_t seed, const std::string& db_path,
                  std::size_t k_candidate, std::ostream& out) {
  const auto records = retrieval::read_reference_csv(reference).records;
  retrieval::RetrievalConfig cfg;
  cfg.k_reference = k;
  cfg.seed = seed;
  const auto sel = retrieval::kcenter_select(records, cfg);
  ordered_json j;
  j["seed"] = seed;
  j["k"] = k;
  j["indices"] = sel.indices;
  auto refs = ordered_json::array();
  for (auto i : sel.indices) refs.push_back(agents::format_example(records[i]));
  j["reference_examples"] = std::move(refs);
  if (!db_path.empty()) {
    if (!fs::exists(db_path)) throw CliError("IoError", "no candidate database at " + db_path);
    retrieval::CandidateDatabase db(db_path);
    auto cands = ordered_json::array();
    for (const auto& c : db.topk(k_candidate)) cands.push_back(agents::format_example(c));
    j["candidate_examples"] = std::move(cands);
  }
  out << j.dump(2) << '\n';
}

void cmd_run(const std::string& config, const std::string& out_dir, std::optional<std::uint64_t> seed,
             std::ostream& out) {
  auto s = load_run_config(config, out_dir);
  if (seed) s.loop.retrieval.seed = *seed;
  const auto reference = retrieval::read_reference_csv(s.reference).records;
  const auto templates = s.prompts.empty() ? agents::PromptTemplates::standard() : agents::PromptTemplates::load(s.prompts);
  const std::string table = s.sascore_table.empty() ? default_table() : s.sascore_table;
  const auto models = s.models == "train" ? agents::SurrogateModels::train(reference, s.train, table)
                                          : agents::SurrogateModels::load(s.models, table);
  std::unique_ptr<agents::LlmBackend> backend;
  if (s.backend == "scripted") {
    backend = std::make_unique<agents::ScriptedBackend>(agents::ScriptedBackend::from_log(s.script));
  } else {
    backend = std::make_unique<agents::HttpBackend>(s.http);
  }
  for (const auto* p : {&s.candidate_db, &s.run_log, &s.summary}) {
    const fs::path path(*p);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
  }
  fs::remove(s.candidate_db);  // every run starts from an empty candidate set
  retrieval::CandidateDatabase db(s.candidate_db);
  agents::RunLog log(s.run_log);
  const auto summary = agents::run_loop(*backend, s.loop, reference, models, db, log, templates);
  db.save();
  write_text(s.summary, summary.to_json().dump(2) + "\n");
  ordered_json j;
  j["status"] = summary.status;
  j["iterations_run"] = summary.iterations_run;
  j["requests_used"] = summary.requests_used;
  j["candidates"] = db.size();
  j["failures"] = summary.failures.size();
  j["candidate_db"] = s.candidate_db;
  j["summary"] = s.summary;
  j["run_log"] = s.run_log;
  out << j.dump(2) << '\n';
}

void cmd_eval(const std::string& generated_path, const std::string& reference_path, const std::string& kind,
              int radius, int bits, const metrics::Thresholds& thresholds, double epsilon, std::ostream& out) {
  const auto g = read_generated(generated_path);
  if (g.size() == 0) throw CliError("EmptySet", generated_path + " has no molecules");
  const auto reference = retrieval::read_reference_csv(reference_path).records;
  if (reference.empty()) throw CliError("EmptySet", reference_path + " has no usable records");
  std::set<std::string> ref_canonical;
  std::vector<fp::Fingerprint> ref_fps, gen_fps;
  for (const auto& r : reference) {
    ref_canonical.insert(r.smiles);
    ref_fps.push_back(fingerprint(chem::parse_smiles(r.smiles), kind, radius, bits));
  }
  for (const auto& m : g.molecules) {
    if (m.parsed()) gen_fps.push_back(fingerprint(*m.graph, kind, radius, bits));
  }
  const auto validity = metrics::validity(g, thresholds);
  ordered_json j;
  j["generated"] = g.size();
  j["parsed"] = gen_fps.size();
  j["reference"] = reference.size();
  j["fingerprint"] = {{"kind", kind}, {"parameter", radius}, {"bits", bits}};
  j["uniqueness"] = metrics::uniqueness(g);
  j["novelty"] = metrics::novelty(g, ref_canonical);
  j["validity"] = validity.rate();
  j["valid"] = validity.valid;
  j["missing_predictions"] = validity.missing_predictions.size();
  if (validity.valid > 0) {
    j["avg_pce"] = metrics::avg_pce(g, thresholds);
  } else {
    j["avg_pce"] = nullptr;
  }
  if (gen_fps.empty()) {
    j["mean_tanimoto"] = nullptr;
    j["wasserstein_distance"] = nullptr;
    j["wasserstein_similarity"] = nullptr;
  } else {
    double total = 0.0;
    for (const auto& a : gen_fps)
      for (const auto& b : ref_fps) total += metrics::tanimoto(a, b);
    j["mean_tanimoto"] = total / static_cast<double>(gen_fps.size() * ref_fps.size());
    metrics::SinkhornConfig sc;
    sc.epsilon = epsilon;
    const auto plan = metrics::sinkhorn_distance(metrics::cost_matrix(gen_fps, ref_fps), sc);
    j["wasserstein_distance"] = plan.distance;
    j["wasserstein_similarity"] = metrics::wasserstein_similarity(plan.distance);
    j["sinkhorn"] = {{"epsilon", epsilon}, {"iterations", plan.iterations_used}, {"converged", plan.converged}};
  }
  out << j.dump(2) << '\n';
}

void cmd_report(const std::string& db_path, std::size_t top, bool risk_adjusted, std::ostream& out) {
  if (!fs::exists(db_path)) throw CliError("IoError", "no candidate database at " + db_path);
  const retrieval::CandidateDatabase db(db_path);
  auto arr = ordered_json::array();
  for (const auto& c : db.topk(top, risk_adjusted)) arr.push_back(candidate_json(c));
  ordered_json j;
  j["db"] = db_path;
  j["size"] = db.size();
  j["ranking"] = risk_adjusted ? "risk-adjusted" : "score";
  j["top"] = std::move(arr);
  out << j.dump(2) << '\n';
}

template <class E>
int domain_failure(const E& e, std::ostream& err) {
  print_error(err, e.kind(), e.what());
  return 1;
}

}  // namespace

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw agents::AgentError("ConfigError", "cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw agents::AgentError("ConfigError", path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw agents::AgentError("ConfigError", path + ":" + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw agents::AgentError("ConfigError", path + ":" + std::to_string(line_no) + ": duplicate key " + key);
    }
  }
  return kv;
}

RunSettings load_run_config(const std::string& path, const std::string& out_dir) {
  const auto kv = read_key_values(path);
  const fs::path base = fs::path(path).parent_path();
  auto input = [&](const std::string& v) -> std::string {
    if (v.empty() || fs::path(v).is_absolute()) return v;
    return (base / v).lexically_normal().string();
  };
  auto output = [&](const std::string& v) -> std::string {
    if (fs::path(v).is_absolute() || out_dir.empty()) return v;
    return (fs::path(out_dir) / v).lexically_normal().string();
  };
  RunSettings s;
  auto& L = s.loop;
  for (const auto& [key, v] : kv) {
    if (key == "reference") s.reference = input(v);
    else if (key == "backend") s.backend = v;
    else if (key == "script") s.script = input(v);
    else if (key == "base_url") s.http.base_url = v;
    else if (key == "api_key_env") s.http.api_key_env = v;
    else if (key == "model") L.decoding.model = v;
    else if (key == "temperature") L.decoding.temperature = config_number<double>(key, v);
    else if (key == "max_tokens") L.decoding.max_tokens = config_number<int>(key, v);
    else if (key == "decoding_seed") L.decoding.seed = config_number<std::uint64_t>(key, v);
    else if (key == "timeout_seconds") L.decoding.timeout_seconds = config_number<double>(key, v);
    else if (key == "iterations") L.iterations = config_number<int>(key, v);
    else if (key == "max_generation_retries") L.max_generation_retries = config_number<int>(key, v);
    else if (key == "max_backend_attempts") L.max_backend_attempts = config_number<int>(key, v);
    else if (key == "k_reference") L.retrieval.k_reference = config_number<std::size_t>(key, v);
    else if (key == "k_candidate") L.retrieval.k_candidate = config_number<std::size_t>(key, v);
    else if (key == "seed") L.retrieval.seed = config_number<std::uint64_t>(key, v);
    else if (key == "budget") L.budget = config_number<std::size_t>(key, v);
    else if (key == "summary_top_k") L.summary_top_k = config_number<std::size_t>(key, v);
    else if (key == "homo_min") L.policy.homo_min = config_number<double>(key, v);
    else if (key == "homo_max") L.policy.homo_max = config_number<double>(key, v);
    else if (key == "lumo_min") L.policy.lumo_min = config_number<double>(key, v);
    else if (key == "lumo_max") L.policy.lumo_max = config_number<double>(key, v);
    else if (key == "gamma") L.policy.gamma = config_number<double>(key, v);
    else if (key == "delta") L.policy.delta = config_number<double>(key, v);
    else if (key == "models") s.models = v == "train" ? v : input(v);
    else if (key == "train.hidden") s.train.hidden = config_number<int>(key, v);
    else if (key == "train.epochs") s.train.epochs = config_number<int>(key, v);
    else if (key == "train.batch_size") s.train.batch_size = config_number<int>(key, v);
    else if (key == "train.learning_rate") s.train.learning_rate = config_number<double>(key, v);
    else if (key == "train.dropout") s.train.dropout = config_number<double>(key, v);
    else if (key == "train.weight_decay") s.train.weight_decay = config_number<double>(key, v);
    else if (key == "train.alpha") s.train.alpha = config_number<double>(key, v);
    else if (key == "train.seed") s.train.seed = config_number<std::uint64_t>(key, v);
    else if (key == "sascore_table") s.sascore_table = input(v);
    else if (key == "prompts") s.prompts = input(v);
    else if (key == "candidate_db") s.candidate_db = v;
    else if (key == "run_log") s.run_log = v;
    else if (key == "summary") s.summary = v;
    else throw agents::AgentError("ConfigError", path + ": unknown key " + key);
  }
  s.candidate_db = output(s.candidate_db);
  s.run_log = output(s.run_log);
  s.summary = output(s.summary);
  if (s.reference.empty()) throw agents::AgentError("ConfigError", path + ": reference is required");
  if (s.backend == "scripted") {
    if (s.script.empty()) throw agents::AgentError("ConfigError", path + ": scripted backend needs script");
  } else if (s.backend != "http") {
    throw agents::AgentError("ConfigError", path + ": backend must be scripted or http");
  }
  L.validate();
  s.train.validate();
  return s;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Agentic design loop for organic solar cell acceptors", "oscagent"};
  app.require_subcommand(1, 1);

  std::string smiles, kind = "morgan", path, data, model_out, models_dir, table = default_table(), reference,
                      db_path, config, out_dir, target, generated;
  int radius = 2, bits = 2048;
  std::size_t k = 5, k_candidate = 3, top = 10;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> run_seed;
  bool risk_adjusted = false;
  double epsilon = 0.005;
  metrics::Thresholds thresholds;
  predictor::TrainConfig train_cfg;

  auto* validate = app.add_subcommand("validate", "Parse a SMILES string and print its canonical form");
  validate->add_option("smiles", smiles)->required();

  auto* fingerprint_cmd = app.add_subcommand("fingerprint", "Print the on-bits of a fingerprint");
  fingerprint_cmd->add_option("smiles", smiles)->required();
  fingerprint_cmd->add_option("--kind", kind)->check(CLI::IsMember({"morgan", "path"}));
  fingerprint_cmd->add_option("--radius", radius, "Morgan radius or path length")->check(CLI::Range(0, 7));
  fingerprint_cmd->add_option("--bits", bits)->check(CLI::Range(1, 1 << 20));

  auto* ingest = app.add_subcommand("ingest-reference", "Validate and canonicalize a reference CSV");
  ingest->add_option("csv", path)->required();
  ingest->add_option("--out", model_out, "Write the cleaned records as CSV");

  auto* train = app.add_subcommand("train", "Train a surrogate model");
  train->add_option("--target", target)->required()->check(CLI::IsMember({"pce", "homo", "lumo"}));
  train->add_option("--data", data)->required();
  train->add_option("--out", model_out)->required();
  train->add_option("--hidden", train_cfg.hidden);
  train->add_option("--epochs", train_cfg.epochs);
  train->add_option("--batch-size", train_cfg.batch_size);
  train->add_option("--lr", train_cfg.learning_rate);
  train->add_option("--dropout", train_cfg.dropout);
  train->add_option("--weight-decay", train_cfg.weight_decay);
  train->add_option("--alpha", train_cfg.alpha);
  train->add_option("--seed", train_cfg.seed);

  auto* sa = app.add_subcommand("sa", "Synthetic accessibility score");
  sa->add_option("smiles", smiles)->required();
  sa->add_option("--table", table);

  auto* score = app.add_subcommand("score", "Evaluate one molecule with trained surrogates");
  score->add_option("smiles", smiles)->required();
  score->add_option("--models", models_dir)->required();
  score->add_option("--table", table);

  auto* retrieve = app.add_subcommand("retrieve", "K-center selection from a reference CSV");
  retrieve->add_option("--reference", reference)->required();
  retrieve->add_option("--k", k);
  retrieve->add_option("--seed", seed);
  retrieve->add_option("--db", db_path, "Also list top candidates from this database");
  retrieve->add_option("--k-candidate", k_candidate);

  auto* run = app.add_subcommand("run", "Run the design loop from a key=value config");
  run->add_option("--config", config)->required();
  run->add_option("--out-dir", out_dir, "Directory for relative output paths");
  run->add_option("--seed", run_seed, "Override the retrieval seed");

  auto* eval = app.add_subcommand("eval", "Metrics of a generated set against a reference CSV");
  eval->add_option("--generated", generated)->required();
  eval->add_option("--reference", reference)->required();
  eval->add_option("--fingerprint", kind)->check(CLI::IsMember({"morgan", "path"}));
  eval->add_option("--radius", radius)->check(CLI::Range(0, 7));
  eval->add_option("--bits", bits)->check(CLI::Range(1, 1 << 20));
  eval->add_option("--pce-min", thresholds.pce_min);
  eval->add_option("--sa-max", thresholds.sa_max);
  eval->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Top candidates of a candidate database");
  report->add_option("--db", db_path)->required();
  report->add_option("--top", top);
  report->add_flag("--risk-adjusted", risk_adjusted, "Rank by score minus sigma");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    print_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (*validate) cmd_validate(smiles, out);
    else if (*fingerprint_cmd) cmd_fingerprint(smiles, kind, radius, bits, out);
    else if (*ingest) cmd_ingest(path, model_out, out);
    else if (*train) cmd_train(target, data, model_out, train_cfg, out);
    else if (*sa) cmd_sa(smiles, table, out);
    else if (*score) cmd_score(smiles, models_dir, table, out);
    else if (*retrieve) cmd_retrieve(reference, k, seed, db_path, k_candidate, out);
    else if (*run) cmd_run(config, out_dir, run_seed, out);
    else if (*eval) cmd_eval(generated, reference, kind, radius, bits, thresholds, epsilon, out);
    else if (*report) cmd_report(db_path, top, risk_adjusted, out);
    return 0;
  } catch (const chem::ChemistryError& e) {
    return domain_failure(e, err);
  } catch (const fp::FingerprintError& e) {
    return domain_failure(e, err);
  } catch (const metrics::MetricsError& e) {
    return domain_failure(e, err);
  } catch (const retrieval::RetrievalError& e) {
    return domain_failure(e, err);
  } catch (const losses::LossError& e) {
    return domain_failure(e, err);
  } catch (const predictor::PredictorError& e) {
    return domain_failure(e, err);
  } catch (const agents::AgentError& e) {
    return domain_failure(e, err);
  } catch (const CliError& e) {
    return domain_failure(e, err);
  } catch (const fs::filesystem_error& e) {
    print_error(err, "IoError", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "InternalError", e.what());
    return 1;
  }
}

}  // namespace osc::cli
