// SPDX-License-Identifier: Apache-2.0
#include "oscagent/cli/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oscagent/chem/smiles.hpp"
#include "oscagent/fp/fingerprint.hpp"
#include "oscagent/predictor/sascore.hpp"

namespace fs = std::filesystem;
using namespace osc;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
  nlohmann::json json() const { return nlohmann::json::parse(out); }
  nlohmann::json error() const { return nlohmann::json::parse(err); }
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = osc::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("osc_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

const std::string kData = OSC_DATA_DIR;
const std::string kDemoRef = kData + "/demo/reference.csv";

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, ValidateReportsTheUnclosedRing) {
  const auto r = run_cli({"validate", "C1CC"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(count_lines(r.err), 1u);
  EXPECT_EQ(r.error()["error"], "GrammarError");
  EXPECT_NE(r.error()["message"].get<std::string>().find("unclosed ring bond 1"), std::string::npos);
  const auto ok = run_cli({"validate", "OCC"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.json()["canonical"], chem::canonical_smiles("CCO"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  const auto r = run_cli({"validate", "CCO", "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.error()["error"], "UsageError");
  EXPECT_EQ(run_cli({"train", "--target", "gap", "--data", kDemoRef, "--out", "x"}).code, 2);
  EXPECT_EQ(run_cli({"fingerprint", "CCO", "--kind", "maccs"}).code, 2);
  EXPECT_EQ(run_cli({"report"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, FingerprintMatchesLibrary) {
  const auto r = run_cli({"fingerprint", "c1ccccc1O", "--radius", "3", "--bits", "1024"});
  ASSERT_EQ(r.code, 0);
  const auto expected = fp::morgan_fingerprint(chem::parse_smiles("c1ccccc1O"), 3, 1024).on_bits();
  EXPECT_EQ(r.json()["on_bits"].get<std::vector<int>>(), expected);
  const auto p = run_cli({"fingerprint", "CCO", "--kind", "path", "--radius", "4"});
  ASSERT_EQ(p.code, 0);
  EXPECT_EQ(p.json()["on_bits"].get<std::vector<int>>(), fp::path_fingerprint(chem::parse_smiles("CCO"), 4).on_bits());
}

TEST(Cli, IngestReference) {
  const auto cleaned = scratch("clean.csv");
  const auto r = run_cli({"ingest-reference", std::string(OSC_TEST_DATA) + "/reference_toy.csv", "--out", cleaned.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["records"], 4);
  const auto report = r.json();
  std::vector<int> lines;
  for (const auto& x : report["rejected"]) lines.push_back(x["line"]);
  EXPECT_EQ(lines, (std::vector<int>{2, 6, 7, 8, 9, 10, 11}));
  const auto again = run_cli({"ingest-reference", cleaned.string()});
  EXPECT_EQ(again.json()["records"], 4);
  EXPECT_TRUE(again.json()["rejected"].empty());
  EXPECT_EQ(run_cli({"ingest-reference", "/nonexistent.csv"}).code, 1);
}

TEST(Cli, SaMatchesLibrary) {
  const auto r = run_cli({"sa", "c1ccccc1O"});
  ASSERT_EQ(r.code, 0);
  const auto table = predictor::SaScoreTable::load(kData + "/sascore/fpscores.tsv.gz");
  EXPECT_EQ(r.json()["sascore"].get<double>(), predictor::sa_score(chem::parse_smiles("c1ccccc1O"), table));
  EXPECT_EQ(run_cli({"sa", "CCO", "--table", "/nonexistent"}).code, 1);
}

TEST(Cli, RetrieveMatchesSelection) {
  const auto r = run_cli({"retrieve", "--reference", kDemoRef, "--k", "4", "--seed", "9"});
  ASSERT_EQ(r.code, 0);
  retrieval::RetrievalConfig cfg;
  cfg.k_reference = 4;
  cfg.seed = 9;
  const auto sel = retrieval::kcenter_select(retrieval::read_reference_csv(kDemoRef).records, cfg);
  EXPECT_EQ(r.json()["indices"].get<std::vector<std::size_t>>(), sel.indices);
  EXPECT_EQ(run_cli({"retrieve", "--reference", kDemoRef, "--k", "500"}).error()["error"], "KTooLarge");
}

TEST(Cli, EvalOnTheReferenceItself) {
  const auto r = run_cli({"eval", "--generated", kDemoRef, "--reference", kDemoRef, "--fingerprint", "morgan"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.json();
  // Counted straight from the CSV columns.
  std::ifstream in(kDemoRef);
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0, valid = 0;
  double pce_sum = 0.0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string smi, pce, sa;
    std::getline(ss, smi, ',');
    std::getline(ss, pce, ',');
    std::getline(ss, sa, ',');
    ++rows;
    if (std::stod(pce) > 10.0 && std::stod(sa) < 8.0) {
      ++valid;
      pce_sum += std::stod(pce);
    }
  }
  EXPECT_EQ(j["generated"], rows);
  EXPECT_EQ(j["uniqueness"], 1.0);
  EXPECT_EQ(j["novelty"], 0.0);
  EXPECT_EQ(j["valid"], valid);
  EXPECT_DOUBLE_EQ(j["validity"].get<double>(), static_cast<double>(valid) / static_cast<double>(rows));
  EXPECT_NEAR(j["avg_pce"].get<double>(), pce_sum / static_cast<double>(valid), 1e-12);
  EXPECT_GE(j["wasserstein_similarity"].get<double>(), 0.999);
  EXPECT_LE(j["wasserstein_similarity"].get<double>(), 1.0);
}

TEST(Cli, EvalKeepsBadRows) {
  const auto gen = scratch("gen.csv");
  std::ofstream(gen) << "smiles,pce,sascore\nCCO,12,3\nOCC,12,3\nC1CC,15,2\nc1ccccc1,10,2\n";
  const auto r = run_cli({"eval", "--generated", gen.string(), "--reference", kDemoRef});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["generated"], 4);
  EXPECT_EQ(r.json()["uniqueness"], 0.75);
  // Unparsable rows are never novel.
  EXPECT_EQ(r.json()["novelty"], 0.75);
  EXPECT_EQ(r.json()["validity"], 0.5);
  EXPECT_EQ(r.json()["avg_pce"], 12.0);
}

TEST(Cli, TrainScoreRoundTrip) {
  const auto dir = scratch("models");
  fs::create_directories(dir);
  for (const char* t : {"pce", "homo", "lumo"}) {
    const auto r = run_cli({"train", "--target", t, "--data", kDemoRef, "--out", (dir / (std::string(t) + ".json")).string(),
                        "--hidden", "8", "--epochs", "3", "--batch-size", "16", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.json()["samples"], 64);
  }
  const auto s = run_cli({"score", "c1ccsc1C#N", "--models", dir.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto j = s.json();
  EXPECT_EQ(j["score"].get<double>(),
            j["pce_mu"].get<double>() - j["sascore"].get<double>() + j["orbital_reward"].get<double>());
  const auto bad = run_cli({"score", "C1CC", "--models", dir.string()});
  EXPECT_EQ(bad.code, 0);
  EXPECT_EQ(bad.json()["anomalies"][0], "parse-failure");
  EXPECT_EQ(run_cli({"score", "CCO", "--models", "/nonexistent"}).code, 1);
}

TEST(Cli, DemoRunMatchesGoldenFiles) {
  const auto out = scratch("demo");
  fs::remove_all(out);
  const auto r = run_cli({"run", "--config", kData + "/demo/demo.cfg", "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["status"], "completed");
  const std::string golden = std::string(OSC_TEST_DATA) + "/golden/";
  if (std::getenv("OSC_UPDATE_GOLDEN")) {
    fs::copy_file(out / "candidates.jsonl", golden + "demo_candidates.jsonl", fs::copy_options::overwrite_existing);
    fs::copy_file(out / "summary.json", golden + "demo_summary.json", fs::copy_options::overwrite_existing);
  }
  EXPECT_EQ(slurp(out / "candidates.jsonl"), slurp(golden + "demo_candidates.jsonl"));
  EXPECT_EQ(slurp(out / "summary.json"), slurp(golden + "demo_summary.json"));

  const auto report = run_cli({"report", "--db", (out / "candidates.jsonl").string(), "--top", "3"});
  ASSERT_EQ(report.code, 0);
  const auto top = report.json()["top"];
  ASSERT_EQ(top.size(), 3u);
  EXPECT_GE(top[0]["score"].get<double>(), top[1]["score"].get<double>());
  EXPECT_EQ(top[0]["score"], nlohmann::json::parse(slurp(out / "summary.json"))["top_candidates"][0]["score"]);

  const auto ev = run_cli({"eval", "--generated", (out / "candidates.jsonl").string(), "--reference", kDemoRef});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(ev.json()["generated"], 10);
}

TEST(Cli, RunConfigErrors) {
  const auto cfg = scratch("bad.cfg");
  std::ofstream(cfg) << "reference = " << kDemoRef << "\nbackend = scripted\nscript = x.jsonl\nflavour = mint\n";
  const auto r = run_cli({"run", "--config", cfg.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.error()["error"], "ConfigError");
  std::ofstream(cfg, std::ios::trunc) << "reference = " << kDemoRef << "\nbackend = scripted\nscript = x\niterations = two\n";
  EXPECT_EQ(run_cli({"run", "--config", cfg.string()}).error()["error"], "ConfigError");
  std::ofstream(cfg, std::ios::trunc) << "reference = " << kDemoRef << "\nbackend = scripted\nscript = x\niterations = 0\n";
  EXPECT_EQ(run_cli({"run", "--config", cfg.string()}).error()["error"], "InvalidConfig");
  std::ofstream(cfg, std::ios::trunc) << "reference = " << kDemoRef << "\nbackend = carrier-pigeon\n";
  EXPECT_EQ(run_cli({"run", "--config", cfg.string()}).code, 1);
}

TEST(Cli, ConfigPathsResolve) {
  const auto s = osc::cli::load_run_config(kData + "/demo/demo.cfg", "/tmp/outdir");
  EXPECT_EQ(s.reference, fs::path(kData + "/demo/reference.csv").lexically_normal().string());
  EXPECT_EQ(s.candidate_db, "/tmp/outdir/candidates.jsonl");
  EXPECT_EQ(s.loop.iterations, 10);
  EXPECT_EQ(s.loop.retrieval.seed, 7u);
  EXPECT_EQ(s.train.hidden, 32);
}
