// Copyright 2026 The agreebench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <fstream>

#include "agreebench/pipeline.hpp"
#include "support.hpp"

namespace agreebench {
namespace {

using testing::data_path;
using testing::scratch_dir;
using testing::slurp;

// Training text: every mini-treebank sentence, lower-cased forms.
fs::path write_corpus(const fs::path& dir) {
  const fs::path p = dir / "corpus.txt";
  std::ofstream out(p);
  for (int rep = 0; rep < 3; ++rep) {
    for (const auto& s : testing::mini_treebank()) {
      for (std::size_t i = 1; i <= s.size(); ++i) {
        out << (i > 1 ? " " : "") << s.at(static_cast<int>(i)).form;
      }
      out << '\n';
    }
  }
  return p;
}

nlohmann::json base_config(const fs::path& dir, const fs::path& out) {
  return {{"treebank", data_path("mini.conllu").string()},
          {"corpus", write_corpus(dir).string()},
          {"valid_corpus", write_corpus(dir).string()},
          {"vocab", data_path("mini.vocab").string()},
          {"out_dir", out.string()},
          {"min_per_number", 2},
          {"seed", 77},
          {"fillers", 5},
          {"order", 3},
          {"threads", 2},
          {"permutations", 200},
          {"scorers", {"unigram", "kn", {{"spec", "kn"}, {"window", 2}}}}};
}

// Exit status of the CLI; stderr lands in `err`.
int cli(const std::string& args, std::string* err = nullptr) {
  const fs::path errf = scratch_dir("cli_err") / "stderr.txt";
  const std::string cmd = std::string(AGREEBENCH_CLI) + " " + args +
                          " >/dev/null 2>" + errf.string();
  const int status = std::system(cmd.c_str());
  if (err != nullptr) *err = slurp(errf);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream(p) << j.dump(2);
}

TEST(Pipeline, FullRunWritesEverythingQuickly) {
  auto dir = scratch_dir("pipe_full");
  auto cfg = parse_config(base_config(dir, dir / "out"), dir);
  const auto t0 = std::chrono::steady_clock::now();
  auto res = run_pipeline(cfg);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  EXPECT_LT(secs, 2.0);
  for (const char* f :
       {"manifest.json", "constructions.jsonl", "items.original.jsonl",
        "items.nonce.jsonl", "items.jsonl", "fillers.jsonl",
        "model/kn.bin", "model/kn.bin.meta.json", "records/unigram.jsonl",
        "records/kn.jsonl", "records/kn-w2.jsonl",
        "report/accuracy_by_attractors.csv", "report/plot_attractors.json",
        "report/perplexity_accuracy.json"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["seeds"]["master"], 77);
  EXPECT_EQ(manifest["inputs"]["treebank"]["sha256"],
            sha256_file(data_path("mini.conllu")));
  EXPECT_EQ(manifest["outputs"].size(), res.outputs.size());

  // Three retained constructions; nine nonce variants per original.
  std::ifstream orig(dir / "out" / "items.original.jsonl");
  auto originals = read_items(orig);
  std::ifstream non(dir / "out" / "items.nonce.jsonl");
  auto nonces = read_items(non);
  EXPECT_FALSE(originals.empty());
  EXPECT_EQ(nonces.size(), 9 * originals.size());
}

TEST(Pipeline, DeterministicUnderFixedSeed) {
  auto dir = scratch_dir("pipe_det");
  auto a = run_pipeline(parse_config(base_config(dir, dir / "a"), dir));
  auto cfg_b = base_config(dir, dir / "b");
  cfg_b["threads"] = 4;
  auto b = run_pipeline(parse_config(cfg_b, dir));
  ASSERT_EQ(a.outputs, b.outputs);
  for (const auto& f : a.outputs) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  auto ma = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  auto mb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(ma["outputs"], mb["outputs"]);

  auto cfg_c = base_config(dir, dir / "c");
  cfg_c["seed"] = 78;
  run_pipeline(parse_config(cfg_c, dir));
  EXPECT_NE(slurp(dir / "a" / "items.nonce.jsonl"),
            slurp(dir / "c" / "items.nonce.jsonl"));
}

TEST(Pipeline, AttractorPlotHasThreeBuckets) {
  auto dir = scratch_dir("pipe_plot");
  run_pipeline(parse_config(base_config(dir, dir / "out"), dir));
  auto plot = nlohmann::json::parse(
      slurp(dir / "out" / "report" / "plot_attractors.json"));
  EXPECT_EQ(plot["x"], nlohmann::json({"0", "1", "2"}));
  for (const auto& s : plot["series"]) {
    EXPECT_EQ(s["mean"].size(), 3u);
    EXPECT_EQ(s["n_items"].size(), 3u);
  }
}

TEST(Config, UnknownFieldAndMissingRequired) {
  auto dir = scratch_dir("cfg");
  auto j = base_config(dir, dir / "out");
  j["windw"] = 3;
  try {
    parse_config(j, dir);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("windw"), std::string::npos);
  }
  j.erase("windw");
  j.erase("corpus");
  EXPECT_THROW(parse_config(j, dir), ConfigError);
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
  auto dir = scratch_dir("cfg_rel");
  write_corpus(dir);
  write_json(dir / "c.json", {{"treebank", "tb.conllu"},
                              {"corpus", "corpus.txt"},
                              {"out_dir", "out"}});
  auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.corpus, dir / "corpus.txt");
  EXPECT_EQ(c.out_dir, dir / "out");
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.variants, 9);
}

TEST(Cli, RunSucceeds) {
  auto dir = scratch_dir("cli_run");
  write_json(dir / "c.json", base_config(dir, dir / "out"));
  EXPECT_EQ(cli("run --config " + (dir / "c.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Cli, MissingInputFileNamesTheField) {
  auto dir = scratch_dir("cli_missing");
  auto j = base_config(dir, dir / "out");
  j["treebank"] = (dir / "nope.conllu").string();
  write_json(dir / "c.json", j);
  std::string err;
  EXPECT_EQ(cli("run --config " + (dir / "c.json").string(), &err), 2);
  EXPECT_NE(err.find("treebank"), std::string::npos) << err;

  EXPECT_EQ(cli("extract --treebank " + (dir / "nope.conllu").string() +
                    " --vocab " + data_path("mini.vocab").string(),
                &err),
            2);
  EXPECT_NE(err.find("--treebank"), std::string::npos) << err;
}

TEST(Cli, UnknownConfigFieldIsUsageError) {
  auto dir = scratch_dir("cli_unknown");
  auto j = base_config(dir, dir / "out");
  j["colour"] = "blue";
  write_json(dir / "c.json", j);
  std::string err;
  EXPECT_EQ(cli("run --config " + (dir / "c.json").string(), &err), 2);
  EXPECT_NE(err.find("colour"), std::string::npos) << err;
  EXPECT_EQ(cli("frobnicate"), 2);
}

TEST(Cli, ScorerFailureExitsOne) {
  auto dir = scratch_dir("cli_scorer");
  ASSERT_EQ(cli("extract --treebank " + data_path("mini.conllu").string() +
                " --vocab " + data_path("mini.vocab").string() +
                " --min-per-number 2 --out " + (dir / "items.jsonl").string()),
            0);
  const std::string items = (dir / "items.jsonl").string();
  EXPECT_EQ(cli("evaluate --items " + items + " --scorer 'ext:" +
                AGREEBENCH_STUB_SCORER + " ok' --out " +
                (dir / "ok.jsonl").string()),
            0);
  std::string err;
  EXPECT_EQ(cli("evaluate --items " + items + " --scorer 'ext:" +
                    AGREEBENCH_STUB_SCORER + " badjson' --out " +
                    (dir / "bad.jsonl").string(),
                &err),
            1);
  EXPECT_FALSE(err.empty());

  auto j = base_config(dir, dir / "out");
  j["scorers"] = {std::string("ext:") + AGREEBENCH_STUB_SCORER + " nan"};
  write_json(dir / "c.json", j);
  EXPECT_EQ(cli("run --config " + (dir / "c.json").string(), &err), 1);
  EXPECT_NE(err.find("evaluate"), std::string::npos) << err;
}

TEST(Cli, StagesChainLikeRun) {
  auto dir = scratch_dir("cli_chain");
  const std::string d = dir.string();
  const std::string tb = data_path("mini.conllu").string();
  const std::string vocab = data_path("mini.vocab").string();
  write_corpus(dir);
  ASSERT_EQ(cli("extract --treebank " + tb + " --vocab " + vocab +
                " --min-per-number 2 --out " + d + "/orig.jsonl"),
            0);
  ASSERT_EQ(cli("nonce --items " + d + "/orig.jsonl --treebank " + tb +
                " --vocab " + vocab + " --seed 5 --out " + d + "/nonce.jsonl"),
            0);
  ASSERT_EQ(cli("train-ngram --corpus " + d + "/corpus.txt --order 3 --out " +
                d + "/kn.bin"),
            0);
  ASSERT_EQ(cli("evaluate --items " + d + "/orig.jsonl --items " + d +
                "/nonce.jsonl --scorer kn:" + d + "/kn.bin --out " + d +
                "/kn.jsonl"),
            0);
  ASSERT_EQ(cli("report --records " + d + "/kn.jsonl --permutations 50 --out " +
                d + "/report"),
            0);
  auto plot = nlohmann::json::parse(slurp(dir / "report" / "plot_attractors.json"));
  EXPECT_EQ(plot["x"], nlohmann::json({"0", "1", "2"}));
  std::ifstream recs(dir / "kn.jsonl");
  std::ifstream o(dir / "orig.jsonl"), n(dir / "nonce.jsonl");
  EXPECT_EQ(read_records(recs).size(), read_items(o).size() + read_items(n).size());
}

}  // namespace
}  // namespace agreebench
