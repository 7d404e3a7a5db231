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
//
// Fixtures and mock scorers shared by the unit tests and the acceptance run.

#ifndef AGREEBENCH_TESTS_SUPPORT_HPP_
#define AGREEBENCH_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "agreebench/agreebench.hpp"

namespace agreebench::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(AGREEBENCH_TEST_DATA) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<Sentence> mini_treebank() {
  std::ifstream in(data_path("mini.conllu"));
  return parse_conllu(in);
}

inline Vocabulary mini_vocab() {
  return read_vocab_file(data_path("mini.vocab").string());
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("agreebench-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Synthetic agreement treebank: "the N0 (near the Ni)* V ." where every Ni is
// an nmod of N0 and V agrees with N0. Numbers of the Ni are random, so the
// attractor count ranges over 0..k.

struct SyntheticOptions {
  std::size_t sentences = 200;
  int max_pps = 4;
  std::uint64_t seed = 7;
};

inline std::vector<Sentence> synthetic_treebank(const SyntheticOptions& o) {
  static const std::vector<std::pair<std::string, std::string>> nouns = {
      {"author", "authors"}, {"pilot", "pilots"},   {"key", "keys"},
      {"cabinet", "cabinets"}, {"label", "labels"}, {"road", "roads"},
      {"house", "houses"},   {"river", "rivers"},   {"table", "tables"},
      {"garden", "gardens"}};
  static const std::vector<std::pair<std::string, std::string>> verbs = {
      {"is", "are"},     {"sits", "sit"},     {"seems", "seem"},
      {"falls", "fall"}, {"moves", "move"},   {"waits", "wait"}};
  static const std::vector<std::string> verb_lemmas = {"be",   "sit",  "seem",
                                                       "fall", "move", "wait"};
  static const std::vector<std::string> preps = {"near", "behind", "with"};
  SplitMix64 rng(o.seed);
  auto num = [&]() { return rng.below(2) == 0 ? Number::kSing : Number::kPlur; };
  auto noun_tok = [&](Number n) {
    const auto& p = nouns[rng.below(nouns.size())];
    Token t;
    t.form = n == Number::kSing ? p.first : p.second;
    t.lemma = p.first;
    t.upos = "NOUN";
    t.feats.set("Number", std::string(to_string(n)));
    t.deprel = "nmod";
    return t;
  };
  auto plain = [](std::string form, std::string upos, std::string rel) {
    Token t;
    t.form = form;
    t.lemma = form;
    t.upos = std::move(upos);
    t.deprel = std::move(rel);
    return t;
  };

  std::vector<Sentence> out;
  for (std::size_t s = 0; s < o.sentences; ++s) {
    Sentence sent;
    sent.sent_id = "syn-" + std::to_string(s + 1);
    const Number subj = num();
    const int k = 1 + static_cast<int>(rng.below(o.max_pps));
    sent.tokens.push_back(plain("the", "DET", "det"));
    Token n0 = noun_tok(subj);
    n0.deprel = "nsubj";
    sent.tokens.push_back(n0);
    for (int i = 0; i < k; ++i) {
      sent.tokens.push_back(plain(preps[rng.below(preps.size())], "ADP", "case"));
      sent.tokens.push_back(plain("the", "DET", "det"));
      sent.tokens.push_back(noun_tok(num()));
    }
    const std::size_t vi = rng.below(verbs.size());
    Token v;
    v.form = subj == Number::kSing ? verbs[vi].first : verbs[vi].second;
    v.lemma = verb_lemmas[vi];
    v.upos = "VERB";
    v.feats = parse_feats("Mood=Ind|Number=" + std::string(to_string(subj)) +
                          "|Tense=Pres|VerbForm=Fin");
    v.deprel = "root";
    sent.tokens.push_back(v);
    sent.tokens.push_back(plain(".", "PUNCT", "punct"));

    const int verb_idx = 3 + 3 * k;
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      Token& t = sent.tokens[i];
      t.index = static_cast<int>(i) + 1;
    }
    sent.at(1).head = 2;
    sent.at(2).head = verb_idx;
    for (int i = 0; i < k; ++i) {
      const int base = 3 + 3 * i;
      sent.at(base).head = base + 2;
      sent.at(base + 1).head = base + 2;
      sent.at(base + 2).head = 2;
    }
    sent.at(verb_idx).head = 0;
    sent.at(verb_idx + 1).head = verb_idx;
    out.push_back(std::move(sent));
  }
  return out;
}

// Every word of a treebank, as an LM vocabulary.
inline Vocabulary vocab_of(const std::vector<Sentence>& treebank) {
  std::vector<TokenizedSentence> corpus;
  for (const auto& s : treebank) {
    TokenizedSentence words;
    for (const auto& t : s.tokens) words.push_back(t.form);
    corpus.push_back(std::move(words));
  }
  return build_vocab(corpus, 1000000);
}

// ---------------------------------------------------------------------------
// Mock scorers.

inline std::string item_key(std::span<const std::string> prefix,
                            const std::string& a, const std::string& b) {
  std::string key;
  for (const auto& w : prefix) key += w + ' ';
  key += '|';
  // Order-free in the candidates.
  key += a < b ? a + ' ' + b : b + ' ' + a;
  return key;
}

// Knows each item's correct form; `inverted` prefers the wrong one.
class OracleScorer : public Scorer {
 public:
  OracleScorer(const std::vector<TestItem>& items, bool inverted)
      : inverted_(inverted) {
    for (const auto& item : items) {
      correct_[item_key(item.prefix, item.correct_form, item.wrong_form)] =
          item.correct_form;
    }
  }
  LogProbs score(std::span<const std::string> prefix, const std::string& a,
                 const std::string& b) override {
    auto it = correct_.find(item_key(prefix, a, b));
    if (it == correct_.end()) throw ScorerError("unknown item");
    const bool a_right = (it->second == a) != inverted_;
    return a_right ? LogProbs{-1.0, -2.0} : LogProbs{-2.0, -1.0};
  }
  ScorerInfo info() const override {
    return {inverted_ ? "inverted-oracle" : "oracle", std::nullopt};
  }
  bool concurrent() const override { return true; }

 private:
  bool inverted_;
  std::map<std::string, std::string> correct_;
};

class ConstantScorer : public Scorer {
 public:
  LogProbs score(std::span<const std::string>, const std::string&,
                 const std::string&) override {
    return {-3.0, -3.0};
  }
  ScorerInfo info() const override { return {"constant", std::nullopt}; }
};

// Seeded fair coin per (seed, item), independent of call order.
class CoinFlipScorer : public Scorer {
 public:
  explicit CoinFlipScorer(std::uint64_t seed, std::string name = "coin")
      : seed_(seed), name_(std::move(name)) {}
  LogProbs score(std::span<const std::string> prefix, const std::string& a,
                 const std::string& b) override {
    SplitMix64 rng(derive_seed(seed_, item_key(prefix, a, b) + a));
    return rng.below(2) == 0 ? LogProbs{-1.0, -2.0} : LogProbs{-2.0, -1.0};
  }
  ScorerInfo info() const override { return {name_, std::nullopt}; }
  bool concurrent() const override { return true; }

 private:
  std::uint64_t seed_;
  std::string name_;
};

// Remembers every prefix it was shown; scores by prefix length.
class RecordingScorer : public Scorer {
 public:
  LogProbs score(std::span<const std::string> prefix, const std::string& a,
                 const std::string& b) override {
    std::lock_guard<std::mutex> lock(mu_);
    seen.emplace_back(prefix.begin(), prefix.end());
    const double base = -static_cast<double>(prefix.size()) - 1.0;
    return a < b ? LogProbs{base, base - 0.5} : LogProbs{base - 0.5, base};
  }
  ScorerInfo info() const override { return {"recording", std::nullopt}; }

  std::vector<std::vector<std::string>> seen;

 private:
  std::mutex mu_;
};

// Items with random prefixes of the given length range, correct form "sg"
// or "pl" at random.
inline std::vector<TestItem> random_items(std::size_t n, std::uint64_t seed,
                                          int min_len = 1, int max_len = 12) {
  SplitMix64 rng(seed);
  std::vector<TestItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    TestItem item;
    item.item_id = "it" + std::to_string(i);
    item.construction_id = rng.below(2) ? "NOUN VERB VERB" : "NOUN ADP VERB";
    item.kind = rng.below(2) ? ItemKind::kOriginal : ItemKind::kNonce;
    item.source_sent_id = "s" + std::to_string(i);
    const int len = min_len + static_cast<int>(rng.below(max_len - min_len + 1));
    for (int k = 0; k < len; ++k) {
      item.prefix.push_back("w" + std::to_string(rng.below(50)) + "_" +
                            std::to_string(i));
    }
    const bool sg = rng.below(2) == 0;
    item.correct_form = sg ? "walks" : "walk";
    item.wrong_form = sg ? "walk" : "walks";
    item.cue_offset = 0;
    item.n_attractors = static_cast<int>(rng.below(4));
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace agreebench::testing

#endif  // AGREEBENCH_TESTS_SUPPORT_HPP_
