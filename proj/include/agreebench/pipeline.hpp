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
// End-to-end pipeline: extract -> nonce -> train-ngram -> evaluate -> report,
// driven by one JSON config and recorded in a manifest.

#ifndef AGREEBENCH_PIPELINE_HPP_
#define AGREEBENCH_PIPELINE_HPP_

#include <openssl/evp.h>

#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "agreebench/conllu.hpp"
#include "agreebench/external_scorer.hpp"
#include "agreebench/harness.hpp"
#include "agreebench/lexicon.hpp"
#include "agreebench/miner.hpp"
#include "agreebench/ngram.hpp"
#include "agreebench/nonce.hpp"
#include "agreebench/random.hpp"
#include "agreebench/report.hpp"
#include "agreebench/stats.hpp"
#include "agreebench/test_item.hpp"
#include "agreebench/version.hpp"
#include "agreebench/vocabulary.hpp"
#include "json.hpp"

namespace agreebench {

namespace fs = std::filesystem;

// Bad or missing configuration; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure inside a named stage; maps to exit status 1.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  }
  return hex.str();
}

// ---------------------------------------------------------------------------
// Stages shared by the CLI subcommands and run_pipeline.

struct LoadedTreebank {
  std::vector<Sentence> sentences;
  std::vector<std::string> warnings;
};

inline LoadedTreebank load_treebank(const fs::path& path, bool enrich_en_verbs) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open treebank " + path.string());
  auto parsed = parse_conllu_with_warnings(in);
  LoadedTreebank out{std::move(parsed.sentences), std::move(parsed.warnings)};
  if (enrich_en_verbs) {
    out.sentences = enrich_english_verb_number(std::move(out.sentences));
  }
  return out;
}

struct ExtractResult {
  std::vector<Construction> constructions;
  std::vector<TestItem> items;
};

inline ExtractResult run_extract(const std::vector<Sentence>& treebank,
                                 const Vocabulary& vocab,
                                 const MiningOptions& options) {
  ExtractResult out;
  out.constructions = mine_constructions(treebank, options);
  out.items = extract_original_testset(treebank, out.constructions, vocab,
                                       build_counterpart_index(treebank));
  return out;
}

struct TrainOptions {
  std::size_t vocab_size = 50000;
  int order = 5;
  std::optional<fs::path> known_words;  // enables sentence filtering
  double max_unknown_ratio = 0.05;
  std::optional<fs::path> valid_corpus;
};

struct TrainResult {
  Vocabulary vocab;
  FrequencyTable unigrams;
  std::shared_ptr<const KNModel> model;
  std::optional<double> valid_perplexity;
  std::size_t sentences_in = 0;
  std::size_t sentences_kept = 0;
};

inline std::unordered_set<std::string> read_word_set(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tab = line.find('\t');
    if (tab != std::string::npos) line.resize(tab);
    if (!line.empty()) words.insert(line);
  }
  return words;
}

inline TrainResult run_train(const fs::path& corpus_path,
                             const TrainOptions& options) {
  auto corpus = read_corpus_file(corpus_path.string());
  TrainResult out;
  out.sentences_in = corpus.size();
  if (options.known_words) {
    corpus = filter_corpus(corpus, read_word_set(*options.known_words),
                           options.max_unknown_ratio);
  }
  out.sentences_kept = corpus.size();
  out.vocab = build_vocab(corpus, options.vocab_size);
  for (auto& [w, c] : count_words(corpus)) out.unigrams.emplace(w, c);
  out.model = std::make_shared<const KNModel>(
      train_kn(corpus, out.vocab, options.order));
  if (options.valid_corpus) {
    auto valid = read_corpus_file(options.valid_corpus->string());
    out.valid_perplexity = perplexity(*out.model, valid, true);
  }
  return out;
}

// Writes <out>, <out>.counts.txt, <out>.vocab.tsv, <out>.unigrams.tsv and
// <out>.meta.json.
inline std::vector<fs::path> write_trained(const TrainResult& t,
                                           const fs::path& out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_model_file(*t.model, out.string());
  std::vector<fs::path> files = {out};
  auto sidecar = [&](const std::string& suffix) {
    fs::path p = out;
    p += suffix;
    files.push_back(p);
    return p;
  };
  {
    std::ofstream f(sidecar(".counts.txt"));
    t.model->dump_counts(f);
  }
  {
    std::ofstream f(sidecar(".vocab.tsv"));
    write_vocab(f, t.vocab);
  }
  {
    std::ofstream f(sidecar(".unigrams.tsv"));
    write_frequency_table(f, t.unigrams);
  }
  {
    nlohmann::ordered_json j;
    j["smoothing"] = std::string(kKnVariant);
    j["order"] = t.model->order();
    j["vocab_size"] = t.vocab.size();
    j["sentences_in"] = t.sentences_in;
    j["sentences_kept"] = t.sentences_kept;
    j["valid_perplexity"] = t.valid_perplexity
                                ? nlohmann::ordered_json(*t.valid_perplexity)
                                : nlohmann::ordered_json(nullptr);
    j["perplexity_excludes_unknown"] = true;
    std::ofstream f(sidecar(".meta.json"));
    f << j.dump(2) << '\n';
  }
  return files;
}

// Scorer specs: "kn:<model>", "unigram:<counts.tsv>", "ext:<command>".
// A kn model's perplexity is taken from "<model>.meta.json" when present.
inline std::unique_ptr<Scorer> make_scorer(const std::string& spec) {
  auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (arg.empty()) {
    throw ConfigError("scorer spec '" + spec + "' needs an argument");
  }
  if (kind == "kn") {
    auto model = std::make_shared<const KNModel>(load_model_file(arg));
    std::optional<double> ppl;
    std::ifstream meta(arg + ".meta.json");
    if (meta) {
      auto j = nlohmann::json::parse(meta);
      if (j.contains("valid_perplexity") && j["valid_perplexity"].is_number()) {
        ppl = j["valid_perplexity"].get<double>();
      }
    }
    return std::make_unique<KNScorer>(std::move(model), ppl);
  }
  if (kind == "unigram") {
    std::ifstream in(arg);
    if (!in) throw std::runtime_error("cannot open unigram counts " + arg);
    return std::make_unique<UnigramScorer>(read_frequency_table(in));
  }
  if (kind == "ext") return std::make_unique<ExternalScorer>(arg);
  throw ConfigError("unknown scorer kind '" + kind + "' in '" + spec + "'");
}

inline std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
            c == '_' || c == '.')
               ? c
               : '_';
  }
  return out.empty() ? "scorer" : out;
}

// ---------------------------------------------------------------------------
// Config

struct ScorerConfig {
  std::string spec;  // "kn", "unigram" (pipeline-trained) or a full spec
  std::optional<int> window;
};

struct PipelineConfig {
  fs::path treebank;
  fs::path corpus;
  fs::path out_dir;
  std::optional<fs::path> vocab;
  std::optional<fs::path> valid_corpus;
  std::optional<fs::path> known_words;
  std::optional<fs::path> judgments;
  std::optional<fs::path> control_items;
  bool enrich_en_verbs = false;
  int min_context = 3;
  std::size_t min_per_number = 10;
  double ambiguity_threshold = 0.1;
  std::uint64_t seed = 0;
  int variants = 9;
  std::size_t fillers = 0;
  std::size_t vocab_size = 50000;
  int order = 5;
  double max_unknown_ratio = 0.05;
  std::vector<ScorerConfig> scorers = {{"unigram", std::nullopt},
                                       {"kn", std::nullopt}};
  unsigned threads = 1;
  std::size_t permutations = 10000;
};

// Relative paths are resolved against `base` (the config file's directory).
inline PipelineConfig parse_config(const nlohmann::json& j,
                                   const fs::path& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  auto path_field = [&](const char* name) -> std::optional<fs::path> {
    if (!j.contains(name) || j[name].is_null()) return std::nullopt;
    if (!j[name].is_string()) {
      throw ConfigError(std::string("config field '") + name +
                        "' must be a path string");
    }
    fs::path p = j[name].get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  auto required = [&](const char* name) {
    auto p = path_field(name);
    if (!p) throw ConfigError(std::string("config field '") + name +
                              "' is required");
    return *p;
  };
  static const std::unordered_set<std::string> known = {
      "treebank", "corpus", "out_dir", "vocab", "valid_corpus", "known_words",
      "judgments", "control_items", "enrich_en_verbs", "min_context",
      "min_per_number", "ambiguity_threshold", "seed", "variants", "fillers",
      "vocab_size", "order", "max_unknown_ratio", "scorers", "threads",
      "permutations"};
  for (const auto& [key, value] : j.items()) {
    if (known.count(key) == 0) {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  try {
    c.treebank = required("treebank");
    c.corpus = required("corpus");
    c.out_dir = required("out_dir");
    c.vocab = path_field("vocab");
    c.valid_corpus = path_field("valid_corpus");
    c.known_words = path_field("known_words");
    c.judgments = path_field("judgments");
    c.control_items = path_field("control_items");
    c.enrich_en_verbs = j.value("enrich_en_verbs", c.enrich_en_verbs);
    c.min_context = j.value("min_context", c.min_context);
    c.min_per_number = j.value("min_per_number", c.min_per_number);
    c.ambiguity_threshold = j.value("ambiguity_threshold", c.ambiguity_threshold);
    c.seed = j.value("seed", c.seed);
    c.variants = j.value("variants", c.variants);
    c.fillers = j.value("fillers", c.fillers);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.order = j.value("order", c.order);
    c.max_unknown_ratio = j.value("max_unknown_ratio", c.max_unknown_ratio);
    c.threads = j.value("threads", c.threads);
    c.permutations = j.value("permutations", c.permutations);
    if (j.contains("scorers")) {
      c.scorers.clear();
      for (const auto& s : j.at("scorers")) {
        if (s.is_string()) {
          c.scorers.push_back({s.get<std::string>(), std::nullopt});
        } else {
          ScorerConfig sc{s.at("spec").get<std::string>(), std::nullopt};
          if (s.contains("window") && !s["window"].is_null()) {
            sc.window = s["window"].get<int>();
          }
          c.scorers.push_back(std::move(sc));
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.scorers.empty()) throw ConfigError("config field 'scorers' is empty");
  if (c.order < 1) throw ConfigError("config field 'order' must be >= 1");
  if (c.variants < 0) throw ConfigError("config field 'variants' must be >= 0");
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PipelineResult {
  fs::path out_dir;
  std::vector<fs::path> outputs;  // relative to out_dir
};

inline void write_items_file(const fs::path& path,
                             const std::vector<TestItem>& items) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_items(out, items);
}

// Runs every stage and writes manifest.json. Throws ConfigError for missing
// inputs and StageError naming the failing stage.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
  const std::string started = utc_timestamp();
  for (const auto& [name, path] :
       {std::pair<const char*, const fs::path*>{"treebank", &config.treebank},
        {"corpus", &config.corpus}}) {
    if (!fs::exists(*path)) {
      throw ConfigError(std::string("config field '") + name +
                        "': no such file " + path->string());
    }
  }
  PipelineResult result{config.out_dir, {}};
  fs::create_directories(config.out_dir);
  const fs::path& out = config.out_dir;

  auto stage = [](const std::string& name, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  auto tb = stage("extract", [&] {
    return load_treebank(config.treebank, config.enrich_en_verbs);
  });

  auto trained = stage("train-ngram", [&] {
    TrainOptions opt;
    opt.vocab_size = config.vocab_size;
    opt.order = config.order;
    opt.known_words = config.known_words;
    opt.max_unknown_ratio = config.max_unknown_ratio;
    opt.valid_corpus = config.valid_corpus;
    auto t = run_train(config.corpus, opt);
    fs::create_directories(out / "model");
    for (const auto& f : write_trained(t, out / "model" / "kn.bin")) {
      result.outputs.push_back(fs::relative(f, out));
    }
    return t;
  });

  Vocabulary vocab = config.vocab
                         ? stage("extract",
                                 [&] {
                                   return read_vocab_file(config.vocab->string());
                                 })
                         : trained.vocab;

  auto extracted = stage("extract", [&] {
    MiningOptions mo{config.min_context, config.min_per_number};
    auto r = run_extract(tb.sentences, vocab, mo);
    std::ofstream cons(out / "constructions.jsonl");
    for (const auto& c : r.constructions) cons << to_json(c).dump() << '\n';
    write_items_file(out / "items.original.jsonl", r.items);
    result.outputs.emplace_back("constructions.jsonl");
    result.outputs.emplace_back("items.original.jsonl");
    return r;
  });

  auto all_items = stage("nonce", [&] {
    auto lexicon = build_lexicon(tb.sentences, config.ambiguity_threshold);
    auto counterparts = build_counterpart_index(tb.sentences);
    NonceOptions no{config.variants, config.seed, &vocab};
    auto nonce = generate_nonce_all(extracted.items, tb.sentences, lexicon,
                                    counterparts, no, config.threads);
    write_items_file(out / "items.nonce.jsonl", nonce);
    result.outputs.emplace_back("items.nonce.jsonl");
    if (config.fillers > 0) {
      NonceOptions fo{config.variants, config.seed, nullptr};
      auto fillers = generate_fillers(tb.sentences, lexicon, counterparts,
                                      config.fillers, fo);
      write_items_file(out / "fillers.jsonl", fillers);
      result.outputs.emplace_back("fillers.jsonl");
    }
    std::vector<TestItem> all = extracted.items;
    all.insert(all.end(), nonce.begin(), nonce.end());
    write_items_file(out / "items.jsonl", all);
    result.outputs.emplace_back("items.jsonl");
    return all;
  });

  auto evaluations = stage("evaluate", [&] {
    std::vector<EvaluationResult> evals;
    fs::create_directories(out / "records");
    std::unordered_set<std::string> names;
    for (const auto& sc : config.scorers) {
      std::unique_ptr<Scorer> scorer;
      if (sc.spec == "kn") {
        scorer = std::make_unique<KNScorer>(trained.model,
                                            trained.valid_perplexity);
      } else if (sc.spec == "unigram") {
        scorer = std::make_unique<UnigramScorer>(trained.unigrams);
      } else {
        scorer = make_scorer(sc.spec);
      }
      auto eval = evaluate(all_items, *scorer, sc.window, config.threads);
      if (sc.window) eval.scorer.name += "-w" + std::to_string(*sc.window);
      if (!names.insert(eval.scorer.name).second) {
        throw std::runtime_error("duplicate scorer name " + eval.scorer.name);
      }
      const fs::path rel =
          fs::path("records") / (file_safe(eval.scorer.name) + ".jsonl");
      write_evaluation(eval, (out / rel).string());
      result.outputs.push_back(rel);
      result.outputs.push_back(rel.string() + ".meta.json");
      if (eval.n_errors > 0) {
        throw std::runtime_error(std::to_string(eval.n_errors) +
                                 " items failed with scorer " +
                                 eval.scorer.name + ": " +
                                 eval.records.front().error);
      }
      evals.push_back(std::move(eval));
    }
    return evals;
  });

  stage("report", [&] {
    ReportInputs in;
    in.evaluations = std::move(evaluations);
    in.permutations = config.permutations;
    in.seed = config.seed;
    for (const auto& item : all_items) in.item_facts[item.item_id] = facts_of(item);
    if (config.judgments) {
      in.judgments = read_judgments_file(config.judgments->string());
    }
    if (config.control_items) {
      in.control_items = read_word_set(*config.control_items);
    }
    for (const auto& f : write_report(std::move(in), out / "report")) {
      result.outputs.push_back(fs::path("report") / f);
    }
    return 0;
  });

  nlohmann::ordered_json m;
  m["tool"] = "agreebench";
  m["version"] = kVersion;
  m["rng"] = std::string(kRngName);
  auto inputs = nlohmann::ordered_json::object();
  auto add_input = [&](const char* name, const std::optional<fs::path>& p) {
    if (!p) return;
    inputs[name] = {{"path", p->string()}, {"sha256", sha256_file(*p)}};
  };
  add_input("treebank", config.treebank);
  add_input("corpus", config.corpus);
  add_input("vocab", config.vocab);
  add_input("valid_corpus", config.valid_corpus);
  add_input("known_words", config.known_words);
  add_input("judgments", config.judgments);
  add_input("control_items", config.control_items);
  m["inputs"] = inputs;
  m["seeds"] = {{"master", config.seed}};
  auto scorers = nlohmann::ordered_json::array();
  for (const auto& s : config.scorers) {
    scorers.push_back({{"spec", s.spec},
                       {"window", s.window ? nlohmann::ordered_json(*s.window)
                                           : nlohmann::ordered_json(nullptr)}});
  }
  m["parameters"] = {{"enrich_en_verbs", config.enrich_en_verbs},
                     {"min_context", config.min_context},
                     {"min_per_number", config.min_per_number},
                     {"ambiguity_threshold", config.ambiguity_threshold},
                     {"variants", config.variants},
                     {"fillers", config.fillers},
                     {"vocab_size", config.vocab_size},
                     {"order", config.order},
                     {"max_unknown_ratio", config.max_unknown_ratio},
                     {"permutations", config.permutations},
                     {"threads", config.threads},
                     {"scorers", scorers}};
  auto outputs = nlohmann::ordered_json::array();
  for (const auto& f : result.outputs) {
    outputs.push_back(
        {{"path", f.string()}, {"sha256", sha256_file(out / f)}});
  }
  m["outputs"] = outputs;
  m["warnings"] = tb.warnings;
  m["timestamps"] = {{"started", started}, {"finished", utc_timestamp()}};
  std::ofstream mf(out / "manifest.json");
  mf << m.dump(2) << '\n';
  return result;
}

}  // namespace agreebench

#endif  // AGREEBENCH_PIPELINE_HPP_
