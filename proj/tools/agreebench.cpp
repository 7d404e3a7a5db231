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
// agreebench: build agreement benchmarks from treebanks and score language
// models on them.
//
// Exit status: 0 success, 1 internal or stage error, 2 usage/config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "agreebench/agreebench.hpp"

namespace fs = std::filesystem;
using namespace agreebench;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& flag, const std::string& path) {
  if (!fs::exists(path)) {
    throw UsageError(flag + ": no such file " + path);
  }
}

// "-" is standard output.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct ExtractArgs {
  std::string treebank, vocab, out = "-", constructions;
  int min_context = 3;
  std::size_t min_per_number = 10;
  bool enrich = false;
};

int cmd_extract(const ExtractArgs& a) {
  require_file("--treebank", a.treebank);
  require_file("--vocab", a.vocab);
  auto tb = load_treebank(a.treebank, a.enrich);
  report_warnings(tb.warnings);
  auto vocab = read_vocab_file(a.vocab);
  auto r = run_extract(tb.sentences, vocab,
                       MiningOptions{a.min_context, a.min_per_number});
  if (!a.constructions.empty()) {
    with_output(a.constructions, [&](std::ostream& out) {
      for (const auto& c : r.constructions) out << to_json(c).dump() << '\n';
    });
  }
  with_output(a.out, [&](std::ostream& out) { write_items(out, r.items); });
  std::cerr << r.constructions.size() << " constructions, " << r.items.size()
            << " original items\n";
  return kOk;
}

struct NonceArgs {
  std::string items, treebank, vocab, out = "-", fillers_out;
  std::uint64_t seed = 0;
  int variants = 9;
  double ambiguity = 0.1;
  bool enrich = false;
  std::size_t fillers = 0;
  unsigned threads = 1;
};

int cmd_nonce(const NonceArgs& a) {
  require_file("--items", a.items);
  require_file("--treebank", a.treebank);
  require_file("--vocab", a.vocab);
  if (a.fillers > 0 && a.fillers_out.empty()) {
    throw UsageError("--fillers needs --fillers-out");
  }
  auto tb = load_treebank(a.treebank, a.enrich);
  report_warnings(tb.warnings);
  auto vocab = read_vocab_file(a.vocab);
  auto items = read_items_file(a.items);
  auto lexicon = build_lexicon(tb.sentences, a.ambiguity);
  auto counterparts = build_counterpart_index(tb.sentences);
  NonceOptions opt{a.variants, a.seed, &vocab};
  auto nonce = generate_nonce_all(items, tb.sentences, lexicon, counterparts,
                                  opt, a.threads);
  with_output(a.out, [&](std::ostream& out) { write_items(out, nonce); });
  if (a.fillers > 0) {
    NonceOptions fopt{a.variants, a.seed, nullptr};
    auto fillers =
        generate_fillers(tb.sentences, lexicon, counterparts, a.fillers, fopt);
    with_output(a.fillers_out,
                [&](std::ostream& out) { write_items(out, fillers); });
  }
  std::size_t fallbacks = 0;
  for (const auto& item : nonce) fallbacks += !item.fallback_slots.empty();
  std::cerr << nonce.size() << " nonce items (" << fallbacks
            << " with fallback slots)\n";
  return kOk;
}

struct TrainArgs {
  std::string corpus, out, known, valid;
  std::size_t vocab_size = 50000;
  int order = 5;
  double max_unknown_ratio = 0.05;
};

int cmd_train(const TrainArgs& a) {
  require_file("--corpus", a.corpus);
  TrainOptions opt;
  opt.vocab_size = a.vocab_size;
  opt.order = a.order;
  opt.max_unknown_ratio = a.max_unknown_ratio;
  if (!a.known.empty()) {
    require_file("--known", a.known);
    opt.known_words = a.known;
  }
  if (!a.valid.empty()) {
    require_file("--valid", a.valid);
    opt.valid_corpus = a.valid;
  }
  auto t = run_train(a.corpus, opt);
  write_trained(t, a.out);
  std::cerr << "trained order-" << a.order << " model on " << t.sentences_kept
            << "/" << t.sentences_in << " sentences, |V|=" << t.vocab.size();
  if (t.valid_perplexity) std::cerr << ", valid ppl=" << *t.valid_perplexity;
  std::cerr << '\n';
  return kOk;
}

struct EvaluateArgs {
  std::vector<std::string> items;
  std::string scorer, out;
  std::optional<int> window;
  unsigned threads = 1;
};

int cmd_evaluate(const EvaluateArgs& a) {
  std::vector<TestItem> items;
  for (const auto& path : a.items) {
    require_file("--items", path);
    auto part = read_items_file(path);
    items.insert(items.end(), part.begin(), part.end());
  }
  std::unique_ptr<Scorer> scorer;
  try {
    scorer = make_scorer(a.scorer);
  } catch (const ConfigError& e) {
    throw UsageError(std::string("--scorer: ") + e.what());
  }
  auto result = evaluate(items, *scorer, a.window, a.threads);
  if (a.out == "-") {
    write_records(std::cout, result.records);
  } else {
    fs::path p(a.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_evaluation(result, a.out);
  }
  if (auto* ext = dynamic_cast<ExternalScorer*>(scorer.get())) ext->close();
  auto acc = accuracy(result.records);
  std::cerr << result.scorer.name << ": " << result.records.size()
            << " items, accuracy "
            << (acc ? format_fixed(*acc, 4) : std::string("n/a")) << '\n';
  if (result.n_errors > 0) {
    for (const auto& r : result.records) {
      if (r.outcome == Outcome::kError) {
        std::cerr << "error: item " << r.item_id << ": " << r.error << '\n';
        break;
      }
    }
    std::cerr << "error: " << result.n_errors << " items failed to score\n";
    return kInternal;
  }
  return kOk;
}

struct ReportArgs {
  std::vector<std::string> records, items;
  std::string judgments, control, out;
  std::size_t permutations = 10000;
  std::uint64_t seed = 0;
};

int cmd_report(const ReportArgs& a) {
  ReportInputs in;
  for (const auto& path : a.records) {
    require_file("--records", path);
    in.evaluations.push_back(read_evaluation(path));
  }
  for (const auto& path : a.items) {
    require_file("--items", path);
    for (const auto& item : read_items_file(path)) {
      in.item_facts[item.item_id] = facts_of(item);
    }
  }
  if (!a.judgments.empty()) {
    require_file("--judgments", a.judgments);
    in.judgments = read_judgments_file(a.judgments);
  }
  if (!a.control.empty()) {
    require_file("--control", a.control);
    in.control_items = read_word_set(a.control);
  }
  in.permutations = a.permutations;
  in.seed = a.seed;
  for (const auto& f : write_report(std::move(in), a.out)) {
    std::cerr << "wrote " << (fs::path(a.out) / f).string() << '\n';
  }
  return kOk;
}

struct RunArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

int cmd_run(const RunArgs& a) {
  PipelineConfig config = load_config(a.config);
  if (!a.out.empty()) config.out_dir = a.out;
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = *a.threads;
  auto result = run_pipeline(config);
  std::cerr << "wrote " << result.outputs.size() << " files and manifest.json to "
            << result.out_dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-distance agreement benchmarks from dependency treebanks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Mine constructions and write original test items");
  extract->add_option("--treebank", ex.treebank, "CoNLL-U treebank")->required();
  extract->add_option("--vocab", ex.vocab, "LM vocabulary (word[<TAB>freq] per line)")->required();
  extract->add_option("--min-context", ex.min_context, "Minimum intervening tokens")->capture_default_str();
  extract->add_option("--min-per-number", ex.min_per_number, "Minimum Sing and Plur instances")->capture_default_str();
  extract->add_flag("--enrich-en-verbs", ex.enrich, "Add Number=Plur to unmarked finite present verbs");
  extract->add_option("--out", ex.out, "Items JSONL ('-' for stdout)")->capture_default_str();
  extract->add_option("--constructions", ex.constructions, "Constructions JSONL output");

  NonceArgs nc;
  auto* nonce = app.add_subcommand("nonce", "Generate nonce variants of original items");
  nonce->add_option("--items", nc.items, "Original items JSONL")->required();
  nonce->add_option("--treebank", nc.treebank, "CoNLL-U treebank the items came from")->required();
  nonce->add_option("--vocab", nc.vocab, "LM vocabulary")->required();
  nonce->add_option("--seed", nc.seed, "Master seed")->capture_default_str();
  nonce->add_option("--variants", nc.variants, "Variants per item")->capture_default_str();
  nonce->add_option("--ambiguity", nc.ambiguity, "Maximum share of other-POS uses")->capture_default_str();
  nonce->add_flag("--enrich-en-verbs", nc.enrich, "Add Number=Plur to unmarked finite present verbs");
  nonce->add_option("--fillers", nc.fillers, "Also generate this many filler items");
  nonce->add_option("--fillers-out", nc.fillers_out, "Filler items JSONL");
  nonce->add_option("--threads", nc.threads, "Worker threads")->capture_default_str();
  nonce->add_option("--out", nc.out, "Nonce items JSONL ('-' for stdout)")->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train-ngram", "Train the Kneser-Ney n-gram model");
  train->add_option("--corpus", tr.corpus, "One tokenized sentence per line")->required();
  train->add_option("--vocab-size", tr.vocab_size, "Vocabulary size")->capture_default_str();
  train->add_option("--order", tr.order, "n-gram order")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--known", tr.known, "Known-word list; enables unknown-ratio filtering");
  train->add_option("--max-unknown-ratio", tr.max_unknown_ratio, "Drop sentences above this unknown share")->capture_default_str();
  train->add_option("--valid", tr.valid, "Validation corpus for perplexity");
  train->add_option("--out", tr.out, "Model path")->required();

  EvaluateArgs ev;
  int window = 0;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score items with a language model");
  evaluate_cmd->add_option("--items", ev.items, "Items JSONL (repeatable)")->required();
  evaluate_cmd->add_option("--scorer", ev.scorer, "kn:<model> | unigram:<counts> | ext:\"<command>\"")->required();
  auto* window_opt = evaluate_cmd->add_option("--window", window, "Score with only the last window-1 prefix tokens")->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--threads", ev.threads, "Worker threads for native scorers")->capture_default_str();
  evaluate_cmd->add_option("--out", ev.out, "Records JSONL ('-' for stdout)")->required();

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Aggregate records into tables and plot data");
  report->add_option("--records", rp.records, "Records JSONL (repeatable)")->required();
  report->add_option("--items", rp.items, "Items JSONL for grouping human judgments");
  report->add_option("--judgments", rp.judgments, "Human judgment CSV");
  report->add_option("--control", rp.control, "Control filler item ids, one per line");
  report->add_option("--permutations", rp.permutations, "Permutations for p-values")->capture_default_str();
  report->add_option("--seed", rp.seed, "Permutation seed")->capture_default_str();
  report->add_option("--out", rp.out, "Output directory")->required();

  RunArgs rn;
  std::uint64_t run_seed = 0;
  unsigned run_threads = 1;
  auto* run = app.add_subcommand("run", "Run the whole pipeline from a config file");
  run->add_option("--config", rn.config, "Pipeline config (JSON)")->required();
  run->add_option("--out", rn.out, "Override out_dir");
  auto* seed_opt = run->add_option("--seed", run_seed, "Override seed");
  auto* threads_opt = run->add_option("--threads", run_threads, "Cap worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*extract) return cmd_extract(ex);
    if (*nonce) return cmd_nonce(nc);
    if (*train) return cmd_train(tr);
    if (*evaluate_cmd) {
      if (*window_opt) ev.window = window;
      return cmd_evaluate(ev);
    }
    if (*report) return cmd_report(rp);
    if (*run) {
      if (*seed_opt) rn.seed = run_seed;
      if (*threads_opt) rn.threads = run_threads;
      return cmd_run(rn);
    }
  } catch (const UsageError& e) {
    std::cerr << "agreebench: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "agreebench: " << e.what() << '\n';
    return kUsage;
  } catch (const StageError& e) {
    std::cerr << "agreebench: stage " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "agreebench: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
