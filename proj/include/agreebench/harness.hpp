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
// Scoring of test items with pluggable language models.

#ifndef AGREEBENCH_HARNESS_HPP_
#define AGREEBENCH_HARNESS_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agreebench/ngram.hpp"
#include "agreebench/parallel.hpp"
#include "agreebench/test_item.hpp"
#include "json.hpp"

namespace agreebench {

class ScorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScorerInfo {
  std::string name;
  std::optional<double> perplexity;  // validation perplexity, if reported
};

struct LogProbs {
  double first = 0.0;
  double second = 0.0;
};

// Maps (prefix, two candidate words) to two natural-log probabilities.
// Implementations must be deterministic and return finite values; failures
// are reported by throwing ScorerError.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual LogProbs score(std::span<const std::string> prefix,
                         const std::string& first,
                         const std::string& second) = 0;
  virtual ScorerInfo info() const = 0;
  // True when score() may be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

enum class Outcome { kCorrect, kIncorrect, kTie, kError };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kCorrect:
      return "correct";
    case Outcome::kIncorrect:
      return "incorrect";
    case Outcome::kTie:
      return "tie";
    default:
      return "error";
  }
}

inline Outcome outcome_from_string(const std::string& s) {
  if (s == "correct") return Outcome::kCorrect;
  if (s == "incorrect") return Outcome::kIncorrect;
  if (s == "tie") return Outcome::kTie;
  if (s == "error") return Outcome::kError;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

struct EvalRecord {
  std::string item_id;
  std::string construction_id;
  ItemKind kind = ItemKind::kOriginal;
  int n_attractors = 0;
  double logprob_correct = 0.0;
  double logprob_wrong = 0.0;
  Outcome outcome = Outcome::kError;
  std::string error;  // set when outcome is kError

  // Ties and errors are not correct.
  bool is_correct() const { return outcome == Outcome::kCorrect; }

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

inline Outcome classify(double logprob_correct, double logprob_wrong) {
  if (logprob_correct > logprob_wrong) return Outcome::kCorrect;
  if (logprob_correct == logprob_wrong) return Outcome::kTie;
  return Outcome::kIncorrect;
}

struct EvaluationResult {
  ScorerInfo scorer;
  std::optional<int> window;
  std::vector<EvalRecord> records;
  std::size_t n_errors = 0;
};

// Prefix seen by the scorer: the last window-1 tokens when windowed.
inline std::span<const std::string> windowed_prefix(
    const std::vector<std::string>& prefix, std::optional<int> window) {
  std::span<const std::string> all(prefix);
  if (!window) return all;
  if (*window < 1) throw std::invalid_argument("window must be positive");
  const std::size_t keep = static_cast<std::size_t>(*window - 1);
  if (all.size() <= keep) return all;
  return all.subspan(all.size() - keep);
}

inline EvalRecord score_item(const TestItem& item, Scorer& scorer,
                             std::optional<int> window) {
  EvalRecord r;
  r.item_id = item.item_id;
  r.construction_id = item.construction_id;
  r.kind = item.kind;
  r.n_attractors = item.n_attractors;
  try {
    LogProbs lp = scorer.score(windowed_prefix(item.prefix, window),
                               item.correct_form, item.wrong_form);
    if (!std::isfinite(lp.first) || !std::isfinite(lp.second)) {
      throw ScorerError("non-finite log-probability");
    }
    r.logprob_correct = lp.first;
    r.logprob_wrong = lp.second;
    r.outcome = classify(lp.first, lp.second);
  } catch (const ScorerError& e) {
    r.outcome = Outcome::kError;
    r.error = e.what();
  }
  return r;
}

// One record per item, in item order. A scorer failure marks that item as an
// error and evaluation continues.
inline EvaluationResult evaluate(const std::vector<TestItem>& testset,
                                 Scorer& scorer,
                                 std::optional<int> window = std::nullopt,
                                 unsigned threads = 1) {
  if (window && *window < 1) {
    throw std::invalid_argument("window must be positive");
  }
  EvaluationResult result;
  result.scorer = scorer.info();
  result.window = window;
  result.records.resize(testset.size());
  const unsigned workers = scorer.concurrent() ? threads : 1;
  parallel_for(testset.size(), workers, [&](std::size_t i) {
    result.records[i] = score_item(testset[i], scorer, window);
  });
  for (const auto& r : result.records) {
    if (r.outcome == Outcome::kError) ++result.n_errors;
  }
  return result;
}

struct ScorerRun {
  Scorer* scorer = nullptr;
  std::optional<int> window;
};

// Evaluates each scorer on the same test set; results keyed by scorer name.
inline std::map<std::string, EvaluationResult> batch_evaluate(
    const std::vector<TestItem>& testset, const std::vector<ScorerRun>& runs,
    unsigned threads = 1) {
  if (runs.empty()) throw std::invalid_argument("no scorers given");
  std::map<std::string, EvaluationResult> out;
  for (const auto& run : runs) {
    if (run.scorer == nullptr) throw std::invalid_argument("null scorer");
    const std::string name = run.scorer->info().name;
    if (out.count(name) != 0) {
      throw std::invalid_argument("duplicate scorer name '" + name + "'");
    }
    out.emplace(name, evaluate(testset, *run.scorer, run.window, threads));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Native scorers

// Log relative frequency with add-one smoothing. When both candidates have
// the same count, the lexicographically larger one is lowered by one ulp so
// that the preferred form matches unigram_choose.
class UnigramScorer : public Scorer {
 public:
  explicit UnigramScorer(FrequencyTable freq, std::string name = "unigram")
      : freq_(std::move(freq)), name_(std::move(name)) {
    for (const auto& [w, c] : freq_) total_ += c;
  }

  LogProbs score(std::span<const std::string>, const std::string& first,
                 const std::string& second) override {
    LogProbs lp{logprob(first), logprob(second)};
    if (lp.first == lp.second && first != second) {
      double& loser = first < second ? lp.second : lp.first;
      loser = std::nextafter(loser, -INFINITY);
    }
    return lp;
  }

  ScorerInfo info() const override { return {name_, std::nullopt}; }
  bool concurrent() const override { return true; }

 private:
  double logprob(const std::string& w) const {
    auto it = freq_.find(w);
    const double c = it == freq_.end() ? 0.0 : static_cast<double>(it->second);
    const double denom =
        static_cast<double>(total_) + static_cast<double>(freq_.size() + 1);
    return std::log((c + 1.0) / denom);
  }

  FrequencyTable freq_;
  std::string name_;
  std::uint64_t total_ = 0;
};

// Scores a candidate after order-1 <s> symbols followed by the prefix.
class KNScorer : public Scorer {
 public:
  KNScorer(std::shared_ptr<const KNModel> model,
           std::optional<double> perplexity = std::nullopt,
           std::string name = "kn")
      : model_(std::move(model)),
        perplexity_(perplexity),
        name_(std::move(name)) {}

  LogProbs score(std::span<const std::string> prefix, const std::string& first,
                 const std::string& second) override {
    Ngram history(model_->order() - 1, kBosId);
    for (const auto& w : prefix) history.push_back(model_->vocab().id(w));
    return {model_->logprob(history, model_->vocab().id(first)),
            model_->logprob(history, model_->vocab().id(second))};
  }

  ScorerInfo info() const override { return {name_, perplexity_}; }
  bool concurrent() const override { return true; }

 private:
  std::shared_ptr<const KNModel> model_;
  std::optional<double> perplexity_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Record I/O. Records are JSON Lines; scorer metadata lives in a sidecar
// "<records>.meta.json".

inline nlohmann::ordered_json to_json(const EvalRecord& r) {
  nlohmann::ordered_json j;
  j["item_id"] = r.item_id;
  j["construction_id"] = r.construction_id;
  j["kind"] = to_string(r.kind);
  j["n_attractors"] = r.n_attractors;
  j["logprob_correct"] = r.logprob_correct;
  j["logprob_wrong"] = r.logprob_wrong;
  j["outcome"] = to_string(r.outcome);
  if (r.outcome == Outcome::kError) j["error"] = r.error;
  return j;
}

inline EvalRecord eval_record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.item_id = j.at("item_id").get<std::string>();
  r.construction_id = j.at("construction_id").get<std::string>();
  r.kind = item_kind_from_string(j.at("kind").get<std::string>());
  r.n_attractors = j.at("n_attractors").get<int>();
  r.logprob_correct = j.at("logprob_correct").get<double>();
  r.logprob_wrong = j.at("logprob_wrong").get<double>();
  r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

inline void write_records(std::ostream& out,
                          const std::vector<EvalRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<EvalRecord> read_records(std::istream& in) {
  std::vector<EvalRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(eval_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("records line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return records;
}

inline nlohmann::ordered_json metadata_json(const EvaluationResult& result) {
  nlohmann::ordered_json j;
  j["name"] = result.scorer.name;
  j["perplexity"] = result.scorer.perplexity
                        ? nlohmann::ordered_json(*result.scorer.perplexity)
                        : nlohmann::ordered_json(nullptr);
  j["window"] = result.window ? nlohmann::ordered_json(*result.window)
                              : nlohmann::ordered_json(nullptr);
  j["n_items"] = result.records.size();
  j["n_errors"] = result.n_errors;
  return j;
}

inline void write_evaluation(const EvaluationResult& result,
                             const std::string& path) {
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write records " + path);
    write_records(out, result.records);
  }
  std::ofstream meta(path + ".meta.json");
  if (!meta) throw std::runtime_error("cannot write " + path + ".meta.json");
  meta << metadata_json(result).dump(2) << '\n';
}

// Reads records and, when present, the metadata sidecar. Without a sidecar
// the scorer name is the file path.
inline EvaluationResult read_evaluation(const std::string& path) {
  EvaluationResult result;
  {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open records " + path);
    result.records = read_records(in);
  }
  result.scorer.name = path;
  std::ifstream meta(path + ".meta.json");
  if (meta) {
    auto j = nlohmann::json::parse(meta);
    result.scorer.name = j.value("name", path);
    if (j.contains("perplexity") && j["perplexity"].is_number()) {
      result.scorer.perplexity = j["perplexity"].get<double>();
    }
    if (j.contains("window") && j["window"].is_number_integer()) {
      result.window = j["window"].get<int>();
    }
  }
  for (const auto& r : result.records) {
    if (r.outcome == Outcome::kError) ++result.n_errors;
  }
  return result;
}

}  // namespace agreebench

#endif  // AGREEBENCH_HARNESS_HPP_
