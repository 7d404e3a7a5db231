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
// Count-based language models: corpus filtering, the unigram baseline and an
// interpolated modified Kneser-Ney n-gram model.
//
// Each training sentence is padded with order-1 <s> symbols and one </s>.
// Every position after the padding is a prediction; <s> is never predicted.
// The predicted outcome set W is the ranked vocabulary plus <unk> and </s>.
//
// For order k with history h (k-1 words) and word w:
//
//   P_k(w|h) = max(a(hw) - D_k(a(hw)), 0) / a(h)
//              + gamma_k(h) * P_{k-1}(w|h')
//   gamma_k(h) = (D_k1 N1(h.) + D_k2 N2(h.) + D_k3 N3+(h.)) / a(h)
//
// where a() is the raw count at the highest order and the continuation count
// N1+(.hw) below it, a(h) = sum_w a(hw), h' drops the oldest word, and
// P_0(w) = 1/|W|. When a(h) = 0 the order is skipped: P_k = P_{k-1}.
//
// Discounts per order come from the counts-of-counts n1..n4 of a() at that
// order:
//
//   Y = n1/(n1 + 2 n2)
//   D1 = 1 - 2Y n2/n1,  D2 = 2 - 3Y n3/n2,  D3+ = 3 - 4Y n4/n3
//
// each clamped to [0, k) for bucket k. A zero denominator makes that discount
// 0.5 k.

#ifndef AGREEBENCH_NGRAM_HPP_
#define AGREEBENCH_NGRAM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "agreebench/vocabulary.hpp"

namespace agreebench {

// ---------------------------------------------------------------------------
// Corpus filtering

// Indices of sentences whose fraction of tokens outside `known` is at most
// max_unknown_ratio. Empty sentences are dropped.
inline std::vector<std::size_t> filter_corpus_indices(
    const std::vector<TokenizedSentence>& keys,
    const std::unordered_set<std::string>& known,
    double max_unknown_ratio = 0.05) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& s = keys[i];
    if (s.empty()) continue;
    std::size_t unknown = 0;
    for (const auto& w : s) {
      if (known.find(w) == known.end()) ++unknown;
    }
    const double ratio =
        static_cast<double>(unknown) / static_cast<double>(s.size());
    if (ratio <= max_unknown_ratio) kept.push_back(i);
  }
  return kept;
}

inline std::vector<TokenizedSentence> filter_corpus(
    const std::vector<TokenizedSentence>& sentences,
    const std::unordered_set<std::string>& known,
    double max_unknown_ratio = 0.05) {
  std::vector<TokenizedSentence> out;
  for (std::size_t i :
       filter_corpus_indices(sentences, known, max_unknown_ratio)) {
    out.push_back(sentences[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unigram baseline

using FrequencyTable = std::unordered_map<std::string, std::uint64_t>;

// Higher count wins; equal counts (including two zeros) go to the
// lexicographically smaller form.
inline const std::string& unigram_choose(const FrequencyTable& freq,
                                         const std::string& form_a,
                                         const std::string& form_b) {
  auto count = [&](const std::string& w) -> std::uint64_t {
    auto it = freq.find(w);
    return it == freq.end() ? 0 : it->second;
  };
  const auto ca = count(form_a);
  const auto cb = count(form_b);
  if (ca != cb) return ca > cb ? form_a : form_b;
  return form_a <= form_b ? form_a : form_b;
}

inline void write_frequency_table(std::ostream& out,
                                  const FrequencyTable& freq) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(freq.begin(),
                                                          freq.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [w, c] : rows) out << w << '\t' << c << '\n';
}

inline FrequencyTable read_frequency_table(std::istream& in) {
  FrequencyTable freq;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("counts line " + std::to_string(line_no) +
                               ": expected word<TAB>count");
    }
    freq[line.substr(0, tab)] += std::stoull(line.substr(tab + 1));
  }
  return freq;
}

// ---------------------------------------------------------------------------
// Kneser-Ney

using Ngram = std::vector<WordId>;

struct NgramHash {
  std::size_t operator()(const Ngram& g) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (WordId w : g) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct Discounts {
  std::array<double, 3> d{};  // D1, D2, D3+

  double for_count(std::uint64_t c) const {
    if (c == 0) return 0.0;
    return d[std::min<std::uint64_t>(c, 3) - 1];
  }
};

// n[0..3] are the numbers of n-grams seen exactly 1..4 times.
inline Discounts compute_discounts(const std::array<std::uint64_t, 4>& n) {
  const double n1 = static_cast<double>(n[0]);
  const double n2 = static_cast<double>(n[1]);
  const double n3 = static_cast<double>(n[2]);
  const double n4 = static_cast<double>(n[3]);
  Discounts out;
  const bool have_y = n1 + 2 * n2 > 0;
  const double y = have_y ? n1 / (n1 + 2 * n2) : 0.0;
  const std::array<double, 3> numer = {n2, n3, n4};
  const std::array<double, 3> denom = {n1, n2, n3};
  for (int k = 1; k <= 3; ++k) {
    double d;
    if (!have_y || denom[k - 1] == 0) {
      d = 0.5 * k;
    } else {
      d = k - (k + 1) * y * numer[k - 1] / denom[k - 1];
    }
    d = std::clamp(d, 0.0, std::nextafter(static_cast<double>(k), 0.0));
    out.d[k - 1] = d;
  }
  return out;
}

struct HistoryStats {
  std::uint64_t total = 0;
  std::array<std::uint64_t, 3> buckets{};  // N1, N2, N3+
};

inline constexpr std::string_view kKnVariant =
    "interpolated-modified-kneser-ney";

class KNModel {
 public:
  // Model with no counts: every word gets 1/|W|.
  static KNModel uniform(Vocabulary vocab, int order = 5) {
    KNModel m;
    m.init(std::move(vocab), order);
    m.finalize();
    return m;
  }

  int order() const { return order_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::string_view variant() const { return kKnVariant; }
  // |W|: ranked words plus <unk> and </s>.
  std::size_t outcome_count() const { return vocab_.size() + 2; }

  const Discounts& discounts(int k) const { return discounts_.at(k - 1); }
  // a() values of order k: raw counts at the top order, continuation below.
  const std::unordered_map<Ngram, std::uint64_t, NgramHash>& table(
      int k) const {
    return counts_.at(k - 1);
  }

  // The predicted outcomes W in id order.
  std::vector<WordId> outcomes() const {
    std::vector<WordId> w = {kUnkId, kEosId};
    for (WordId id = kFirstWordId; id < vocab_.id_count(); ++id) w.push_back(id);
    return w;
  }

  // P(word | history). Only the last order-1 history ids are used.
  double prob(std::span<const WordId> history, WordId word) const {
    if (word == kBosId) word = kUnkId;
    const std::size_t max_hist =
        std::min<std::size_t>(history.size(), order_ - 1);
    const auto hist = history.subspan(history.size() - max_hist);
    double p = 1.0 / static_cast<double>(outcome_count());
    Ngram key;
    for (std::size_t k = 1; k <= max_hist + 1; ++k) {
      key.assign(hist.end() - (k - 1), hist.end());
      auto hs = histories_[k - 1].find(key);
      if (hs == histories_[k - 1].end() || hs->second.total == 0) continue;
      const HistoryStats& st = hs->second;
      key.push_back(word);
      auto c_it = counts_[k - 1].find(key);
      const std::uint64_t c = c_it == counts_[k - 1].end() ? 0 : c_it->second;
      const Discounts& d = discounts_[k - 1];
      const double total = static_cast<double>(st.total);
      const double gamma = (d.d[0] * st.buckets[0] + d.d[1] * st.buckets[1] +
                            d.d[2] * st.buckets[2]) /
                           total;
      p = std::max(static_cast<double>(c) - d.for_count(c), 0.0) / total +
          gamma * p;
    }
    return p;
  }

  double logprob(std::span<const WordId> history, WordId word) const {
    return std::log(prob(history, word));
  }

  Ngram map(const std::vector<std::string>& words) const {
    Ngram ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(vocab_.id(w));
    return ids;
  }

  // Copy with one top-order count replaced. Discounts and lower-order
  // continuation counts are kept as they are; for sensitivity checks.
  KNModel with_count(const Ngram& top, std::uint64_t count) const {
    if (static_cast<int>(top.size()) != order_) {
      throw std::invalid_argument("with_count needs a top-order n-gram");
    }
    KNModel m = *this;
    m.counts_[order_ - 1][top] = count;
    m.finalize();
    m.discounts_ = discounts_;
    return m;
  }

  void save(std::ostream& out) const;
  static KNModel load(std::istream& in);
  // Plain-text audit dump: discounts and every table, sorted.
  void dump_counts(std::ostream& out) const;

  friend KNModel train_kn(const std::vector<TokenizedSentence>&,
                          const Vocabulary&, int);

 private:
  void init(Vocabulary vocab, int order) {
    if (order < 1) throw std::invalid_argument("order must be positive");
    vocab_ = std::move(vocab);
    order_ = order;
    counts_.assign(order, {});
    histories_.assign(order, {});
    discounts_.assign(order, {});
  }

  void finalize() {
    for (int k = 1; k <= order_; ++k) {
      std::array<std::uint64_t, 4> coc{};
      auto& hist = histories_[k - 1];
      hist.clear();
      for (const auto& [g, c] : counts_[k - 1]) {
        if (c == 0) continue;
        if (c <= 4) ++coc[c - 1];
        Ngram h(g.begin(), g.end() - 1);
        HistoryStats& st = hist[h];
        st.total += c;
        ++st.buckets[std::min<std::uint64_t>(c, 3) - 1];
      }
      discounts_[k - 1] = compute_discounts(coc);
    }
  }

  int order_ = 5;
  Vocabulary vocab_;
  std::vector<std::unordered_map<Ngram, std::uint64_t, NgramHash>> counts_;
  std::vector<std::unordered_map<Ngram, HistoryStats, NgramHash>> histories_;
  std::vector<Discounts> discounts_;
};

// `corpus` holds raw tokens; words outside `vocab` become <unk>.
inline KNModel train_kn(const std::vector<TokenizedSentence>& corpus,
                        const Vocabulary& vocab, int order = 5) {
  KNModel m;
  m.init(vocab, order);
  std::size_t predicted = 0;
  auto& top = m.counts_[order - 1];
  Ngram padded;
  for (const auto& sentence : corpus) {
    padded.assign(order - 1, kBosId);
    for (const auto& w : sentence) padded.push_back(vocab.id(w));
    padded.push_back(kEosId);
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      ++top[Ngram(padded.begin() + (i - order + 1), padded.begin() + i + 1)];
      ++predicted;
    }
  }
  if (predicted == 0) throw std::invalid_argument("empty training corpus");
  // Continuation counts: N1+(.u) = distinct left extensions of u.
  for (int k = order - 1; k >= 1; --k) {
    auto& lower = m.counts_[k - 1];
    for (const auto& [g, c] : m.counts_[k]) {
      if (c > 0) ++lower[Ngram(g.begin() + 1, g.end())];
    }
  }
  m.finalize();
  return m;
}

// Natural-log P(word | history). Unknown strings map to <unk>.
inline double kn_logprob(const KNModel& model,
                         const std::vector<std::string>& history,
                         const std::string& word) {
  const Ngram h = model.map(history);
  return model.logprob(h, model.vocab().id(word));
}

// exp of the mean negative log-probability over predicted positions. With
// exclude_unknown, positions whose target is <unk> are skipped (they still
// appear in later histories). Throws when no position is counted.
inline double perplexity(const KNModel& model,
                         const std::vector<TokenizedSentence>& corpus,
                         bool exclude_unknown = true) {
  const int order = model.order();
  double sum = 0.0;
  std::size_t n = 0;
  Ngram padded;
  for (const auto& sentence : corpus) {
    padded.assign(order - 1, kBosId);
    for (const auto& w : sentence) padded.push_back(model.vocab().id(w));
    padded.push_back(kEosId);
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      if (exclude_unknown && padded[i] == kUnkId) continue;
      std::span<const WordId> hist(padded.data(), i);
      sum += model.logprob(hist, padded[i]);
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("no tokens to evaluate");
  return std::exp(-sum / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Serialization
//
// Binary layout (little-endian as written by the host, version 1):
//   "AGBKN" '\0' u32 version u32 order
//   u32 variant_len bytes
//   u64 vocab_size, then per word: u32 len bytes u64 freq
//   per order k=1..order: f64 D1 D2 D3+, u64 entries, then per entry
//     k x u32 ids, u64 count          (entries sorted by ids)

namespace detail {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated model file");
  return v;
}

inline void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  auto len = get<std::uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("truncated model file");
  return s;
}

template <typename Map>
std::vector<std::pair<Ngram, std::uint64_t>> sorted_entries(const Map& m) {
  std::vector<std::pair<Ngram, std::uint64_t>> rows(m.begin(), m.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline constexpr char kModelMagic[6] = {'A', 'G', 'B', 'K', 'N', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

}  // namespace detail

inline void KNModel::save(std::ostream& out) const {
  out.write(detail::kModelMagic, sizeof(detail::kModelMagic));
  detail::put<std::uint32_t>(out, detail::kModelVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(order_));
  detail::put_string(out, kKnVariant);
  detail::put<std::uint64_t>(out, vocab_.size());
  for (const auto& [w, f] : vocab_.ranked()) {
    detail::put_string(out, w);
    detail::put<std::uint64_t>(out, f);
  }
  for (int k = 1; k <= order_; ++k) {
    for (double d : discounts_[k - 1].d) detail::put<double>(out, d);
    auto rows = detail::sorted_entries(counts_[k - 1]);
    detail::put<std::uint64_t>(out, rows.size());
    for (const auto& [g, c] : rows) {
      for (WordId w : g) detail::put<std::uint32_t>(out, w);
      detail::put<std::uint64_t>(out, c);
    }
  }
}

inline KNModel KNModel::load(std::istream& in) {
  char magic[sizeof(detail::kModelMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kModelMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not an agreebench KN model");
  }
  const auto version = detail::get<std::uint32_t>(in);
  if (version != detail::kModelVersion) {
    throw std::runtime_error("unsupported KN model version " +
                             std::to_string(version));
  }
  const int order = static_cast<int>(detail::get<std::uint32_t>(in));
  const std::string variant = detail::get_string(in);
  if (variant != kKnVariant) {
    throw std::runtime_error("unsupported smoothing variant " + variant);
  }
  const auto vocab_size = detail::get<std::uint64_t>(in);
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  ranked.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    std::string w = detail::get_string(in);
    auto f = detail::get<std::uint64_t>(in);
    ranked.emplace_back(std::move(w), f);
  }
  KNModel m;
  m.init(Vocabulary(std::move(ranked)), order);
  std::vector<Discounts> stored(order);
  for (int k = 1; k <= order; ++k) {
    for (double& d : stored[k - 1].d) d = detail::get<double>(in);
    const auto entries = detail::get<std::uint64_t>(in);
    auto& table = m.counts_[k - 1];
    table.reserve(entries);
    for (std::uint64_t e = 0; e < entries; ++e) {
      Ngram g(k);
      for (auto& w : g) w = detail::get<std::uint32_t>(in);
      table.emplace(std::move(g), detail::get<std::uint64_t>(in));
    }
  }
  m.finalize();
  m.discounts_ = std::move(stored);
  return m;
}

inline void KNModel::dump_counts(std::ostream& out) const {
  out << "# agreebench kn counts v" << detail::kModelVersion << '\n';
  out << "# smoothing = " << kKnVariant << '\n';
  out << "# order = " << order_ << '\n';
  out << "# outcomes = " << outcome_count() << '\n';
  for (int k = 1; k <= order_; ++k) {
    const auto& d = discounts_[k - 1].d;
    out << "\n\\" << k << "-grams: "
        << (k == order_ ? "raw counts" : "continuation counts")
        << " D1=" << d[0] << " D2=" << d[1] << " D3+=" << d[2] << '\n';
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    for (const auto& [g, c] : counts_[k - 1]) {
      std::string text;
      for (WordId w : g) {
        if (!text.empty()) text += ' ';
        text += vocab_.word(w);
      }
      rows.emplace_back(std::move(text), c);
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& [text, c] : rows) out << text << '\t' << c << '\n';
  }
}

inline void save_model_file(const KNModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model " + path);
  model.save(out);
}

inline KNModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path);
  return KNModel::load(in);
}

}  // namespace agreebench

#endif  // AGREEBENCH_NGRAM_HPP_
