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

#ifndef AGREEBENCH_VOCABULARY_HPP_
#define AGREEBENCH_VOCABULARY_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace agreebench {

using WordId = std::uint32_t;
using TokenizedSentence = std::vector<std::string>;

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

inline constexpr WordId kUnkId = 0;
inline constexpr WordId kBosId = 1;
inline constexpr WordId kEosId = 2;
inline constexpr WordId kFirstWordId = 3;

inline bool is_reserved(std::string_view w) {
  return w == kUnk || w == kBos || w == kEos;
}

// Frequency-ranked word list. Ids 0..2 are the reserved symbols, ranked words
// follow from id 3 in rank order. Reserved symbols do not use the size budget.
class Vocabulary {
 public:
  Vocabulary() { rebuild_index(); }

  // `ranked` must already be in rank order.
  explicit Vocabulary(std::vector<std::pair<std::string, std::uint64_t>> ranked)
      : ranked_(std::move(ranked)) {
    rebuild_index();
  }

  const std::vector<std::pair<std::string, std::uint64_t>>& ranked() const {
    return ranked_;
  }
  std::size_t size() const { return ranked_.size(); }
  bool empty() const { return ranked_.empty(); }

  // Ranked words only; reserved symbols are not "in vocabulary".
  bool contains(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it != index_.end() && it->second >= kFirstWordId;
  }

  // Unknown words map to kUnkId. Reserved symbol spellings map to themselves.
  WordId id(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? kUnkId : it->second;
  }

  std::string_view word(WordId id) const {
    if (id == kUnkId) return kUnk;
    if (id == kBosId) return kBos;
    if (id == kEosId) return kEos;
    return ranked_.at(id - kFirstWordId).first;
  }

  // Total number of ids including the reserved symbols.
  std::size_t id_count() const { return ranked_.size() + kFirstWordId; }

  std::uint64_t frequency(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end() || it->second < kFirstWordId) return 0;
    return ranked_[it->second - kFirstWordId].second;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.ranked_ == b.ranked_;
  }

 private:
  void rebuild_index() {
    index_.clear();
    index_.emplace(std::string(kUnk), kUnkId);
    index_.emplace(std::string(kBos), kBosId);
    index_.emplace(std::string(kEos), kEosId);
    for (std::size_t i = 0; i < ranked_.size(); ++i) {
      auto [it, inserted] = index_.emplace(
          ranked_[i].first, static_cast<WordId>(i + kFirstWordId));
      if (!inserted) {
        throw std::invalid_argument("duplicate vocabulary word '" +
                                    ranked_[i].first + "'");
      }
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked_;
  std::unordered_map<std::string, WordId> index_;
};

inline std::unordered_map<std::string, std::uint64_t> count_words(
    const std::vector<TokenizedSentence>& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) {
      if (!is_reserved(w)) ++counts[w];
    }
  }
  return counts;
}

// Keeps the `size` most frequent words; ties go to the lexicographically
// smaller word.
inline Vocabulary build_vocab(const std::vector<TokenizedSentence>& corpus,
                              std::size_t size = 50000) {
  auto counts = count_words(corpus);
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(),
                                                            counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > size) ranked.resize(size);
  return Vocabulary(std::move(ranked));
}

inline std::vector<TokenizedSentence> read_corpus(std::istream& in) {
  std::vector<TokenizedSentence> corpus;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    TokenizedSentence sentence;
    std::string w;
    while (words >> w) sentence.push_back(std::move(w));
    if (!sentence.empty()) corpus.push_back(std::move(sentence));
  }
  return corpus;
}

inline std::vector<TokenizedSentence> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus " + path);
  return read_corpus(in);
}

// One "word<TAB>frequency" line per ranked word.
inline void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& [w, f] : vocab.ranked()) out << w << '\t' << f << '\n';
}

// Accepts "word<TAB>freq" lines or bare words (frequency 0), in rank order.
inline Vocabulary read_vocab(std::istream& in) {
  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    std::string word = line.substr(0, tab);
    std::uint64_t freq = 0;
    if (tab != std::string::npos) freq = std::stoull(line.substr(tab + 1));
    if (is_reserved(word)) continue;
    ranked.emplace_back(std::move(word), freq);
  }
  return Vocabulary(std::move(ranked));
}

inline Vocabulary read_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path);
  return read_vocab(in);
}

}  // namespace agreebench

#endif  // AGREEBENCH_VOCABULARY_HPP_
