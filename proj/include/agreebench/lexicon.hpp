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
// Substitution lexicon and Number counterpart index, both built from a
// treebank.

#ifndef AGREEBENCH_LEXICON_HPP_
#define AGREEBENCH_LEXICON_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "agreebench/conllu.hpp"

namespace agreebench {

inline constexpr std::array<std::string_view, 6> kContentPos = {
    "NOUN", "VERB", "ADJ", "PROPN", "NUM", "ADV"};

inline bool is_content_pos(std::string_view upos) {
  return std::find(kContentPos.begin(), kContentPos.end(), upos) !=
         kContentPos.end();
}

struct LexiconEntry {
  std::string form;
  std::string lemma;
  std::uint64_t frequency = 0;

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

namespace detail {

// Most frequent key of a count map; ties go to the smallest key.
template <typename Map>
const typename Map::key_type& most_frequent(const Map& counts) {
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;  // map order breaks ties
  }
  return best->first;
}

}  // namespace detail

// (upos, canonical feats) -> candidate substitutes, most frequent first.
class SubstitutionLexicon {
 public:
  using Key = std::pair<std::string, std::string>;  // upos, feats.str()

  double ambiguity_threshold() const { return threshold_; }

  const std::vector<LexiconEntry>& candidates(std::string_view upos,
                                              const MorphFeatures& feats) const {
    static const std::vector<LexiconEntry> kEmpty;
    auto it = pools_.find(Key(std::string(upos), feats.str()));
    return it == pools_.end() ? kEmpty : it->second;
  }

  const std::map<Key, std::vector<LexiconEntry>>& pools() const {
    return pools_;
  }

  bool contains_form(std::string_view form) const {
    for (const auto& [key, pool] : pools_) {
      for (const auto& e : pool) {
        if (e.form == form) return true;
      }
    }
    return false;
  }

 private:
  friend SubstitutionLexicon build_lexicon(const std::vector<Sentence>&,
                                           double);
  double threshold_ = 0.1;
  std::map<Key, std::vector<LexiconEntry>> pools_;
};

// Indexes content words whose surface form carries a different POS in at
// most `ambiguity_threshold` of its treebank occurrences.
inline SubstitutionLexicon build_lexicon(const std::vector<Sentence>& treebank,
                                         double ambiguity_threshold = 0.1) {
  std::map<std::string, std::uint64_t> form_total;
  std::map<std::pair<std::string, std::string>, std::uint64_t> form_pos;
  // (upos, feats, form) -> lemma -> count
  std::map<std::tuple<std::string, std::string, std::string>,
           std::map<std::string, std::uint64_t>>
      slots;
  for (const auto& s : treebank) {
    for (const auto& t : s.tokens) {
      ++form_total[t.form];
      ++form_pos[{t.form, t.upos}];
      if (is_content_pos(t.upos)) ++slots[{t.upos, t.feats.str(), t.form}][t.lemma];
    }
  }

  SubstitutionLexicon lex;
  lex.threshold_ = ambiguity_threshold;
  for (const auto& [key, lemmas] : slots) {
    const auto& [upos, feats, form] = key;
    const double total = static_cast<double>(form_total[form]);
    const double same = static_cast<double>(form_pos[{form, upos}]);
    if ((total - same) / total > ambiguity_threshold) continue;
    std::uint64_t freq = 0;
    for (const auto& [lemma, c] : lemmas) freq += c;
    lex.pools_[{upos, feats}].push_back(
        LexiconEntry{form, detail::most_frequent(lemmas), freq});
  }
  for (auto& [key, pool] : lex.pools_) {
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
      if (a.frequency != b.frequency) return a.frequency > b.frequency;
      return a.form < b.form;
    });
  }
  return lex;
}

// (lemma, upos, feats without Number, Number) -> most frequent form.
class CounterpartIndex {
 public:
  struct Key {
    std::string lemma;
    std::string upos;
    std::string feats_without_number;
    Number number = Number::kUnknown;

    friend auto operator<=>(const Key&, const Key&) = default;
  };

  static Key key_of(std::string_view lemma, std::string_view upos,
                    const MorphFeatures& feats) {
    MorphFeatures rest = feats;
    rest.erase("Number");
    return Key{std::string(lemma), std::string(upos), rest.str(),
               number_of(feats)};
  }

  std::optional<std::string> lookup(const Key& key) const {
    auto it = forms_.find(key);
    if (it == forms_.end()) return std::nullopt;
    return it->second;
  }

  // The form identical to (lemma, upos, feats) except for a flipped Number.
  std::optional<std::string> counterpart(std::string_view lemma,
                                         std::string_view upos,
                                         const MorphFeatures& feats) const {
    Key key = key_of(lemma, upos, feats);
    if (key.number == Number::kUnknown) return std::nullopt;
    key.number = opposite(key.number);
    return lookup(key);
  }

  std::optional<std::string> counterpart(const Token& tok) const {
    return counterpart(tok.lemma, tok.upos, tok.feats);
  }

  std::size_t size() const { return forms_.size(); }

 private:
  friend CounterpartIndex build_counterpart_index(const std::vector<Sentence>&);
  std::map<Key, std::string> forms_;
};

inline CounterpartIndex build_counterpart_index(
    const std::vector<Sentence>& treebank) {
  std::map<CounterpartIndex::Key, std::map<std::string, std::uint64_t>> counts;
  for (const auto& s : treebank) {
    for (const auto& t : s.tokens) {
      auto key = CounterpartIndex::key_of(t.lemma, t.upos, t.feats);
      if (key.number == Number::kUnknown) continue;
      ++counts[key][t.form];
    }
  }
  CounterpartIndex index;
  for (const auto& [key, forms] : counts) {
    index.forms_.emplace(key, detail::most_frequent(forms));
  }
  return index;
}

}  // namespace agreebench

#endif  // AGREEBENCH_LEXICON_HPP_
