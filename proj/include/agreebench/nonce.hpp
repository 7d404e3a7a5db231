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
// Nonce variants: every content word of the prefix and the target is swapped
// for a random lexicon word with the same POS and feature bundle. Function
// words and punctuation are copied. Each item draws from its own stream
// seeded by (master seed, item_id), so results do not depend on item order or
// thread scheduling.

#ifndef AGREEBENCH_NONCE_HPP_
#define AGREEBENCH_NONCE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "agreebench/conllu.hpp"
#include "agreebench/lexicon.hpp"
#include "agreebench/miner.hpp"
#include "agreebench/parallel.hpp"
#include "agreebench/random.hpp"
#include "agreebench/test_item.hpp"
#include "agreebench/vocabulary.hpp"

namespace agreebench {

struct NonceOptions {
  int n_variants = 9;
  std::uint64_t seed = 0;
  // When null the target is not required to be in an LM vocabulary.
  const Vocabulary* vocab = nullptr;
};

namespace detail {

inline std::vector<const LexiconEntry*> slot_candidates(
    const Token& tok, bool is_target, const SubstitutionLexicon& lexicon,
    const CounterpartIndex& counterparts, const Vocabulary* vocab) {
  std::vector<const LexiconEntry*> out;
  for (const auto& e : lexicon.candidates(tok.upos, tok.feats)) {
    if (e.form == tok.form) continue;
    if (is_target) {
      auto cp = counterparts.counterpart(e.lemma, tok.upos, tok.feats);
      if (!cp || *cp == e.form) continue;
      if (vocab && (!vocab->contains(e.form) || !vocab->contains(*cp))) {
        continue;
      }
    }
    out.push_back(&e);
  }
  return out;
}

}  // namespace detail

// The sentence's tokens 1..prefix.size() must spell the item's prefix.
inline std::vector<TestItem> generate_nonce(
    const TestItem& item, const Sentence& sentence,
    const SubstitutionLexicon& lexicon, const CounterpartIndex& counterparts,
    const NonceOptions& options) {
  if (item.kind != ItemKind::kOriginal) {
    throw std::invalid_argument("nonce variants need an original item: " +
                                item.item_id);
  }
  const int target = static_cast<int>(item.prefix.size()) + 1;
  if (static_cast<int>(sentence.size()) < target) {
    throw std::invalid_argument("sentence " + sentence.sent_id +
                                " is shorter than item " + item.item_id);
  }
  for (int i = 1; i < target; ++i) {
    if (sentence.at(i).form != item.prefix[i - 1]) {
      throw std::invalid_argument("sentence " + sentence.sent_id +
                                  " does not match prefix of " + item.item_id);
    }
  }

  // Candidate pools are the same for every variant.
  std::vector<std::vector<const LexiconEntry*>> pools(target + 1);
  for (int i = 1; i <= target; ++i) {
    const Token& tok = sentence.at(i);
    if (!is_content_pos(tok.upos)) continue;
    pools[i] = detail::slot_candidates(tok, i == target, lexicon, counterparts,
                                       options.vocab);
  }

  SplitMix64 rng(derive_seed(options.seed, item.item_id));
  const int cue = item.cue_offset + 1;
  std::vector<TestItem> variants;
  variants.reserve(options.n_variants);
  for (int v = 1; v <= options.n_variants; ++v) {
    Sentence variant;
    variant.sent_id = sentence.sent_id;
    variant.tokens.assign(sentence.tokens.begin(),
                          sentence.tokens.begin() + target);
    TestItem out = item;
    out.item_id = item.item_id + "#v" + std::to_string(v);
    out.kind = ItemKind::kNonce;
    out.variant_index = v;
    out.fallback_slots.clear();
    for (int i = 1; i <= target; ++i) {
      Token& tok = variant.at(i);
      if (!is_content_pos(tok.upos)) continue;
      const auto& pool = pools[i];
      if (pool.empty()) {
        out.fallback_slots.push_back(i - 1);
        continue;
      }
      const LexiconEntry* pick = pool[rng.below(pool.size())];
      tok.form = pick->form;
      tok.lemma = pick->lemma;
      if (i == target) {
        out.correct_form = pick->form;
        out.wrong_form = *counterparts.counterpart(pick->lemma, tok.upos,
                                                   tok.feats);
      } else {
        out.prefix[i - 1] = pick->form;
      }
    }
    out.n_attractors =
        cue >= 1 ? count_attractors(variant, cue, target, variant.at(cue).upos,
                                    variant.at(cue).number())
                 : 0;
    variants.push_back(std::move(out));
  }
  return variants;
}

// Variants for every original item, grouped per item in input order. Items
// whose source sentence is missing raise std::invalid_argument.
inline std::vector<TestItem> generate_nonce_all(
    const std::vector<TestItem>& items, const std::vector<Sentence>& treebank,
    const SubstitutionLexicon& lexicon, const CounterpartIndex& counterparts,
    const NonceOptions& options, unsigned threads = 1) {
  auto by_id = index_by_id(treebank);
  std::vector<std::vector<TestItem>> per_item(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    const TestItem& item = items[i];
    if (item.kind != ItemKind::kOriginal) return;
    auto it = by_id.find(item.source_sent_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("item " + item.item_id +
                                  " refers to unknown sentence " +
                                  item.source_sent_id);
    }
    per_item[i] =
        generate_nonce(item, *it->second, lexicon, counterparts, options);
  });
  std::vector<TestItem> out;
  for (auto& v : per_item) {
    for (auto& item : v) out.push_back(std::move(item));
  }
  return out;
}

// Human-experiment distractors: random treebank sentences cut before a
// content word marked Sing or Plur. Returns each original filler followed by
// its nonce variants.
inline std::vector<TestItem> generate_fillers(
    const std::vector<Sentence>& treebank, const SubstitutionLexicon& lexicon,
    const CounterpartIndex& counterparts, std::size_t n,
    const NonceOptions& options) {
  std::vector<TestItem> out;
  if (n == 0) return out;

  auto eligible = [&](const Sentence& s) {
    std::vector<int> positions;
    for (int i = 2; i <= static_cast<int>(s.size()); ++i) {
      const Token& t = s.at(i);
      if (!is_content_pos(t.upos) || t.number() == Number::kUnknown) continue;
      auto cp = counterparts.counterpart(t);
      if (!cp || *cp == t.form) continue;
      if (options.vocab &&
          (!options.vocab->contains(t.form) || !options.vocab->contains(*cp))) {
        continue;
      }
      positions.push_back(i);
    }
    return positions;
  };
  bool any = false;
  for (const auto& s : treebank) {
    if (!eligible(s).empty()) {
      any = true;
      break;
    }
  }
  if (!any) {
    throw std::runtime_error("no treebank sentence can serve as a filler");
  }

  SplitMix64 rng(derive_seed(options.seed, "fillers"));
  for (std::size_t k = 1; k <= n; ++k) {
    const Sentence* s = nullptr;
    std::vector<int> positions;
    while (positions.empty()) {
      s = &treebank[rng.below(treebank.size())];
      positions = eligible(*s);
    }
    const int cut = positions[rng.below(positions.size())];
    const Token& target = s->at(cut);
    TestItem filler;
    filler.item_id = "filler-" + std::to_string(k);
    filler.construction_id = kFillerConstruction;
    filler.kind = ItemKind::kOriginal;
    filler.source_sent_id = s->sent_id;
    for (int i = 1; i < cut; ++i) filler.prefix.push_back(s->at(i).form);
    filler.correct_form = target.form;
    filler.wrong_form = *counterparts.counterpart(target);
    filler.cue_offset = -1;
    filler.n_attractors = 0;
    auto variants = generate_nonce(filler, *s, lexicon, counterparts, options);
    out.push_back(std::move(filler));
    for (auto& v : variants) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace agreebench

#endif  // AGREEBENCH_NONCE_HPP_
