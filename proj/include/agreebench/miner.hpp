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
// Mining of long-distance agreement constructions.
//
// Every dependency arc gives a (cue, target) pair ordered by surface position,
// whichever end is the head. The construction of the pair is
//
//   cue POS, POS of each top-level node between them, target POS
//
// where a top-level node is an intervening token whose head lies outside the
// open interval (cue, target). A construction survives when no instance with
// both ends marked for Number disagrees, and both numbers are attested often
// enough.

#ifndef AGREEBENCH_MINER_HPP_
#define AGREEBENCH_MINER_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "agreebench/conllu.hpp"
#include "agreebench/lexicon.hpp"
#include "agreebench/test_item.hpp"
#include "agreebench/vocabulary.hpp"
#include "json.hpp"

namespace agreebench {

struct Arc {
  int cue = 0;
  int target = 0;
  bool cue_is_head = false;

  friend bool operator==(const Arc&, const Arc&) = default;
};

inline std::vector<Arc> extract_arcs(const Sentence& sentence) {
  std::vector<Arc> arcs;
  for (const auto& tok : sentence.tokens) {
    if (tok.head == 0) continue;
    if (tok.head < tok.index) {
      arcs.push_back(Arc{tok.head, tok.index, true});
    } else {
      arcs.push_back(Arc{tok.index, tok.head, false});
    }
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
    return std::tie(a.cue, a.target) < std::tie(b.cue, b.target);
  });
  return arcs;
}

// Indices of the intervening tokens whose head is not strictly inside
// (cue, target), in surface order.
inline std::vector<int> top_level_nodes(const Sentence& sentence, int cue,
                                        int target) {
  std::vector<int> nodes;
  for (int i = cue + 1; i < target; ++i) {
    const int head = sentence.at(i).head;
    if (head <= cue || head >= target) nodes.push_back(i);
  }
  return nodes;
}

inline std::vector<std::string> context_of(const Sentence& sentence, int cue,
                                           int target) {
  std::vector<std::string> pos;
  for (int i : top_level_nodes(sentence, cue, target)) {
    pos.push_back(sentence.at(i).upos);
  }
  return pos;
}

// Intervening tokens with the cue's POS and the opposite Number.
inline int count_attractors(const Sentence& sentence, int cue, int target,
                            std::string_view cue_pos, Number cue_number) {
  const Number attractor = opposite(cue_number);
  if (attractor == Number::kUnknown) return 0;
  int n = 0;
  for (int i = cue + 1; i < target; ++i) {
    const Token& t = sentence.at(i);
    if (t.upos == cue_pos && t.number() == attractor) ++n;
  }
  return n;
}

struct Instance {
  std::string sent_id;
  int cue_index = 0;
  int target_index = 0;
  Number cue_number = Number::kUnknown;
  Number target_number = Number::kUnknown;
  std::vector<int> context_top_indices;
  bool cue_is_head = false;

  bool annotated() const {
    return cue_number != Number::kUnknown && target_number != Number::kUnknown;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Construction {
  std::string id;
  std::string cue_pos;
  std::string target_pos;
  std::vector<std::string> context_pos;
  std::size_t instance_count_sing = 0;
  std::size_t instance_count_plur = 0;
  std::vector<Instance> instances;
};

inline std::string construction_id(const std::string& cue_pos,
                                   const std::vector<std::string>& context,
                                   const std::string& target_pos) {
  std::string id = cue_pos;
  for (const auto& p : context) id += " " + p;
  id += " " + target_pos;
  return id;
}

struct MiningOptions {
  int min_context_tokens = 3;
  std::size_t min_per_number = 10;
};

// All candidate constructions before filtering, keyed by id. Each candidate's
// instances are in (sent_id, cue, target) order.
inline std::map<std::string, Construction> collect_candidates(
    const std::vector<Sentence>& treebank, int min_context_tokens) {
  std::map<std::string, Construction> groups;
  for (const auto& s : treebank) {
    for (const Arc& arc : extract_arcs(s)) {
      if (arc.target - arc.cue - 1 < min_context_tokens) continue;
      const Token& cue = s.at(arc.cue);
      const Token& target = s.at(arc.target);
      auto context = context_of(s, arc.cue, arc.target);
      std::string id = construction_id(cue.upos, context, target.upos);
      auto [it, inserted] = groups.try_emplace(id);
      Construction& c = it->second;
      if (inserted) {
        c.id = id;
        c.cue_pos = cue.upos;
        c.target_pos = target.upos;
        c.context_pos = std::move(context);
      }
      c.instances.push_back(Instance{s.sent_id, arc.cue, arc.target,
                                     cue.number(), target.number(),
                                     top_level_nodes(s, arc.cue, arc.target),
                                     arc.cue_is_head});
    }
  }
  for (auto& [id, c] : groups) {
    std::sort(c.instances.begin(), c.instances.end(),
              [](const Instance& a, const Instance& b) {
                return std::tie(a.sent_id, a.cue_index, a.target_index) <
                       std::tie(b.sent_id, b.cue_index, b.target_index);
              });
  }
  return groups;
}

// Constructions sorted by id.
inline std::vector<Construction> mine_constructions(
    const std::vector<Sentence>& treebank, const MiningOptions& options = {}) {
  std::vector<Construction> kept;
  for (auto& [id, c] :
       collect_candidates(treebank, options.min_context_tokens)) {
    bool agrees = true;
    for (const auto& inst : c.instances) {
      if (!inst.annotated()) continue;
      if (inst.cue_number != inst.target_number) {
        agrees = false;
        break;
      }
      if (inst.cue_number == Number::kSing) ++c.instance_count_sing;
      if (inst.cue_number == Number::kPlur) ++c.instance_count_plur;
    }
    if (!agrees) continue;
    if (c.instance_count_sing < options.min_per_number ||
        c.instance_count_plur < options.min_per_number) {
      continue;
    }
    kept.push_back(std::move(c));
  }
  return kept;
}

inline std::unordered_map<std::string, const Sentence*> index_by_id(
    const std::vector<Sentence>& treebank) {
  std::unordered_map<std::string, const Sentence*> index;
  for (const auto& s : treebank) index.emplace(s.sent_id, &s);
  return index;
}

inline std::string instance_item_id(const Instance& inst) {
  return inst.sent_id + ":" + std::to_string(inst.cue_index) + "-" +
         std::to_string(inst.target_index);
}

// Builds the item for one instance, or nothing when the instance does not
// qualify: Number unannotated, a cue..target word outside the vocabulary, or
// no distinct in-vocabulary counterpart of the target.
inline std::optional<TestItem> make_original_item(
    const Sentence& s, const Construction& c, const Instance& inst,
    const Vocabulary& vocab, const CounterpartIndex& counterparts) {
  if (!inst.annotated()) return std::nullopt;
  for (int i = inst.cue_index; i <= inst.target_index; ++i) {
    if (!vocab.contains(s.at(i).form)) return std::nullopt;
  }
  const Token& target = s.at(inst.target_index);
  auto wrong = counterparts.counterpart(target);
  if (!wrong || *wrong == target.form || !vocab.contains(*wrong)) {
    return std::nullopt;
  }
  TestItem item;
  item.item_id = instance_item_id(inst);
  item.construction_id = c.id;
  item.kind = ItemKind::kOriginal;
  item.source_sent_id = inst.sent_id;
  item.variant_index = 0;
  for (int i = 1; i < inst.target_index; ++i) {
    item.prefix.push_back(s.at(i).form);
  }
  item.correct_form = target.form;
  item.wrong_form = *wrong;
  item.cue_offset = inst.cue_index - 1;
  item.n_attractors = count_attractors(s, inst.cue_index, inst.target_index,
                                       c.cue_pos, inst.cue_number);
  return item;
}

inline std::vector<TestItem> extract_original_testset(
    const std::vector<Sentence>& treebank,
    const std::vector<Construction>& constructions, const Vocabulary& vocab,
    const CounterpartIndex& counterparts) {
  auto by_id = index_by_id(treebank);
  std::vector<TestItem> items;
  for (const auto& c : constructions) {
    for (const auto& inst : c.instances) {
      auto it = by_id.find(inst.sent_id);
      if (it == by_id.end()) continue;
      if (auto item = make_original_item(*it->second, c, inst, vocab,
                                         counterparts)) {
        items.push_back(std::move(*item));
      }
    }
  }
  return items;
}

inline nlohmann::ordered_json to_json(const Instance& inst) {
  nlohmann::ordered_json j;
  j["sent_id"] = inst.sent_id;
  j["cue_index"] = inst.cue_index;
  j["target_index"] = inst.target_index;
  j["cue_number"] = to_string(inst.cue_number);
  j["target_number"] = to_string(inst.target_number);
  j["context_top_indices"] = inst.context_top_indices;
  j["cue_is_head"] = inst.cue_is_head;
  return j;
}

inline nlohmann::ordered_json to_json(const Construction& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["cue_pos"] = c.cue_pos;
  j["target_pos"] = c.target_pos;
  j["context_pos"] = c.context_pos;
  j["instance_count_sing"] = c.instance_count_sing;
  j["instance_count_plur"] = c.instance_count_plur;
  auto instances = nlohmann::ordered_json::array();
  for (const auto& inst : c.instances) instances.push_back(to_json(inst));
  j["instances"] = std::move(instances);
  return j;
}

}  // namespace agreebench

#endif  // AGREEBENCH_MINER_HPP_
