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
// Aggregation of evaluation records and human judgments.
//
// Model accuracy is computed per scorer, then averaged over scorers; the
// spread is the population standard deviation (divide by n). Ties count as
// incorrect. Records with outcome "error" are left out of both numerator and
// denominator.

#ifndef AGREEBENCH_STATS_HPP_
#define AGREEBENCH_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "agreebench/harness.hpp"
#include "agreebench/random.hpp"
#include "agreebench/test_item.hpp"

namespace agreebench {

enum class GroupBy { kOverall, kKind, kConstruction, kAttractors };

// Attractor buckets: "0", "1", "2", "3+".
inline std::string attractor_bucket(int n) {
  return n >= 3 ? "3+" : std::to_string(std::max(n, 0));
}

// Group-relevant facts about one item.
struct ItemFacts {
  std::string construction_id;
  ItemKind kind = ItemKind::kOriginal;
  int n_attractors = 0;
};

inline ItemFacts facts_of(const EvalRecord& r) {
  return {r.construction_id, r.kind, r.n_attractors};
}

inline ItemFacts facts_of(const TestItem& item) {
  return {item.construction_id, item.kind, item.n_attractors};
}

inline std::vector<std::string> group_parts(const ItemFacts& f,
                                            const std::vector<GroupBy>& by) {
  std::vector<std::string> parts;
  for (GroupBy g : by) {
    switch (g) {
      case GroupBy::kOverall:
        parts.emplace_back("overall");
        break;
      case GroupBy::kKind:
        parts.emplace_back(to_string(f.kind));
        break;
      case GroupBy::kConstruction:
        parts.push_back(f.construction_id);
        break;
      case GroupBy::kAttractors:
        parts.push_back(attractor_bucket(f.n_attractors));
        break;
    }
  }
  if (parts.empty()) parts.emplace_back("overall");
  return parts;
}

struct AccuracyCell {
  std::vector<std::string> group;  // one entry per grouping dimension
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_items = 0;
  std::size_t n_scorers = 0;
};

inline double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

inline double population_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Fraction correct among non-error records; nullopt when none are scored.
inline std::optional<double> accuracy(const std::vector<EvalRecord>& records) {
  std::size_t n = 0, correct = 0;
  for (const auto& r : records) {
    if (r.outcome == Outcome::kError) continue;
    ++n;
    if (r.is_correct()) ++correct;
  }
  if (n == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(n);
}

// Cells in lexicographic group order. Groups with no scored record are
// omitted. All sets must cover the same item ids.
inline std::vector<AccuracyCell> accuracy_by(
    const std::vector<std::vector<EvalRecord>>& record_sets,
    const std::vector<GroupBy>& grouping) {
  if (record_sets.empty()) return {};
  std::set<std::string> reference;
  for (const auto& r : record_sets.front()) reference.insert(r.item_id);
  for (const auto& set : record_sets) {
    std::set<std::string> ids;
    for (const auto& r : set) ids.insert(r.item_id);
    if (ids != reference) {
      throw std::invalid_argument("record sets cover different test items");
    }
  }
  struct Tally {
    std::vector<std::size_t> correct, scored;
    std::size_t n_items = 0;
  };
  std::map<std::vector<std::string>, Tally> tallies;
  const std::size_t n_sets = record_sets.size();
  for (std::size_t s = 0; s < n_sets; ++s) {
    for (const auto& r : record_sets[s]) {
      Tally& t = tallies[group_parts(facts_of(r), grouping)];
      if (t.scored.empty()) {
        t.correct.assign(n_sets, 0);
        t.scored.assign(n_sets, 0);
      }
      if (s == 0) ++t.n_items;
      if (r.outcome == Outcome::kError) continue;
      ++t.scored[s];
      if (r.is_correct()) ++t.correct[s];
    }
  }
  std::vector<AccuracyCell> cells;
  for (const auto& [group, t] : tallies) {
    std::vector<double> accs;
    for (std::size_t s = 0; s < n_sets; ++s) {
      if (t.scored[s] == 0) continue;
      accs.push_back(static_cast<double>(t.correct[s]) /
                     static_cast<double>(t.scored[s]));
    }
    if (accs.empty()) continue;
    cells.push_back(AccuracyCell{group, mean_of(accs), population_std(accs),
                                 t.n_items, accs.size()});
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Correlation

inline double pearson(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("pearson needs two equal-length samples (n>=2)");
  }
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("pearson undefined for zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// 1-based ranks; tied values share the mean of their positions.
inline std::vector<double> mid_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double spearman(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument(
        "spearman needs two equal-length samples (n>=2)");
  }
  const auto rx = mid_ranks(xs);
  const auto ry = mid_ranks(ys);
  try {
    return pearson(rx, ry);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("spearman undefined for all-equal input");
  }
}

// Two-sided permutation p-value for a correlation statistic: ys is shuffled
// (Fisher-Yates driven by splitmix64) and p = (hits + 1) / (permutations + 1)
// where a hit is |stat| >= |observed|.
template <typename Stat>
double permutation_p_value(const std::vector<double>& xs,
                           std::vector<double> ys, Stat stat,
                           std::size_t permutations = 10000,
                           std::uint64_t seed = 0) {
  const double observed = std::abs(stat(xs, ys));
  const double tolerance = 1e-12;
  SplitMix64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    for (std::size_t i = ys.size(); i > 1; --i) {
      std::swap(ys[i - 1], ys[rng.below(i)]);
    }
    double value;
    try {
      value = std::abs(stat(xs, ys));
    } catch (const std::invalid_argument&) {
      continue;
    }
    if (value >= observed - tolerance) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(permutations + 1);
}

// ---------------------------------------------------------------------------
// Human judgments

struct Judgment {
  std::string subject_id;
  std::string item_id;
  bool is_filler = false;
  bool chose_correct = false;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

inline std::vector<Judgment> read_judgments(std::istream& in) {
  std::vector<Judgment> rows;
  std::string line;
  std::size_t line_no = 0;
  auto parse_bool = [&](const std::string& s) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw std::runtime_error("judgments line " + std::to_string(line_no) +
                             ": expected 0 or 1, got '" + s + "'");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "subject_id,item_id,is_filler,chose_correct") {
        throw std::runtime_error(
            "judgments header must be "
            "'subject_id,item_id,is_filler,chose_correct'");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 4) {
      throw std::runtime_error("judgments line " + std::to_string(line_no) +
                               ": expected 4 columns");
    }
    rows.push_back(
        Judgment{cols[0], cols[1], parse_bool(cols[2]), parse_bool(cols[3])});
  }
  return rows;
}

inline std::vector<Judgment> read_judgments_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open judgments " + path);
  return read_judgments(in);
}

struct SubjectFilterResult {
  std::vector<Judgment> judgments;
  std::vector<std::string> removed_subjects;
  // Subjects kept only because they answered no control filler.
  std::vector<std::string> unchecked_subjects;
};

// Drops every row of a subject whose error rate on control fillers exceeds
// max_error_rate. An empty control set means every filler is a control.
inline SubjectFilterResult filter_subjects(
    const std::vector<Judgment>& judgments,
    const std::unordered_set<std::string>& control_items,
    double max_error_rate = 0.20) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // err, n
  for (const auto& j : judgments) {
    auto& t = tally[j.subject_id];
    if (!j.is_filler) continue;
    if (!control_items.empty() && control_items.count(j.item_id) == 0) {
      continue;
    }
    ++t.second;
    if (!j.chose_correct) ++t.first;
  }
  SubjectFilterResult out;
  std::unordered_set<std::string> removed;
  for (const auto& [subject, t] : tally) {
    if (t.second == 0) {
      out.unchecked_subjects.push_back(subject);
      continue;
    }
    const double rate =
        static_cast<double>(t.first) / static_cast<double>(t.second);
    if (rate > max_error_rate) {
      removed.insert(subject);
      out.removed_subjects.push_back(subject);
    }
  }
  for (const auto& j : judgments) {
    if (removed.count(j.subject_id) == 0) out.judgments.push_back(j);
  }
  return out;
}

// Per-item proportion of correct choices over non-filler judgments.
inline std::map<std::string, std::pair<std::size_t, std::size_t>>
human_item_tallies(const std::vector<Judgment>& judgments) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> t;  // correct, n
  for (const auto& j : judgments) {
    if (j.is_filler) continue;
    auto& c = t[j.item_id];
    ++c.second;
    if (j.chose_correct) ++c.first;
  }
  return t;
}

// Group accuracy is the unweighted mean of per-item accuracies. Items absent
// from `facts` are ignored. std is 0: there is a single pool of subjects.
inline std::vector<AccuracyCell> human_accuracy(
    const std::vector<Judgment>& judgments,
    const std::unordered_map<std::string, ItemFacts>& facts,
    const std::vector<GroupBy>& grouping) {
  std::map<std::vector<std::string>, std::vector<double>> groups;
  for (const auto& [item, c] : human_item_tallies(judgments)) {
    auto it = facts.find(item);
    if (it == facts.end()) continue;
    groups[group_parts(it->second, grouping)].push_back(
        static_cast<double>(c.first) / static_cast<double>(c.second));
  }
  std::vector<AccuracyCell> cells;
  for (const auto& [group, accs] : groups) {
    cells.push_back(AccuracyCell{group, mean_of(accs), 0.0, accs.size(), 1});
  }
  return cells;
}

struct AlignmentRow {
  std::string item_id;
  double human_margin = 0.0;  // #correct - #incorrect choices
  double model_margin = 0.0;  // logprob_correct - logprob_wrong
};

struct AlignmentResult {
  ItemKind kind = ItemKind::kOriginal;
  std::vector<AlignmentRow> rows;
  std::optional<double> rho;      // absent when undefined (n<2 or constant)
  std::optional<double> p_value;  // permutation test
};

// Spearman correlation between human and model margins, separately for
// original and nonce items. The model margin is averaged over record sets.
inline std::vector<AlignmentResult> human_model_alignment(
    const std::vector<Judgment>& judgments,
    const std::vector<std::vector<EvalRecord>>& record_sets,
    std::size_t permutations = 10000, std::uint64_t seed = 0) {
  const auto tallies = human_item_tallies(judgments);
  std::map<std::string, std::pair<double, std::size_t>> model;  // sum, n
  std::map<std::string, ItemKind> kinds;
  for (const auto& set : record_sets) {
    for (const auto& r : set) {
      if (r.outcome == Outcome::kError) continue;
      auto& m = model[r.item_id];
      m.first += r.logprob_correct - r.logprob_wrong;
      ++m.second;
      kinds[r.item_id] = r.kind;
    }
  }
  std::vector<AlignmentResult> out(2);
  out[0].kind = ItemKind::kOriginal;
  out[1].kind = ItemKind::kNonce;
  std::size_t overlap = 0;
  for (const auto& [item, c] : tallies) {
    auto m = model.find(item);
    if (m == model.end()) continue;
    ++overlap;
    const double human =
        static_cast<double>(c.first) - static_cast<double>(c.second - c.first);
    auto& res = out[kinds[item] == ItemKind::kOriginal ? 0 : 1];
    res.rows.push_back(
        {item, human, m->second.first / static_cast<double>(m->second.second)});
  }
  if (overlap == 0) {
    throw std::invalid_argument("judgments and records share no items");
  }
  for (auto& res : out) {
    std::vector<double> xs, ys;
    for (const auto& row : res.rows) {
      xs.push_back(row.human_margin);
      ys.push_back(row.model_margin);
    }
    try {
      res.rho = spearman(xs, ys);
      res.p_value = permutation_p_value(
          xs, ys,
          [](const std::vector<double>& a, const std::vector<double>& b) {
            return spearman(a, b);
          },
          permutations, seed);
    } catch (const std::invalid_argument&) {
      res.rho.reset();
      res.p_value.reset();
    }
  }
  return out;
}

}  // namespace agreebench

#endif  // AGREEBENCH_STATS_HPP_
