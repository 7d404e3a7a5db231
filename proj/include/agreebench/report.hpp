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
// Report tables (CSV) and plot data (JSON) built from evaluation results and
// optional human judgments.

#ifndef AGREEBENCH_REPORT_HPP_
#define AGREEBENCH_REPORT_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "agreebench/harness.hpp"
#include "agreebench/stats.hpp"
#include "json.hpp"

namespace agreebench {

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_cells_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& dims,
                            const std::vector<AccuracyCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& d : dims) out << d << ',';
  out << "mean,std,n_items,n_scorers\n";
  for (const auto& c : cells) {
    for (const auto& g : c.group) out << csv_field(g) << ',';
    out << format_fixed(c.mean) << ',' << format_fixed(c.std) << ','
        << c.n_items << ',' << c.n_scorers << '\n';
  }
}

// Plot data for accuracy by attractor count: buckets 0, 1 and 2 only. Error
// bars are std / sqrt(n): across scorers for models, across items for humans.
inline nlohmann::ordered_json attractor_plot_data(
    const std::vector<std::vector<EvalRecord>>& record_sets,
    const std::vector<Judgment>* judgments,
    const std::unordered_map<std::string, ItemFacts>* facts) {
  const std::vector<std::string> buckets = {"0", "1", "2"};
  nlohmann::ordered_json plot;
  plot["x"] = buckets;
  plot["x_label"] = "number of attractors";
  plot["error_bar"] = "std_over_sqrt_n";
  auto series = nlohmann::ordered_json::array();

  const auto cells =
      accuracy_by(record_sets, {GroupBy::kKind, GroupBy::kAttractors});
  for (const char* kind : {"original", "nonce"}) {
    nlohmann::ordered_json s;
    s["label"] = std::string("model/") + kind;
    auto means = nlohmann::ordered_json::array();
    auto errs = nlohmann::ordered_json::array();
    auto ns = nlohmann::ordered_json::array();
    for (const auto& b : buckets) {
      const AccuracyCell* cell = nullptr;
      for (const auto& c : cells) {
        if (c.group[0] == kind && c.group[1] == b) cell = &c;
      }
      if (cell == nullptr) {
        means.push_back(nullptr);
        errs.push_back(nullptr);
        ns.push_back(0);
        continue;
      }
      means.push_back(cell->mean);
      errs.push_back(cell->std /
                     std::sqrt(static_cast<double>(cell->n_scorers)));
      ns.push_back(cell->n_items);
    }
    s["mean"] = means;
    s["stderr"] = errs;
    s["n_items"] = ns;
    series.push_back(s);
  }

  if (judgments != nullptr && facts != nullptr) {
    std::map<std::pair<std::string, std::string>, std::vector<double>> per;
    for (const auto& [item, c] : human_item_tallies(*judgments)) {
      auto it = facts->find(item);
      if (it == facts->end()) continue;
      per[{to_string(it->second.kind),
           attractor_bucket(it->second.n_attractors)}]
          .push_back(static_cast<double>(c.first) /
                     static_cast<double>(c.second));
    }
    for (const char* kind : {"original", "nonce"}) {
      nlohmann::ordered_json s;
      s["label"] = std::string("human/") + kind;
      auto means = nlohmann::ordered_json::array();
      auto errs = nlohmann::ordered_json::array();
      auto ns = nlohmann::ordered_json::array();
      for (const auto& b : buckets) {
        auto it = per.find({kind, b});
        if (it == per.end()) {
          means.push_back(nullptr);
          errs.push_back(nullptr);
          ns.push_back(0);
          continue;
        }
        means.push_back(mean_of(it->second));
        errs.push_back(population_std(it->second) /
                       std::sqrt(static_cast<double>(it->second.size())));
        ns.push_back(it->second.size());
      }
      s["mean"] = means;
      s["stderr"] = errs;
      s["n_items"] = ns;
      series.push_back(s);
    }
  }
  plot["series"] = series;
  return plot;
}

struct ReportInputs {
  std::vector<EvaluationResult> evaluations;
  std::optional<std::vector<Judgment>> judgments;
  std::unordered_set<std::string> control_items;
  // Item facts for human grouping; filled from records when empty.
  std::unordered_map<std::string, ItemFacts> item_facts;
  std::size_t permutations = 10000;
  std::uint64_t seed = 0;
};

// Writes every table into out_dir and returns the file names written.
inline std::vector<std::string> write_report(
    ReportInputs in, const std::filesystem::path& out_dir) {
  if (in.evaluations.empty()) throw std::invalid_argument("no record sets");
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;

  std::vector<std::vector<EvalRecord>> sets;
  for (const auto& e : in.evaluations) sets.push_back(e.records);
  if (in.item_facts.empty()) {
    for (const auto& r : sets.front()) in.item_facts[r.item_id] = facts_of(r);
  }

  auto table = [&](const std::string& name,
                   const std::vector<std::string>& dims,
                   const std::vector<GroupBy>& by) {
    write_cells_csv(out_dir / name, dims, accuracy_by(sets, by));
    written.push_back(name);
  };
  table("accuracy_overall.csv", {"group"}, {GroupBy::kOverall});
  table("accuracy_by_kind.csv", {"kind"}, {GroupBy::kKind});
  table("accuracy_by_construction.csv", {"construction", "kind"},
        {GroupBy::kConstruction, GroupBy::kKind});
  table("accuracy_by_attractors.csv", {"kind", "attractors"},
        {GroupBy::kKind, GroupBy::kAttractors});

  {
    std::ofstream out(out_dir / "scorers.csv");
    out << "name,perplexity,window,accuracy_original,accuracy_nonce,"
           "accuracy_overall,n_items,n_errors\n";
    for (const auto& e : in.evaluations) {
      std::vector<EvalRecord> orig, nonce;
      for (const auto& r : e.records) {
        (r.kind == ItemKind::kOriginal ? orig : nonce).push_back(r);
      }
      auto fmt = [](std::optional<double> v) {
        return v ? format_fixed(*v) : std::string();
      };
      out << csv_field(e.scorer.name) << ',' << fmt(e.scorer.perplexity) << ','
          << (e.window ? std::to_string(*e.window) : std::string()) << ','
          << fmt(accuracy(orig)) << ',' << fmt(accuracy(nonce)) << ','
          << fmt(accuracy(e.records)) << ',' << e.records.size() << ','
          << e.n_errors << '\n';
    }
    written.push_back("scorers.csv");
  }

  {
    nlohmann::ordered_json j;
    j["statistic"] = "pearson";
    j["x"] = "validation perplexity";
    j["y"] = "overall accuracy";
    std::vector<double> xs, ys;
    auto names = nlohmann::ordered_json::array();
    for (const auto& e : in.evaluations) {
      auto acc = accuracy(e.records);
      if (!e.scorer.perplexity || !acc) continue;
      xs.push_back(*e.scorer.perplexity);
      ys.push_back(*acc);
      names.push_back(e.scorer.name);
    }
    j["scorers"] = names;
    j["perplexity"] = xs;
    j["accuracy"] = ys;
    j["r"] = nullptr;
    j["p_value"] = nullptr;
    try {
      j["r"] = pearson(xs, ys);
      j["p_value"] = permutation_p_value(
          xs, ys,
          [](const std::vector<double>& a, const std::vector<double>& b) {
            return pearson(a, b);
          },
          in.permutations, in.seed);
      j["p_value_method"] = "permutation";
      j["permutations"] = in.permutations;
    } catch (const std::invalid_argument& e) {
      j["note"] = e.what();
    }
    std::ofstream out(out_dir / "perplexity_accuracy.json");
    out << j.dump(2) << '\n';
    written.push_back("perplexity_accuracy.json");
  }

  std::optional<std::vector<Judgment>> kept;
  if (in.judgments) {
    auto filtered = filter_subjects(*in.judgments, in.control_items);
    {
      nlohmann::ordered_json j;
      j["max_error_rate"] = 0.20;
      j["control_items"] = in.control_items.empty()
                               ? nlohmann::ordered_json("all fillers")
                               : nlohmann::ordered_json(in.control_items.size());
      j["removed_subjects"] = filtered.removed_subjects;
      j["unchecked_subjects"] = filtered.unchecked_subjects;
      j["rows_in"] = in.judgments->size();
      j["rows_kept"] = filtered.judgments.size();
      std::ofstream out(out_dir / "subject_filter.json");
      out << j.dump(2) << '\n';
      written.push_back("subject_filter.json");
    }
    kept = std::move(filtered.judgments);
    write_cells_csv(out_dir / "human_accuracy_by_kind.csv", {"kind"},
                    human_accuracy(*kept, in.item_facts, {GroupBy::kKind}));
    written.push_back("human_accuracy_by_kind.csv");
    write_cells_csv(out_dir / "human_accuracy_by_construction.csv",
                    {"construction", "kind"},
                    human_accuracy(*kept, in.item_facts,
                                   {GroupBy::kConstruction, GroupBy::kKind}));
    written.push_back("human_accuracy_by_construction.csv");

    nlohmann::ordered_json j;
    j["statistic"] = "spearman";
    j["human_margin"] = "#correct - #incorrect choices";
    j["model_margin"] = "logprob_correct - logprob_wrong (mean over scorers)";
    j["p_value_method"] = "permutation";
    j["permutations"] = in.permutations;
    auto results = nlohmann::ordered_json::array();
    try {
      for (const auto& a : human_model_alignment(*kept, sets, in.permutations,
                                                 in.seed)) {
        nlohmann::ordered_json r;
        r["kind"] = to_string(a.kind);
        r["n_items"] = a.rows.size();
        r["rho"] = a.rho ? nlohmann::ordered_json(*a.rho)
                         : nlohmann::ordered_json(nullptr);
        r["p_value"] = a.p_value ? nlohmann::ordered_json(*a.p_value)
                                 : nlohmann::ordered_json(nullptr);
        results.push_back(r);
      }
    } catch (const std::invalid_argument& e) {
      j["note"] = e.what();
    }
    j["results"] = results;
    std::ofstream out(out_dir / "human_alignment.json");
    out << j.dump(2) << '\n';
    written.push_back("human_alignment.json");
  }

  {
    auto plot = attractor_plot_data(sets, kept ? &*kept : nullptr,
                                    &in.item_facts);
    plot["std"] = "population";
    std::ofstream out(out_dir / "plot_attractors.json");
    out << plot.dump(2) << '\n';
    written.push_back("plot_attractors.json");
  }
  return written;
}

}  // namespace agreebench

#endif  // AGREEBENCH_REPORT_HPP_
