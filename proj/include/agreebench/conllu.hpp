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
// CoNLL-U reading and writing.
//
// A token line has ten tab-separated columns:
//
//   ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC
//
// Multiword-token ranges ("3-4") and empty nodes ("5.1") are skipped; they
// never shift the 1-based indices of syntactic words. XPOS, DEPS and MISC are
// kept as opaque text so that a sentence can be written back unchanged.

#ifndef AGREEBENCH_CONLLU_HPP_
#define AGREEBENCH_CONLLU_HPP_

#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agreebench {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Morphological feature bundle, kept in lexicographic order of feature name.
class MorphFeatures {
 public:
  using Map = std::map<std::string, std::string, std::less<>>;

  MorphFeatures() = default;
  explicit MorphFeatures(Map features) : features_(std::move(features)) {}

  bool empty() const { return features_.empty(); }
  std::size_t size() const { return features_.size(); }
  const Map& items() const { return features_; }

  std::optional<std::string_view> get(std::string_view name) const {
    auto it = features_.find(name);
    if (it == features_.end()) return std::nullopt;
    return std::string_view(it->second);
  }
  bool has(std::string_view name) const {
    return features_.find(name) != features_.end();
  }
  void set(std::string name, std::string value) {
    features_[std::move(name)] = std::move(value);
  }
  void erase(std::string_view name) {
    auto it = features_.find(name);
    if (it != features_.end()) features_.erase(it);
  }

  // "_" for the empty bundle, otherwise "A=x|B=y" sorted by name.
  std::string str() const {
    if (features_.empty()) return "_";
    std::string out;
    for (const auto& [name, value] : features_) {
      if (!out.empty()) out += '|';
      out += name;
      out += '=';
      out += value;
    }
    return out;
  }

  friend bool operator==(const MorphFeatures&, const MorphFeatures&) = default;
  friend auto operator<=>(const MorphFeatures& a, const MorphFeatures& b) {
    return a.features_ <=> b.features_;
  }

 private:
  Map features_;
};

// Throws std::invalid_argument on a pair without '=' or a repeated name.
inline MorphFeatures parse_feats(std::string_view text) {
  MorphFeatures::Map map;
  if (text == "_" || text.empty()) return MorphFeatures(std::move(map));
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t bar = text.find('|', start);
    if (bar == std::string_view::npos) bar = text.size();
    std::string_view pair = text.substr(start, bar - start);
    std::size_t eq = pair.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw std::invalid_argument("malformed feature '" + std::string(pair) +
                                  "'");
    }
    std::string name(pair.substr(0, eq));
    if (map.count(name) != 0) {
      throw std::invalid_argument("duplicate feature '" + name + "'");
    }
    map.emplace(std::move(name), std::string(pair.substr(eq + 1)));
    start = bar + 1;
  }
  return MorphFeatures(std::move(map));
}

enum class Number { kUnknown, kSing, kPlur };

inline std::string_view to_string(Number n) {
  switch (n) {
    case Number::kSing:
      return "Sing";
    case Number::kPlur:
      return "Plur";
    default:
      return "unknown";
  }
}

inline Number opposite(Number n) {
  switch (n) {
    case Number::kSing:
      return Number::kPlur;
    case Number::kPlur:
      return Number::kSing;
    default:
      return Number::kUnknown;
  }
}

inline Number number_of(const MorphFeatures& feats) {
  auto value = feats.get("Number");
  if (!value) return Number::kUnknown;
  if (*value == "Sing") return Number::kSing;
  if (*value == "Plur") return Number::kPlur;
  return Number::kUnknown;
}

struct Token {
  int index = 0;  // 1-based surface position
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos;
  MorphFeatures feats;
  int head = 0;  // 0 = root
  std::string deprel;
  std::string deps;
  std::string misc;

  Number number() const { return number_of(feats); }

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::string sent_id;
  std::vector<std::string> comments;  // verbatim, including the leading '#'
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  // 1-based access.
  const Token& at(int index) const { return tokens.at(index - 1); }
  Token& at(int index) { return tokens.at(index - 1); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

inline std::optional<int> to_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string column_text(std::string_view col) {
  return col == "_" ? std::string() : std::string(col);
}

inline std::string_view column_or_blank(const std::string& s) {
  return s.empty() ? std::string_view("_") : std::string_view(s);
}

}  // namespace detail

// Returns an empty string when the tree is well formed, otherwise a reason.
inline std::string validate_tree(const Sentence& sentence) {
  const int n = static_cast<int>(sentence.size());
  for (int i = 0; i < n; ++i) {
    const Token& tok = sentence.tokens[i];
    if (tok.index != i + 1) {
      return "token indices are not contiguous at position " +
             std::to_string(i + 1);
    }
    if (tok.head < 0 || tok.head > n) {
      return "head " + std::to_string(tok.head) + " of token " +
             std::to_string(tok.index) + " out of range";
    }
    if (tok.head == tok.index) {
      return "token " + std::to_string(tok.index) + " is its own head";
    }
  }
  // Every chain must reach the root within n steps.
  for (int i = 1; i <= n; ++i) {
    int cur = i;
    int steps = 0;
    while (cur != 0) {
      cur = sentence.at(cur).head;
      if (++steps > n) {
        return "cyclic head chain through token " + std::to_string(i);
      }
    }
  }
  return {};
}

struct ParseOptions {
  // Sentences violating the tree invariants are dropped and reported in
  // `warnings` instead of raising.
  bool skip_invalid_trees = true;
};

struct ParseResult {
  std::vector<Sentence> sentences;
  std::vector<std::string> warnings;
};

// Parses a CoNLL-U stream. Column-count and integer errors always throw
// ParseError; tree errors throw only when skip_invalid_trees is false.
inline ParseResult parse_conllu_with_warnings(std::istream& in,
                                              const ParseOptions& options = {}) {
  ParseResult result;
  Sentence current;
  std::size_t sentence_start_line = 0;
  std::size_t line_no = 0;
  std::size_t anonymous = 0;

  auto flush = [&]() {
    if (current.tokens.empty()) {
      current = Sentence();
      return;
    }
    if (current.sent_id.empty()) {
      current.sent_id = "_s" + std::to_string(++anonymous);
    }
    std::string problem = validate_tree(current);
    if (!problem.empty()) {
      if (!options.skip_invalid_trees) {
        throw ParseError(sentence_start_line, problem);
      }
      result.warnings.push_back("line " + std::to_string(sentence_start_line) +
                                ": sentence " + current.sent_id +
                                " skipped: " + problem);
    } else {
      result.sentences.push_back(std::move(current));
    }
    current = Sentence();
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    if (current.tokens.empty() && current.comments.empty()) {
      sentence_start_line = line_no;
    }
    if (line.front() == '#') {
      current.comments.emplace_back(line);
      constexpr std::string_view kSentId = "# sent_id = ";
      if (line.substr(0, kSentId.size()) == kSentId) {
        current.sent_id = std::string(line.substr(kSentId.size()));
      }
      continue;
    }
    auto cols = detail::split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 columns, found " +
                                    std::to_string(cols.size()));
    }
    std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos ||
        id.find('.') != std::string_view::npos) {
      continue;  // multiword range or empty node
    }
    auto index = detail::to_int(id);
    if (!index || *index < 1) {
      throw ParseError(line_no, "invalid token id '" + std::string(id) + "'");
    }
    auto head = detail::to_int(cols[6]);
    if (!head || *head < 0) {
      throw ParseError(line_no, "non-integer head '" + std::string(cols[6]) +
                                    "'");
    }
    Token tok;
    tok.index = *index;
    tok.form = detail::column_text(cols[1]);
    tok.lemma = detail::column_text(cols[2]);
    tok.upos = detail::column_text(cols[3]);
    tok.xpos = detail::column_text(cols[4]);
    try {
      tok.feats = parse_feats(cols[5]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    tok.head = *head;
    tok.deprel = detail::column_text(cols[7]);
    tok.deps = detail::column_text(cols[8]);
    tok.misc = detail::column_text(cols[9]);
    // An underscore FORM is a literal underscore token, not an empty value.
    if (cols[1] == "_" && cols[2] == "_") tok.form = "_";
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return result;
}

inline std::vector<Sentence> parse_conllu(std::istream& in,
                                          const ParseOptions& options = {}) {
  return parse_conllu_with_warnings(in, options).sentences;
}

inline std::vector<Sentence> parse_conllu(std::string_view text,
                                          const ParseOptions& options = {}) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in, options);
}

inline void write_conllu(std::ostream& out, const Sentence& sentence) {
  bool has_sent_id = false;
  for (const auto& c : sentence.comments) {
    if (c.rfind("# sent_id = ", 0) == 0) has_sent_id = true;
    out << c << '\n';
  }
  if (!has_sent_id && !sentence.sent_id.empty() &&
      sentence.sent_id.rfind("_s", 0) != 0) {
    out << "# sent_id = " << sentence.sent_id << '\n';
  }
  using detail::column_or_blank;
  for (const auto& t : sentence.tokens) {
    out << t.index << '\t' << column_or_blank(t.form) << '\t'
        << column_or_blank(t.lemma) << '\t' << column_or_blank(t.upos) << '\t'
        << column_or_blank(t.xpos) << '\t' << t.feats.str() << '\t' << t.head
        << '\t' << column_or_blank(t.deprel) << '\t' << column_or_blank(t.deps)
        << '\t' << column_or_blank(t.misc) << '\n';
  }
  out << '\n';
}

inline std::string serialize_conllu(const std::vector<Sentence>& sentences) {
  std::ostringstream out;
  for (const auto& s : sentences) write_conllu(out, s);
  return out.str();
}

// English UD marks only third-person singular present verbs for Number; the
// other finite present forms are plural for agreement purposes.
inline Sentence enrich_english_verb_number(Sentence sentence) {
  for (auto& tok : sentence.tokens) {
    if (tok.upos != "VERB" && tok.upos != "AUX") continue;
    if (tok.feats.get("VerbForm") != std::optional<std::string_view>("Fin")) {
      continue;
    }
    if (tok.feats.get("Tense") != std::optional<std::string_view>("Pres")) {
      continue;
    }
    if (tok.feats.has("Number")) continue;
    tok.feats.set("Number", "Plur");
  }
  return sentence;
}

inline std::vector<Sentence> enrich_english_verb_number(
    std::vector<Sentence> treebank) {
  for (auto& s : treebank) s = enrich_english_verb_number(std::move(s));
  return treebank;
}

}  // namespace agreebench

#endif  // AGREEBENCH_CONLLU_HPP_
