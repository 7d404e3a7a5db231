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

#include <gtest/gtest.h>

#include "agreebench/conllu.hpp"
#include "support.hpp"

namespace agreebench {
namespace {

constexpr const char* kTwo =
    "# sent_id = a1\n"
    "1\tdogs\tdog\tNOUN\t_\tNumber=Plur\t2\tnsubj\t_\t_\n"
    "2\tbark\tbark\tVERB\t_\tTense=Pres|VerbForm=Fin\t0\troot\t_\t_\n";

TEST(Feats, ParsesPairs) {
  auto f = parse_feats("Number=Plur|Tense=Pres");
  EXPECT_EQ(f.get("Number"), "Plur");
  EXPECT_EQ(f.get("Tense"), "Pres");
  EXPECT_FALSE(f.has("Mood"));
}

TEST(Feats, UnderscoreIsEmpty) {
  EXPECT_TRUE(parse_feats("_").empty());
  EXPECT_EQ(parse_feats("_").str(), "_");
}

TEST(Feats, CanonicalOrder) {
  EXPECT_EQ(parse_feats("Tense=Pres|Number=Plur").str(), "Number=Plur|Tense=Pres");
  const std::string canon = "Case=Nom|Gender=Fem|Number=Sing";
  EXPECT_EQ(parse_feats(canon).str(), canon);
}

TEST(Feats, Errors) {
  EXPECT_THROW(parse_feats("Number"), std::invalid_argument);
  EXPECT_THROW(parse_feats("Number=Sing|Number=Plur"), std::invalid_argument);
}

TEST(Parse, TwoTokenSentence) {
  auto s = parse_conllu(kTwo);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].sent_id, "a1");
  ASSERT_EQ(s[0].size(), 2u);
  EXPECT_EQ(s[0].at(1).head, 2);
  EXPECT_EQ(s[0].at(2).head, 0);
  EXPECT_EQ(s[0].at(1).number(), Number::kPlur);
}

TEST(Parse, SkipsRangesAndEmptyNodes) {
  const char* text =
      "1\tdel\tdi\tADP\t_\t_\t2\tcase\t_\t_\n"
      "2\tmare\tmare\tNOUN\t_\tNumber=Sing\t0\troot\t_\t_\n"
      "3-4\tnel\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "3\tin\tin\tADP\t_\t_\t4\tcase\t_\t_\n"
      "4\til\til\tDET\t_\t_\t2\tdet\t_\t_\n"
      "4.1\tx\tx\tX\t_\t_\t_\t_\t2:dep\t_\n";
  auto s = parse_conllu(text);
  ASSERT_EQ(s.size(), 1u);
  ASSERT_EQ(s[0].size(), 4u);
  EXPECT_EQ(s[0].at(3).form, "in");
  EXPECT_EQ(s[0].at(4).form, "il");
  EXPECT_EQ(s[0].at(4).index, 4);
}

TEST(Parse, BadHeadNamesLine) {
  const char* text =
      "1\ta\ta\tDET\t_\t_\t2\tdet\t_\t_\n"
      "2\tb\tb\tNOUN\t_\t_\tabc\troot\t_\t_\n";
  try {
    parse_conllu(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Parse, BadColumnCount) {
  EXPECT_THROW(parse_conllu("1\ta\ta\tDET\t_\n"), ParseError);
}

TEST(Parse, CycleSkippedWithWarning) {
  std::string text = std::string(kTwo) + "\n" +
                     "# sent_id = cyc\n"
                     "1\ta\ta\tX\t_\t_\t2\tdep\t_\t_\n"
                     "2\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n";
  std::istringstream in(text);
  auto r = parse_conllu_with_warnings(in);
  ASSERT_EQ(r.sentences.size(), 1u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("line 5"), std::string::npos);
  EXPECT_NE(r.warnings[0].find("cyclic"), std::string::npos);

  std::istringstream again(text);
  EXPECT_THROW(parse_conllu(again, ParseOptions{false}), ParseError);
}

TEST(Parse, HeadOutOfRangeAndSelfLoop) {
  EXPECT_TRUE(parse_conllu("1\ta\ta\tX\t_\t_\t3\tdep\t_\t_\n").empty());
  EXPECT_TRUE(parse_conllu("1\ta\ta\tX\t_\t_\t1\tdep\t_\t_\n").empty());
}

TEST(Parse, MissingSentIdIsSynthesised) {
  auto s = parse_conllu(
      "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tb\tb\tX\t_\t_\t0\troot\t_\t_");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].sent_id, "_s1");
  EXPECT_EQ(s[1].sent_id, "_s2");
}

TEST(Parse, CrLfAccepted) {
  auto s = parse_conllu(
      "# sent_id = w\r\n1\ta\ta\tX\t_\t_\t0\troot\t_\t_\r\n\r\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].sent_id, "w");
  EXPECT_EQ(s[0].at(1).misc, "");
}

TEST(Parse, RoundTripMiniTreebank) {
  const auto tb = testing::mini_treebank();
  ASSERT_EQ(tb.size(), 60u);
  const std::string once = serialize_conllu(tb);
  const auto again = parse_conllu(once);
  EXPECT_EQ(again, tb);
  EXPECT_EQ(serialize_conllu(again), once);
}

TEST(Parse, RoundTripKeepsUnderscoreForm) {
  auto s = parse_conllu("1\t_\t_\tPUNCT\t_\t_\t0\troot\t_\t_\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].at(1).form, "_");
  EXPECT_EQ(parse_conllu(serialize_conllu(s)), s);
}

Token verb_tok(std::string form, std::string feats, std::string upos = "VERB") {
  Token t;
  t.index = 1;
  t.form = std::move(form);
  t.upos = std::move(upos);
  t.feats = parse_feats(feats);
  return t;
}

TEST(Enrich, PluralForBareFinitePresent) {
  Sentence s;
  s.tokens = {verb_tok("walk", "Tense=Pres|VerbForm=Fin"),
              verb_tok("walks", "Number=Sing|Tense=Pres|VerbForm=Fin"),
              verb_tok("walked", "Tense=Past|VerbForm=Fin"),
              verb_tok("are", "Mood=Ind|Tense=Pres|VerbForm=Fin", "AUX"),
              verb_tok("walking", "Tense=Pres|VerbForm=Part"),
              verb_tok("walk", "Tense=Pres|VerbForm=Fin", "NOUN")};
  auto e = enrich_english_verb_number(s);
  EXPECT_EQ(e.tokens[0].number(), Number::kPlur);
  EXPECT_EQ(e.tokens[1].number(), Number::kSing);
  EXPECT_EQ(e.tokens[2].feats, s.tokens[2].feats);
  EXPECT_EQ(e.tokens[3].number(), Number::kPlur);
  EXPECT_EQ(e.tokens[4].feats, s.tokens[4].feats);
  EXPECT_EQ(e.tokens[5].feats, s.tokens[5].feats);
  EXPECT_EQ(enrich_english_verb_number(e), e);
}

}  // namespace
}  // namespace agreebench
