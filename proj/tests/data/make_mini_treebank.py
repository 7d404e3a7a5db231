#!/usr/bin/env python3
# Copyright 2026 The agreebench Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the 60-sentence mini treebank and what mining it must return.

Four templates with fixed trees, lexical items varied by a seeded RNG:

  t1  the girl the boys like often goes .      NOUN VERB ADV VERB  (kept)
  t2  the dog that the cats chase runs .       NOUN VERB VERB      (kept)
                                               NOUN PRON NOUN VERB (vetoed)
  t3  she eats very big red apples .           VERB ADJ ADJ NOUN   (one mismatch)
  t4  they sell fresh bread and bake .         VERB NOUN CCONJ VERB (kept)

plus four short noise sentences. The expected construction list is derived
from the templates here, not by running the miner.

Usage: make_mini_treebank.py OUT_DIR
"""

import json
import os
import random
import sys

rng = random.Random(20260417)

NOUNS = [("girl", "girls"), ("boy", "boys"), ("dog", "dogs"), ("cat", "cats"),
         ("teacher", "teachers"), ("farmer", "farmers")]
MAIN_VERBS = [("go", "goes", "go"), ("run", "runs", "run"),
              ("sing", "sings", "sing"), ("sleep", "sleeps", "sleep")]
REL_VERBS = [("like", "likes", "like"), ("see", "sees", "see"),
             ("know", "knows", "know"), ("chase", "chases", "chase")]
TR_VERBS = [("eat", "eats", "eat"), ("buy", "buys", "buy"),
            ("want", "wants", "want")]
CO_VERBS = [("sell", "sells", "sell"), ("bake", "bakes", "bake"),
            ("cook", "cooks", "cook"), ("make", "makes", "make")]
ADVS = ["often", "rarely", "always"]
OBJ_NOUNS = [("apple", "apples"), ("pear", "pears"), ("melon", "melons")]
MASS = ["bread", "rice", "soup"]
ADJS = ["big", "red", "fresh", "small", "green"]

# What the agreement and 2-per-number filters leave, read off the templates.
RETAINED = ["NOUN VERB ADV VERB", "NOUN VERB VERB", "VERB NOUN CCONJ VERB"]

VERB_FEATS = "Mood=Ind|Number={n}|Person=3|Tense=Pres|VerbForm=Fin"


def noun(pair, number):
    lemma = pair[0]
    form = pair[0] if number == "Sing" else pair[1]
    return form, lemma, "NOUN", "Number=" + number


def verb(triple, number):
    lemma, sing, plur = triple
    form = sing if number == "Sing" else plur
    return form, lemma, "VERB", VERB_FEATS.format(n=number)


def tok(form, lemma, upos, feats="_"):
    return form, lemma, upos, feats


class Builder:
    def __init__(self):
        self.sentences = []
        self.expected = {}

    def add(self, sid, tokens, heads, deprels):
        self.sentences.append((sid, tokens, heads, deprels))

    def instance(self, cid, sid, cue, target, cue_num, target_num, top,
                 cue_is_head):
        self.expected.setdefault(cid, []).append({
            "sent_id": sid, "cue_index": cue, "target_index": target,
            "cue_number": cue_num, "target_number": target_num,
            "context_top_indices": top, "cue_is_head": cue_is_head})

    def write(self, out_dir):
        lines = []
        vocab = set()
        for sid, tokens, heads, deprels in self.sentences:
            lines.append("# sent_id = " + sid)
            lines.append("# text = " + " ".join(t[0] for t in tokens))
            for i, ((form, lemma, upos, feats), head, rel) in enumerate(
                    zip(tokens, heads, deprels), start=1):
                vocab.add(form)
                lines.append("\t".join([str(i), form, lemma, upos, "_", feats,
                                        str(head), rel, "_", "_"]))
            lines.append("")
        with open(os.path.join(out_dir, "mini.conllu"), "w") as f:
            f.write("\n".join(lines) + "\n")
        with open(os.path.join(out_dir, "mini.vocab"), "w") as f:
            for w in sorted(vocab):
                f.write(w + "\n")
        with open(os.path.join(out_dir, "mini_expected.json"), "w") as f:
            doc = {"retained": RETAINED, "candidates": [
                {"id": cid, "instances": sorted(
                    insts, key=lambda x: (x["sent_id"], x["cue_index"]))}
                for cid, insts in sorted(self.expected.items())]}
            json.dump(doc, f, indent=1)
            f.write("\n")


def t1(b, k, subj_num, rel_num):
    sid = "t1-%02d" % k
    subj, obj = rng.sample(NOUNS, 2)
    adv = rng.choice(ADVS)
    tokens = [tok("the", "the", "DET"), noun(subj, subj_num),
              tok("the", "the", "DET"), noun(obj, rel_num),
              verb(rng.choice(REL_VERBS), rel_num), tok(adv, adv, "ADV"),
              verb(rng.choice(MAIN_VERBS), subj_num), tok(".", ".", "PUNCT")]
    b.add(sid, tokens, [2, 7, 4, 5, 2, 7, 0, 7],
          ["det", "nsubj", "det", "nsubj", "acl:relcl", "advmod", "root",
           "punct"])
    b.instance("NOUN VERB ADV VERB", sid, 2, 7, subj_num, subj_num, [5, 6],
               False)


def t2(b, k, subj_num, rel_num):
    sid = "t2-%02d" % k
    subj, obj = rng.sample(NOUNS, 2)
    tokens = [tok("the", "the", "DET"), noun(subj, subj_num),
              tok("that", "that", "PRON"), tok("the", "the", "DET"),
              noun(obj, rel_num), verb(rng.choice(REL_VERBS), rel_num),
              verb(rng.choice(MAIN_VERBS), subj_num), tok(".", ".", "PUNCT")]
    b.add(sid, tokens, [2, 7, 6, 5, 6, 2, 0, 7],
          ["det", "nsubj", "obj", "det", "nsubj", "acl:relcl", "root",
           "punct"])
    b.instance("NOUN VERB VERB", sid, 2, 7, subj_num, subj_num, [6], False)
    b.instance("NOUN PRON NOUN VERB", sid, 2, 6, subj_num, rel_num, [3, 5],
               True)


def t3(b, k, subj_num, obj_num):
    sid = "t3-%02d" % k
    a1, a2 = rng.sample(ADJS, 2)
    pron = "she" if subj_num == "Sing" else "they"
    tokens = [tok(pron, pron, "PRON", "Number=" + subj_num),
              verb(rng.choice(TR_VERBS), subj_num), tok("very", "very", "ADV"),
              tok(a1, a1, "ADJ", "Degree=Pos"), tok(a2, a2, "ADJ", "Degree=Pos"),
              noun(rng.choice(OBJ_NOUNS), obj_num), tok(".", ".", "PUNCT")]
    b.add(sid, tokens, [2, 0, 4, 6, 6, 2, 2],
          ["nsubj", "root", "advmod", "amod", "amod", "obj", "punct"])
    b.instance("VERB ADJ ADJ NOUN", sid, 2, 6, subj_num, obj_num, [4, 5], True)
    b.instance("VERB NOUN PUNCT", sid, 2, 7, subj_num, "unknown", [6], True)


# Each verb shows up as the target in both numbers.
T4_PAIRS = [(0, 1), (2, 3), (1, 0), (3, 2), (0, 2), (1, 3)]


def t4(b, k, num):
    sid = "t4-%02d" % k
    i, j = T4_PAIRS[(k - 1) % len(T4_PAIRS)]
    v1, v2 = CO_VERBS[i], CO_VERBS[j]
    pron = "he" if num == "Sing" else "they"
    a = rng.choice(ADJS)
    m = rng.choice(MASS)
    tokens = [tok(pron, pron, "PRON", "Number=" + num), verb(v1, num),
              tok(a, a, "ADJ", "Degree=Pos"), tok(m, m, "NOUN", "Number=Sing"),
              tok("and", "and", "CCONJ"), verb(v2, num), tok(".", ".", "PUNCT")]
    b.add(sid, tokens, [2, 0, 4, 2, 6, 2, 2],
          ["nsubj", "root", "amod", "obj", "cc", "conj", "punct"])
    b.instance("VERB NOUN CCONJ VERB", sid, 2, 6, num, num, [4, 5], True)
    b.instance("VERB NOUN VERB PUNCT", sid, 2, 7, num, "unknown", [4, 6], True)


def noise(b):
    b.add("n-01", [tok("dogs", "dog", "NOUN", "Number=Plur"),
                   verb(("bark", "barks", "bark"), "Plur"),
                   tok(".", ".", "PUNCT")],
          [2, 0, 2], ["nsubj", "root", "punct"])
    # "run" as a noun: pushes the verb form "run" over the ambiguity bound.
    b.add("n-02", [tok("the", "the", "DET"),
                   tok("run", "run", "NOUN", "Number=Sing"),
                   verb(("help", "helps", "help"), "Sing"),
                   tok(".", ".", "PUNCT")],
          [2, 3, 0, 3], ["det", "nsubj", "root", "punct"])
    b.add("n-03", [tok("a", "a", "DET"),
                   tok("run", "run", "NOUN", "Number=Sing"),
                   verb(("help", "helps", "help"), "Sing"),
                   tok(".", ".", "PUNCT")],
          [2, 3, 0, 3], ["det", "nsubj", "root", "punct"])
    b.add("n-04", [tok("cats", "cat", "NOUN", "Number=Plur"),
                   verb(("sleep", "sleeps", "sleep"), "Plur"),
                   tok(".", ".", "PUNCT")],
          [2, 0, 2], ["nsubj", "root", "punct"])


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(
        os.path.abspath(__file__))
    b = Builder()
    # t1: every subject/attractor combination, 8 Sing and 8 Plur subjects.
    k = 0
    for subj in ("Sing", "Plur"):
        for rel in ("Sing", "Plur", "Plur", "Sing", "Plur", "Sing", "Sing",
                    "Plur"):
            k += 1
            t1(b, k, subj, rel)
    k = 0
    for subj in ("Sing", "Plur"):
        for rel in ("Plur", "Sing", "Sing", "Plur", "Sing", "Plur", "Plur",
                    "Sing"):
            k += 1
            t2(b, k, subj, rel)
    # t3: verb and object agree except in the last sentence.
    k = 0
    for subj, obj in [("Sing", "Sing")] * 5 + [("Plur", "Plur")] * 6 + [
            ("Plur", "Sing")]:
        k += 1
        t3(b, k, subj, obj)
    k = 0
    for num in ["Sing"] * 6 + ["Plur"] * 6:
        k += 1
        t4(b, k, num)
    noise(b)
    assert len(b.sentences) == 60, len(b.sentences)
    b.write(out_dir)


if __name__ == "__main__":
    main()
