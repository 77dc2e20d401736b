#!/usr/bin/env python3
"""Regenerate data/lexicon_en.tsv from the LemmInflect lemma dictionary.

Rows are (word, pos, lemma). Only words with at least one lemma that differs
from the word itself are written; everything else passes through the
lemmatiser unchanged. Lemmas are rewritten to their own resolved form so that
lemmatising a lemma is a no-op.
"""

import argparse
import re

from lemminflect.core.Lemmatizer import Lemmatizer

WORD = re.compile(r"^[a-z]+$")


def shortest(lemmas):
    return min(lemmas, key=lambda s: (len(s), s))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("output")
    args = ap.parse_args()

    raw = Lemmatizer()._getLemmaDict()
    table = {}
    for word, by_pos in raw.items():
        if not WORD.match(word):
            continue
        rows = set()
        for pos, lemmas in by_pos.items():
            for lemma in lemmas:
                lemma = lemma.lower()
                if WORD.match(lemma):
                    rows.add((pos, lemma))
        if rows and any(lemma != word for _, lemma in rows):
            table.setdefault(word, set()).update(rows)

    def resolve(word):
        seen = set()
        while word in table and word not in seen:
            seen.add(word)
            nxt = shortest([lemma for _, lemma in table[word]])
            if nxt == word:
                break
            word = nxt
        return word

    out = []
    for word in sorted(table):
        for pos, lemma in sorted(table[word]):
            out.append((word, pos, lemma if lemma == word else resolve(lemma)))

    # Drop words whose resolved choice is still not a fixed point.
    final = {}
    for word, pos, lemma in out:
        final.setdefault(word, set()).add(lemma)
    choice = {w: shortest(ls) for w, ls in final.items()}
    bad = {w for w, c in choice.items() if c in choice and choice[c] != c}
    with open(args.output, "w", encoding="utf-8") as f:
        f.write("# word\tpos\tlemma\n")
        for word, pos, lemma in out:
            if word not in bad:
                f.write(f"{word}\t{pos}\t{lemma}\n")


if __name__ == "__main__":
    main()
