#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Word counting under the word rule shared by every filter: lowercase
maximal alphabetic runs, with apostrophes kept inside words.
"""

import re
from collections import Counter

from libdiachron.output import verbose
from libdiachron.records import read_json, write_json
from libdiachron.corpus import CorpusError

WORD_RULE = "lower-alpha-apostrophe"

WORD_RE = re.compile(r"[^\W\d_]+(?:['’][^\W\d_]+)*")


def words(text):
    """Returns the words of a text under the word rule."""

    return WORD_RE.findall(text.lower())


def word_spans(text):
    """
    Returns (word, start, end) character spans of the words of a text.
    Lowercasing may change the length of some characters, so spans are
    found on the original text and only the word is lowercased.
    """
    return [
        (match.group(0).lower(), match.start(), match.end())
        for match in WORD_RE.finditer(text)
    ]


class WordCounts(object):
    """Occurrence counts of the words of one slice split."""

    def __init__(self, counts=None, source="", word_rule=WORD_RULE):
        self.counts = Counter(counts or {})
        self.source = source
        self.word_rule = word_rule

    def __getitem__(self, word):
        return self.counts.get(word, 0)

    def __contains__(self, word):
        return word in self.counts

    def __len__(self):
        return len(self.counts)

    def total(self):
        return sum(self.counts.values())

    def __add__(self, other):
        if self.word_rule != other.word_rule:
            raise CorpusError("Cannot add counts under different word "
                "rules: %s, %s" % (self.word_rule, other.word_rule))

        source = "+".join(src for src in (self.source, other.source) if src)
        return WordCounts(self.counts + other.counts, source, self.word_rule)

    def __eq__(self, other):
        return isinstance(other, WordCounts) and \
            dict(self.counts) == dict(other.counts) and \
            self.word_rule == other.word_rule

    def per_million(self, word):
        """Returns the frequency of a word per million word tokens."""

        total = self.total()
        if not total:
            return 0.0
        return 1e6 * self.counts.get(word, 0) / total

    def to_dict(self):
        return {
            "source": self.source, "word_rule": self.word_rule,
            "counts": dict(sorted(self.counts.items())),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["counts"], data["source"], data["word_rule"])

    def save(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(read_json(path))

    def __repr__(self):
        return "WordCounts(%s, %d types, %d tokens)" % (
            self.source, len(self), self.total()
        )


def word_counts(store, ids, source=""):
    """
    Counts the words of the given documents.

    @param {CorpusStore} store  The corpus.
    @param {list} ids           Document ids of one split.
    @param {str} source         Label recorded with the counts, such as
                                "1750-1820/train".
    """
    counts = Counter()
    for text in store.texts(ids):
        counts.update(words(text))

    return WordCounts(counts, source)


class RetentionReport(object):
    """Retained and total item counts per item group."""

    def __init__(self):
        self.groups = {}

    def add(self, group, retained):
        kept, total = self.groups.get(group, (0, 0))
        self.groups[group] = (kept + int(retained), total + 1)

    def retained(self):
        return sum(kept for kept, _ in self.groups.values())

    def total(self):
        return sum(total for _, total in self.groups.values())

    def rows(self):
        """Returns (group, retained, total) rows sorted by group."""

        return [
            (group, kept, total)
            for group, (kept, total) in sorted(self.groups.items())
        ]

    def __repr__(self):
        return "RetentionReport(%d of %d retained)" % (
            self.retained(), self.total()
        )


def filter_in_vocab(items, vocabularies, min_count=2):
    """
    Keeps the items whose every word occurs at least min_count times in
    every vocabulary.

    Items expose their words through a words() method and may carry a
    group attribute (a minimal pair subtask, for instance) under which
    the retention report tallies them.

    @return {tuple} (retained items, RetentionReport)
    @raise {CorpusError} When no vocabulary is given.
    """
    vocabularies = list(vocabularies)
    if not vocabularies:
        raise CorpusError("filter_in_vocab needs at least one vocabulary")

    for vocab in vocabularies:
        if vocab.word_rule != WORD_RULE:
            raise CorpusError("Vocabulary %s uses word rule %s" % (
                vocab.source, vocab.word_rule
            ))

    report = RetentionReport()
    retained = []

    for item in items:
        keep = min_count <= 0 or all(
            vocab[word] >= min_count
            for word in item.words() for vocab in vocabularies
        )
        report.add(getattr(item, "group", None) or "all", keep)

        if keep:
            retained.append(item)

    verbose("Vocabulary filter retained %r" % report)
    return retained, report
