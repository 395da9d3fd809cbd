#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import os, shutil, tempfile, unittest

from libdiachron.corpus import Document, CorpusStore, CorpusError
from libdiachron.corpus.vocab import (
    WordCounts, words, word_spans, word_counts, filter_in_vocab
)


class Item(object):
    def __init__(self, text, group=None):
        self.text = text
        self.group = group

    def words(self):
        return words(self.text)


class TestWords(unittest.TestCase):
    def test_word_rule(self):
        self.assertEqual([ "the", "cat's", "tail", "was" ],
            words("The cat's tail, 42 was_"))

    def test_spans_on_original_text(self):
        self.assertEqual([ ("hello", 0, 5), ("world", 7, 12) ],
            word_spans("Hello, World!"))


class TestWordCounts(unittest.TestCase):
    def test_counts(self):
        store = CorpusStore([ Document("a", 1800, "the cat and the dog"),
            Document("b", 1801, "The end") ])
        counts = word_counts(store, [ "a", "b" ], "x/train")

        self.assertEqual(3, counts["the"])
        self.assertEqual(0, counts["bird"])
        self.assertEqual(7, counts.total())
        self.assertAlmostEqual(1e6 * 3 / 7, counts.per_million("the"))

    def test_add(self):
        total = WordCounts({ "a": 1 }, "x") + WordCounts({ "a": 2, "b": 1 },
            "y")
        self.assertEqual(3, total["a"])
        self.assertEqual("x+y", total.source)

    def test_add_rejects_other_rule(self):
        other = WordCounts({ "a": 1 }, word_rule="something-else")
        self.assertRaises(CorpusError, lambda: WordCounts() + other)

    def test_save_load(self):
        tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")
        try:
            path = os.path.join(tempdir, "vocab.json")
            counts = WordCounts({ "a": 2, "b": 1 }, "s/train")
            counts.save(path)
            self.assertEqual(counts, WordCounts.load(path))
        finally:
            shutil.rmtree(tempdir)


class TestFilterInVocab(unittest.TestCase):
    def test_every_vocabulary_must_hold_every_word(self):
        early = WordCounts({ "the": 5, "cat": 2, "dog": 1 })
        late = WordCounts({ "the": 5, "cat": 3, "dog": 4 })
        items = [ Item("the cat", "animals"), Item("the dog", "animals"),
            Item("the", None) ]

        kept, report = filter_in_vocab(items, [ early, late ], 2)

        self.assertEqual([ "the cat", "the" ], [ i.text for i in kept ])
        self.assertEqual([ ("all", 1, 1), ("animals", 1, 2) ],
            report.rows())
        self.assertEqual(2, report.retained())
        self.assertEqual(3, report.total())

    def test_min_count_zero_keeps_everything(self):
        kept, _ = filter_in_vocab([ Item("unseen words") ],
            [ WordCounts() ], 0)
        self.assertEqual(1, len(kept))

    def test_requires_a_vocabulary(self):
        self.assertRaises(CorpusError, filter_in_vocab, [], [])

    def test_rejects_foreign_rule(self):
        self.assertRaises(CorpusError, filter_in_vocab, [],
            [ WordCounts(word_rule="whitespace") ])


if __name__ == "__main__":
    unittest.main()
