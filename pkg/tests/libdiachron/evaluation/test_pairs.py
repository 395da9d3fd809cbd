#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import io, os, random, shutil, tempfile, unittest

from libdiachron.model.lookup import UniformModel, BigramModel
from libdiachron.evaluation.pairs import (
    MinimalPair, PairReport, load_pairs, score_pair, minimal_pair_accuracy
)

# Ids: 0-2 specials, 3 "a", 4 "b"
TABLE = [
    [ 0.05, 0.05, 0.05, 0.70, 0.15 ],
    [ 0.20, 0.20, 0.20, 0.20, 0.20 ],
    [ 0.20, 0.20, 0.20, 0.20, 0.20 ],
    [ 0.10, 0.10, 0.10, 0.10, 0.60 ],
    [ 0.10, 0.10, 0.10, 0.50, 0.20 ],
]


class _Letters(object):
    def encode(self, text):
        return [ 3 + "ab".index(char) for char in text ]


class TestMinimalPair(unittest.TestCase):
    def test_errors(self):
        self.assertEqual([], MinimalPair("ab", "ba").errors())
        self.assertEqual([ "empty sentence" ], MinimalPair("", "ba").errors())
        self.assertEqual([ "sentences are identical" ],
            MinimalPair("ab", "ab").errors())
        self.assertEqual("all", MinimalPair("ab", "ba", None).group)


class TestLoadPairs(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")
        self.path = os.path.join(self.tempdir, "pairs.jsonl")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_key_variants_and_skips(self):
        with io.open(self.path, "w", encoding="utf8") as fd:
            fd.write(u'{"good": "ab", "bad": "ba", "subtask": "order"}\n')
            fd.write(u'{"sentence_good": "a", "sentence_bad": "b", '
                u'"UID": "agreement"}\n')
            fd.write(u'{"good": "ab", "bad": "ab"}\n')
            fd.write(u'{"good": "ab"\n')

        pairs, report = load_pairs(self.path)

        self.assertEqual([ "order", "agreement" ],
            [ pair.subtask for pair in pairs ])
        self.assertEqual("a", pairs[1].good)
        self.assertEqual({ "sentences are identical": 1, "malformed": 1 },
            report.reasons())


class TestScoring(unittest.TestCase):
    def setUp(self):
        self.model = BigramModel(TABLE, 16)
        self.tokenizer = _Letters()

    def test_preferred_sentence(self):
        self.assertTrue(score_pair(self.model, self.tokenizer,
            MinimalPair("ab", "ba")))
        self.assertFalse(score_pair(self.model, self.tokenizer,
            MinimalPair("ba", "ab")))

    def test_ties_are_incorrect(self):
        self.assertFalse(score_pair(UniformModel(5, 16), self.tokenizer,
            MinimalPair("ab", "ba")))

    def test_normalize_by_length(self):
        pair = MinimalPair("abb", "b")
        self.assertFalse(score_pair(self.model, self.tokenizer, pair))
        self.assertTrue(score_pair(self.model, self.tokenizer, pair,
            normalize=True))

    def test_accuracy(self):
        pairs = [ MinimalPair("ab", "ba", "order"),
            MinimalPair("ba", "ab", "order"),
            MinimalPair("a", "b", "lexical") ]

        report = minimal_pair_accuracy(self.model, self.tokenizer, pairs,
            model_id="m")

        self.assertAlmostEqual(2.0 / 3, report.accuracy)
        self.assertEqual(3, report.n)
        self.assertEqual(0.5, report.subtask_accuracy("order"))
        self.assertEqual([ ("m", "all", "pair_accuracy", report.accuracy),
            ("m", "lexical", "pair_accuracy", 1.0),
            ("m", "order", "pair_accuracy", 0.5) ], list(report.rows()))

    def test_order_of_pairs_does_not_matter(self):
        pairs = [ MinimalPair("ab", "ba", "order"),
            MinimalPair("ba", "ab", "order"),
            MinimalPair("abb", "bba", "order"),
            MinimalPair("a", "b", "lexical"),
            MinimalPair("b", "a", "lexical"),
            MinimalPair("aab", "abb", "agreement") ]
        expected = minimal_pair_accuracy(self.model, self.tokenizer, pairs,
            model_id="m")

        rng = random.Random(0)
        for _ in range(5):
            shuffled = list(pairs)
            rng.shuffle(shuffled)
            report = minimal_pair_accuracy(self.model, self.tokenizer,
                shuffled, model_id="m")
            self.assertEqual(expected.accuracy, report.accuracy)
            self.assertEqual(list(expected.rows()), list(report.rows()))

    def test_no_pairs(self):
        report = minimal_pair_accuracy(self.model, self.tokenizer, [])
        self.assertIsNone(report.accuracy)
        self.assertIsNone(PairReport("m", {}).accuracy)


if __name__ == "__main__":
    unittest.main()
