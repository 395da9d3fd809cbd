#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import math, unittest

from libdiachron.model import ScoringError, SequenceTooLongError
from libdiachron.model.lookup import UniformModel, BigramModel
from libdiachron.model.scoring import (
    nll, stream_nll, stream_perplexity, perplexity, per_word_surprisal,
    normalize_row, normalize_profile, sentence_logprob, token_stream
)
from libdiachron.tokenizer import train_bpe, BOS, EOS


def _bigram(vocab_size=6):
    table = [ [ 1.0 + ((row * 7 + col * 3) % 5) for col in range(vocab_size) ]
        for row in range(vocab_size) ]
    return BigramModel(table, context_length=4)


class TestNll(unittest.TestCase):
    def test_matches_table(self):
        model = _bigram()
        ids = [ 0, 3, 2, 5 ]
        for got, want in zip(nll(model, ids), model.chain_nll(ids)):
            self.assertAlmostEqual(want, got, places=12)

    def test_too_short(self):
        self.assertRaises(ScoringError, nll, _bigram(), [ 1 ])

    def test_too_long(self):
        self.assertRaises(SequenceTooLongError, nll, _bigram(),
            [ 1, 2, 3, 4, 5 ])


class TestStreamNll(unittest.TestCase):
    def test_every_token_scored_once(self):
        model = _bigram()
        ids = [ 0, 1, 2, 3, 4, 5, 0, 2, 4, 1, 3 ]

        for stride in ( 1, 2, 3 ):
            values = stream_nll(model, ids, stride)
            self.assertEqual(len(ids) - 1, len(values))
            for got, want in zip(values, model.chain_nll(ids)):
                self.assertAlmostEqual(want, got, places=12)

    def test_perplexity_of_bigram_chain(self):
        model = _bigram()
        ids = [ 0, 1, 2, 3, 4, 5, 0, 2 ]
        self.assertAlmostEqual(model.chain_perplexity(ids),
            stream_perplexity(model, ids), places=9)

    def test_bad_stride(self):
        self.assertRaises(ScoringError, stream_nll, _bigram(), [ 0, 1, 2 ],
            4)

    def test_nothing_to_score(self):
        self.assertRaises(ScoringError, stream_perplexity, _bigram(), [ 0 ])


class TestTextScoring(unittest.TestCase):
    def setUp(self):
        self.tokenizer = train_bpe([ u"the cat sat on the mat" ] * 3, 270)
        self.model = UniformModel(self.tokenizer.vocab_size, 8)

    def test_token_stream(self):
        ids = token_stream(self.tokenizer, [ u"a", u"b" ])
        self.assertEqual([ BOS ], ids[:1])
        self.assertEqual(EOS, ids[-1])
        self.assertEqual(2, ids.count(EOS))

    def test_uniform_perplexity_is_vocab_size(self):
        value = perplexity(self.model, self.tokenizer,
            [ u"the cat sat on the mat", u"zebras" ], stride=3)
        self.assertAlmostEqual(self.tokenizer.vocab_size, value, places=6)

    def test_document_junctions_are_not_scored(self):
        model = _bigram(self.tokenizer.vocab_size)
        texts = [ u"the cat", u"sat on", u"the mat" ]
        ids = token_stream(self.tokenizer, texts)

        values = [ value for value, target in zip(model.chain_nll(ids),
            ids[1:]) if target != BOS ]
        self.assertEqual(len(ids) - len(texts), len(values))
        self.assertAlmostEqual(math.exp(math.fsum(values) / len(values)),
            perplexity(model, self.tokenizer, texts, stride=2), places=9)

    def test_no_texts(self):
        self.assertRaises(ScoringError, perplexity, self.model,
            self.tokenizer, [])

    def test_per_word_surprisal(self):
        rows = per_word_surprisal(self.model, self.tokenizer,
            u"The cat, sat!")

        self.assertEqual([ "the", "cat", "sat" ], [ w for w, _ in rows ])
        for _, value in rows:
            self.assertAlmostEqual(math.log(self.tokenizer.vocab_size),
                value, places=9)

    def test_per_word_surprisal_without_words(self):
        self.assertEqual([], per_word_surprisal(self.model, self.tokenizer,
            u"42 !"))

    def test_sentence_logprob(self):
        n = len(self.tokenizer.encode(u"the cat"))
        log_v = math.log(self.tokenizer.vocab_size)

        self.assertAlmostEqual(-n * log_v, sentence_logprob(self.model,
            self.tokenizer, u"the cat"), places=9)
        self.assertAlmostEqual(-log_v, sentence_logprob(self.model,
            self.tokenizer, u"the cat", normalize=True), places=9)
        self.assertEqual(0.0, sentence_logprob(self.model, self.tokenizer,
            u""))


class TestNormalize(unittest.TestCase):
    def test_row(self):
        self.assertEqual([ 0.0, 0.5, 1.0 ], normalize_row([ 2.0, 3.0, 4.0 ]))
        self.assertEqual([ 0.0, 0.0 ], normalize_row([ 5.0, 5.0 ]))
        self.assertEqual([], normalize_row([]))

    def test_profile(self):
        profile = normalize_profile({
            "a": [ ("x", 1.0), ("y", 3.0) ],
            "b": [ ("x", 4.0), ("y", 2.0) ],
        }, "x y")

        self.assertEqual([ "x", "y" ], profile.words)
        self.assertEqual([ 0.0, 1.0 ], profile.values("a"))
        self.assertEqual([ 1.0, 0.0 ], profile.values("b"))
        self.assertEqual([ 4.0, 2.0 ], profile.values("b", use_raw=True))
        self.assertEqual(4, len(list(profile.rows())))

    def test_profile_rows_must_agree(self):
        self.assertRaises(ScoringError, normalize_profile, {
            "a": [ ("x", 1.0) ], "b": [ ("y", 1.0) ] })


class TestBigramModel(unittest.TestCase):
    def test_rejects_bad_tables(self):
        from libdiachron.model import ModelConfigError
        self.assertRaises(ModelConfigError, BigramModel, [ [ 1.0, 2.0 ] ])
        self.assertRaises(ModelConfigError, BigramModel,
            [ [ 0.0, 0.0 ], [ 1.0, 1.0 ] ])


if __name__ == "__main__":
    unittest.main()
