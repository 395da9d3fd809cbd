#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import os, random, shutil, tempfile, unittest

from libdiachron.records import read_jsonl
from libdiachron.tokenizer import (
    BpeTokenizer, TokenizerError, train_bpe, pretokenize, is_word_surface,
    has_word_char, SPECIALS, BOS, EOS, UNK
)
from libdiachron.pipeline.synthetic import generate

TEXTS = [
    u"the cat sat on the mat. the cat ate the rat.",
    u"a hat for the cat, a mat for the rat; that is that.",
] * 4


class TestPretokenize(unittest.TestCase):
    def test_chunks(self):
        self.assertEqual([ b"The", b" cat", b"'", b"s", b" 42", b"!!",
            b" ", b"\n" ], pretokenize(b"The cat's 42!! \n"))

    def test_unicode_punctuation_is_not_a_letter(self):
        dash, left, right = [ char.encode("utf8")
            for char in ( u"—", u"“", u"”" ) ]

        self.assertEqual([ b"word", dash, b"word" ],
            pretokenize(u"word—word".encode("utf8")))
        self.assertEqual([ b"said", b" " + left, b"hi", right ],
            pretokenize(u"said “hi”".encode("utf8")))
        self.assertEqual([ u" naïve".encode("utf8"),
            u" café".encode("utf8") ],
            pretokenize(u" naïve café".encode("utf8")))

    def test_undecodable_bytes_are_kept(self):
        data = b"caf\xe9 \xff!"
        self.assertEqual([ b"caf\xe9", b" \xff", b"!" ], pretokenize(data))

    def test_word_surfaces(self):
        self.assertTrue(is_word_surface(u"naïve".encode("utf8")))
        self.assertTrue(is_word_surface(b"\xc3"))
        self.assertFalse(is_word_surface(u"“hi".encode("utf8")))
        self.assertFalse(is_word_surface(b""))
        self.assertFalse(has_word_char(u"—".encode("utf8")))


class TestRoundTrip(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_random_bytes(self):
        tokenizer = train_bpe(TEXTS, 300)
        rng = random.Random(0)

        for _ in range(1000):
            data = bytes(rng.randrange(256)
                for _ in range(rng.randrange(64)))
            self.assertEqual(data,
                tokenizer.decode_bytes(tokenizer.encode_bytes(data)))

    def test_synthetic_corpus(self):
        generate(self.tempdir, "tiny")
        texts = [ doc.text for name in sorted(os.listdir(os.path.join(
            self.tempdir, "corpus")))
            for doc in read_jsonl(os.path.join(self.tempdir, "corpus",
                name)) ]

        tokenizer = train_bpe(texts, 400)
        for text in texts:
            self.assertEqual(text, tokenizer.decode(tokenizer.encode(text)))


class TestTrainBpe(unittest.TestCase):
    def setUp(self):
        self.tokenizer = train_bpe(TEXTS, 300)

    def test_vocab_size(self):
        self.assertTrue(self.tokenizer.vocab_size <= 300)
        self.assertTrue(self.tokenizer.vocab_size > len(SPECIALS) + 256)

    def test_round_trip(self):
        for text in TEXTS + [ u"zebra ünïcode ☃ 1984", u"" ]:
            self.assertEqual(text,
                self.tokenizer.decode(self.tokenizer.encode(text)))

    def test_merges_shorten_sequences(self):
        self.assertTrue(len(self.tokenizer.encode(u" the cat")) <
            len(u" the cat"))

    def test_deterministic(self):
        self.assertEqual(self.tokenizer, train_bpe(TEXTS, 300))
        self.assertEqual(self.tokenizer.digest(),
            train_bpe(TEXTS, 300).digest())

    def test_vocab_too_small(self):
        self.assertRaises(TokenizerError, train_bpe, TEXTS, 259)

    def test_no_text(self):
        self.assertRaises(TokenizerError, train_bpe, [], 300)
        self.assertRaises(TokenizerError, train_bpe, [ u"" ], 300)

    def test_min_frequency_stops_merging(self):
        tokenizer = train_bpe([ u"ab cd" ], 400, min_frequency=2)
        self.assertEqual(0, len(tokenizer.merges))


class TestWordInitiating(unittest.TestCase):
    def setUp(self):
        self.tokenizer = train_bpe(TEXTS, 300)

    def test_specials(self):
        for token_id in ( BOS, EOS, UNK ):
            self.assertFalse(self.tokenizer.is_word_initiating(token_id))

    def test_boundary_marker(self):
        ids = self.tokenizer.encode(u" cat")
        self.assertTrue(self.tokenizer.is_word_initiating(ids[0]))
        for token_id in ids[1:]:
            self.assertFalse(self.tokenizer.is_word_initiating(token_id))

    def test_punctuation_initiates(self):
        ids = self.tokenizer.encode(u".")
        self.assertTrue(self.tokenizer.is_word_initiating(ids[0]))

    def test_partition(self):
        initiating, continuation, excluded = self.tokenizer.partition()

        self.assertEqual([ EOS ], excluded)
        self.assertEqual(self.tokenizer.vocab_size,
            len(initiating) + len(continuation) + len(excluded))
        self.assertFalse(set(initiating) & set(continuation))

    def test_unknown_id(self):
        self.assertRaises(TokenizerError, self.tokenizer.is_word_initiating,
            self.tokenizer.vocab_size)


class TestNoByteFallback(unittest.TestCase):
    def test_unseen_bytes_are_unknown(self):
        tokenizer = train_bpe(TEXTS, 60, byte_fallback=False)
        ids = tokenizer.encode(u"cat Z")

        self.assertTrue(UNK in ids)
        self.assertEqual(u"cat �", tokenizer.decode(ids))

    def test_offsets(self):
        tokenizer = train_bpe(TEXTS, 300)
        ids, spans = tokenizer.encode_offsets(u"the cat")

        self.assertEqual(tokenizer.encode(u"the cat"), ids)
        self.assertEqual(0, spans[0][0])
        self.assertEqual(len(u"the cat"), spans[-1][1])


class TestSerialization(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_save_load(self):
        tokenizer = train_bpe(TEXTS, 300)
        path = os.path.join(self.tempdir, "tokenizer.json")
        tokenizer.save(path)

        loaded = BpeTokenizer.load(path)
        self.assertEqual(tokenizer, loaded)
        self.assertEqual(tokenizer.encode(TEXTS[0]), loaded.encode(TEXTS[0]))

    def test_bad_format(self):
        data = train_bpe(TEXTS, 300).to_dict()
        data["format"] = "something/2"
        self.assertRaises(TokenizerError, BpeTokenizer.from_dict, data)

    def test_tampered_vocab(self):
        data = train_bpe(TEXTS, 300).to_dict()
        data["vocab"][-1] = u"tampered"
        self.assertRaises(TokenizerError, BpeTokenizer.from_dict, data)

    def test_bad_merge(self):
        self.assertRaises(TokenizerError, BpeTokenizer, range(256),
            [ (0, 5) ])


if __name__ == "__main__":
    unittest.main()
