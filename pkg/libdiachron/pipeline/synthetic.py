#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Generates a synthetic diachronic fixture: a corpus of three eras with
planted collocations, a sense inventory for cloze tasks, minimal pairs
and a pipeline configuration that runs over them.

Every era holds exactly the same number of whitespace tokens and its last
document is dated in the era's last year, so the slice planner recovers
the eras as slices 1800-1850, 1850-1900 and 1900-1949.

Past targets follow "the <cue> of the" in every era.  Future targets
follow "through the <fcue>" in the last era only, while still occurring
in neutral contexts everywhere so that they survive vocabulary filters.
"""

import os
import random

from libdiachron.output import verbose
from libdiachron.records import write_jsonl, write_json

ERAS = ( (1800, 1849), (1850, 1899), (1900, 1949) )

FUNCTION_WORDS = ( "the", "of", "and", "a", "to", "in", "was", "that",
    "it", "with", "as", "for", "his", "her", "on", "by", "at", "from",
    "through" )

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"

PRESETS = {
    "tiny": {
        "tokens": 3000,
        "model": { "n_layers": 2, "n_heads": 2, "n_kv_heads": 1,
            "d_model": 32, "d_ff": 64, "context_length": 64 },
        "student": { "n_layers": 1 },
        "train": { "epochs": 1, "batch_size": 8, "weight_decay": 0.1,
            "learning_rate": 3e-3 },
        "vocab_size": 400,
        "k": 20,
        "max_sentences": 200,
    },
    "acceptance": {
        "tokens": 200000,
        "model": { "n_layers": 2, "n_heads": 4, "n_kv_heads": 2,
            "d_model": 64, "d_ff": 176, "context_length": 128 },
        "student": { "n_layers": 1 },
        "train": { "epochs": 2, "batch_size": 32, "weight_decay": 0.1,
            "learning_rate": 2e-3 },
        "vocab_size": 1024,
        "k": 100,
        "max_sentences": 2000,
    },
}

N_TARGETS = 5
SENSE_FREQUENCY = 5.0
DISTRACTOR_FREQUENCY = 5000.0


class SyntheticError(Exception):
    def __init__(self, message):
        super(SyntheticError, self).__init__(message)


class Lexicon(object):
    """Pseudo-words drawn without repetition from a seeded generator."""

    def __init__(self, rng):
        self.rng = rng
        self.seen = set(FUNCTION_WORDS)

    def word(self, syllables=None):
        while True:
            n = syllables or self.rng.randint(2, 3)
            word = "".join(self.rng.choice(CONSONANTS) +
                self.rng.choice(VOWELS) for _ in range(n))
            if word not in self.seen:
                self.seen.add(word)
                return word

    def pool(self, size, syllables=None):
        return [ self.word(syllables) for _ in range(size) ]


def zipf_weights(size, exponent=1.0):
    return [ 1.0 / (rank ** exponent) for rank in range(1, size + 1) ]


class EraWriter(object):
    """
    Emits the documents of one era, padding or trimming the final
    document so the era holds exactly `tokens` whitespace tokens.
    """
    DOC_TOKENS = 120

    def __init__(self, rng, era, index, shared, own, planted, tokens):
        self.rng = rng
        self.first, self.last = era
        self.index = index
        self.vocab = list(FUNCTION_WORDS) + shared + own
        self.weights = [ 8.0 ] * len(FUNCTION_WORDS) + \
            zipf_weights(len(shared)) + zipf_weights(len(own))
        self.planted = planted
        self.tokens = tokens

    def sentence(self):
        length = self.rng.randint(6, 14)
        return self.rng.choices(self.vocab, self.weights, k=length)

    def document_words(self, size):
        out = []
        while len(out) < size:
            roll = self.rng.random()
            if roll < 0.25 and self.planted:
                out.extend(self.rng.choice(self.planted).split())
            else:
                out.extend(self.sentence())
            out[-1] += "."
        return out

    def documents(self):
        remaining = self.tokens
        number = 0
        docs = []

        while remaining > 0:
            size = min(self.DOC_TOKENS, remaining)
            if 0 < remaining - size < 10:
                size = remaining
            body = self.document_words(size + 20)[:size]

            remaining -= size
            year = self.last if remaining == 0 else \
                self.rng.randint(self.first, self.last - 1)
            docs.append({
                "id": "era%d-%04d" % (self.index + 1, number),
                "title": "Synthetic %d.%d" % (self.index + 1, number),
                "author": "Generator",
                "year": year,
                "text": " ".join(body),
            })
            number += 1

        return docs


def _tail_sentence(rng, ending, target):
    """
    A sentence of function words followed by ending and target, long
    enough that target starts in the final tenth of its characters.
    """
    lead = []
    while True:
        lead.append(rng.choice(FUNCTION_WORDS))
        text = "%s %s %s." % (" ".join(lead), ending, target)
        if text.rindex(target) >= 0.9 * len(text) and len(lead) >= 12:
            return text


def _inventory(rng, past, future, cue, fcue):
    records = []
    for number, word in enumerate(past):
        records.append({
            "word": word, "sense_id": "past-%d" % number,
            "year": rng.randint(*ERAS[0]),
            "frequency": SENSE_FREQUENCY,
            "definition": "a planted word of every era",
            "examples": [ _tail_sentence(rng, "the %s of the" % cue, word) ],
        })
    for number, word in enumerate(future):
        records.append({
            "word": word, "sense_id": "future-%d" % number,
            "year": rng.randint(*ERAS[2]),
            "frequency": SENSE_FREQUENCY,
            "definition": "a planted word of the last era",
            "examples": [ _tail_sentence(rng, "through the %s" % fcue,
                word) ],
        })

    # Records every cloze rule refuses.
    records.append({ "word": past[0], "sense_id": "undated",
        "frequency": SENSE_FREQUENCY,
        "examples": [ "the %s of the %s." % (cue, past[0]) ] })
    records.append({ "word": past[1], "sense_id": "early",
        "year": ERAS[0][0], "frequency": SENSE_FREQUENCY,
        "examples": [ "%s was in the %s of the house and the garden "
            "and the field." % (past[1], cue) ] })
    records.append({ "word": past[2], "sense_id": "common",
        "year": ERAS[1][0], "frequency": DISTRACTOR_FREQUENCY,
        "examples": [ _tail_sentence(rng, "the %s of the" % cue,
            past[2]) ] })
    return records


def _pairs(past, future, cue, fcue):
    pairs = []
    for word in past:
        pairs.append({ "good": "the %s of the %s." % (cue, word),
            "bad": "the of %s the %s." % (cue, word), "subtask": "order" })
    for word in future:
        pairs.append({ "good": "through the %s %s." % (fcue, word),
            "bad": "the through %s %s." % (fcue, word),
            "subtask": "determiner" })
    return pairs


def generate(directory, preset="tiny", seed=0):
    """
    Writes the fixture into directory.

    @param {str} directory  Created when missing.
    @param {str} preset     'tiny' or 'acceptance'.
    @param {int} seed       Seeds every random choice.

    @return {str} The path of the generated diachron.json.
    """
    if preset not in PRESETS:
        raise SyntheticError("Unknown preset %r; expected one of %s" % (
            preset, ", ".join(sorted(PRESETS))))

    settings = PRESETS[preset]
    rng = random.Random(seed)
    lexicon = Lexicon(rng)

    shared = lexicon.pool(60)
    owns = [ lexicon.pool(30) for _ in ERAS ]
    cue, fcue = lexicon.word(2), lexicon.word(2)
    past = lexicon.pool(N_TARGETS)
    future = lexicon.pool(N_TARGETS)

    neutral = [ "a %s and a %s" % (word, rng.choice(shared))
        for word in past + future ] + [ "and %s was here" % cue,
        "and %s was here" % fcue ]
    collocations = [ "the %s of the %s" % (cue, word) for word in past ]
    forecasts = [ "through the %s %s" % (fcue, word) for word in future ]

    tokens = settings["tokens"]
    corpus_dir = os.path.join(directory, "corpus")
    for index, era in enumerate(ERAS):
        planted = neutral + collocations
        if index == len(ERAS) - 1:
            planted = planted + forecasts
        writer = EraWriter(rng, era, index, shared, owns[index], planted,
            tokens)
        write_jsonl(os.path.join(corpus_dir, "era-%d.jsonl" % (index + 1)),
            writer.documents())

    senses = os.path.join(directory, "senses.jsonl")
    pairs = os.path.join(directory, "pairs.jsonl")
    write_jsonl(senses, _inventory(rng, past, future, cue, fcue))
    write_jsonl(pairs, _pairs(past, future, cue, fcue))

    held_out = tokens // 10
    config = {
        "output_dir": "out",
        "seed": seed,
        "corpus": { "paths": [ "corpus" ],
            "range": [ ERAS[0][0], ERAS[-1][1] ] },
        "slices": { "n_slices": len(ERAS), "budgets": {
            "train": tokens - 2 * held_out, "val": held_out,
            "test": held_out } },
        "tokenizer": { "vocab_size": settings["vocab_size"] },
        "model": settings["model"],
        "student": settings["student"],
        "train": settings["train"],
        "evaluation": { "cloze_inventory": "senses.jsonl",
            "minimal_pairs": "pairs.jsonl", "k": settings["k"],
            "min_count": 2 },
        "discovery": { "max_sentences": settings["max_sentences"],
            "min_occurrences": 2, "top_n": 20, "words": [ fcue ] },
    }

    path = os.path.join(directory, "diachron.json")
    write_json(path, config)
    verbose("Generated %s fixture in %s: %d tokens per era" % (preset,
        directory, tokens))
    return path
