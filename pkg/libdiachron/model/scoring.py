#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Scoring utilities shared by evaluation and discovery: per-token negative
log likelihood, sliding-window perplexity, per-word surprisal and its
min-max normalized profile, and sentence log probability.

All scoring happens in float64 log space.
"""

import math

import torch
import torch.nn.functional as F

from libdiachron.output import debug
from libdiachron.model import ScoringError
from libdiachron.corpus.vocab import word_spans
from libdiachron.tokenizer import BOS, EOS


def token_stream(tokenizer, texts):
    """Concatenates <bos> text <eos> for every text."""

    ids = []
    for text in texts:
        ids.append(BOS)
        ids.extend(tokenizer.encode(text))
        ids.append(EOS)
    return ids


def logprobs(model, ids):
    """
    Returns the (length, vocab) float64 next-token log probabilities of a
    single sequence that fits the context.
    """
    model.check_length(len(ids))

    with torch.no_grad():
        logits = model(torch.as_tensor([ ids ], dtype=torch.long))[0]
    return F.log_softmax(logits.double(), dim=-1)


def nll(model, ids):
    """
    Per-position negative log likelihood of a sequence within the context:
    value i is -log p(ids[i + 1] | ids[:i + 1]).

    @raise {SequenceTooLongError} When ids exceed the context length.
    """
    if len(ids) < 2:
        raise ScoringError("nll needs at least two tokens, not %d" % (
            len(ids)
        ))

    table = logprobs(model, ids)
    targets = torch.as_tensor(ids[1:], dtype=torch.long)
    return (-table[:-1].gather(1, targets[:, None])[:, 0]).tolist()


def stream_nll(model, ids, stride=None):
    """
    Negative log likelihoods of every token of a stream but the first,
    computed with windows of the model context advanced by stride.  Each
    token is scored once, by the first window whose tail holds it, with
    every earlier token of that window as context.

    @param {int} stride   1 <= stride < context_length; half the context
                          by default.
    """
    context = model.context_length
    stride = stride or max(1, context // 2)
    if not 1 <= stride < context:
        raise ScoringError("stride must lie in [1, %d), not %d" % (
            context, stride
        ))

    total = len(ids)
    values = []
    scored = 1

    for begin in range(0, total, stride):
        end = min(begin + context, total)
        if end <= scored:
            continue

        table = logprobs(model, ids[begin:end])
        for pos in range(max(scored, begin + 1), end):
            values.append(-float(table[pos - begin - 1, ids[pos]]))
        scored = end

        if end == total:
            break

    return values


def stream_perplexity(model, ids, stride=None):
    values = stream_nll(model, ids, stride)
    if not values:
        raise ScoringError("Nothing to score after tokenization")
    return math.exp(math.fsum(values) / len(values))


def perplexity(model, tokenizer, texts, stride=None):
    """
    exp of the mean per-token NLL over the token stream of texts.  The
    <bos> opening each text after the first is context, not a target, so
    document junctions are not scored.
    """
    texts = list(texts)
    if not texts:
        raise ScoringError("perplexity needs at least one text")

    ids = token_stream(tokenizer, texts)
    values = [ value for value, target in zip(stream_nll(model, ids, stride),
        ids[1:]) if target != BOS ]
    if not values:
        raise ScoringError("Nothing to score after tokenization")
    return math.exp(math.fsum(values) / len(values))


def _byte_offsets(text):
    offsets = [ 0 ]
    for char in text:
        offsets.append(offsets[-1] + len(char.encode("utf8")))
    return offsets


def per_word_surprisal(model, tokenizer, sentence, stride=None):
    """
    Returns [(word, surprisal)] for the words of a sentence.  A word's
    surprisal is the mean NLL of the subword tokens overlapping it, the
    sentence being scored after <bos>.
    """
    spans = word_spans(sentence)
    if not spans:
        return []

    ids, token_spans = tokenizer.encode_offsets(sentence)
    values = stream_nll(model, [ BOS ] + ids, stride)
    offsets = _byte_offsets(sentence)

    out = []
    first = 0
    for word, start, end in spans:
        bstart, bend = offsets[start], offsets[end]

        while first < len(token_spans) and token_spans[first][1] <= bstart:
            first += 1

        overlap = []
        pos = first
        while pos < len(token_spans) and token_spans[pos][0] < bend:
            overlap.append(values[pos])
            pos += 1

        out.append((word, math.fsum(overlap) / len(overlap)))

    return out


def normalize_row(values):
    """Min-max normalizes a row; a constant row maps to zeros."""

    values = list(values)
    if not values:
        return []

    low, high = min(values), max(values)
    if high == low:
        return [ 0.0 ] * len(values)
    return [ (val - low) / (high - low) for val in values ]


class SurprisalProfile(object):
    """
    Per-model surprisal rows over the words of one sentence.  raw[label]
    and normalized[label] are lists aligned with words.
    """
    def __init__(self, sentence, words, raw, normalized):
        self.sentence = sentence
        self.words = list(words)
        self.raw = raw
        self.normalized = normalized

    def labels(self):
        return list(self.raw)

    def values(self, label, use_raw=False):
        return (self.raw if use_raw else self.normalized)[label]

    def rows(self):
        """(model, word index, word, raw, normalized) rows."""

        for label in self.raw:
            for index, word in enumerate(self.words):
                yield (label, index, word, self.raw[label][index],
                    self.normalized[label][index])

    def __repr__(self):
        return "SurprisalProfile(%r, %d models)" % (
            self.sentence, len(self.raw)
        )


def normalize_profile(rows, sentence=None):
    """
    Builds a SurprisalProfile from {model label: [(word, value)]} rows of
    one sentence, normalizing each row independently.
    """
    words = None
    raw = {}
    normalized = {}

    for label, row in rows.items():
        row_words = [ word for word, _ in row ]
        if words is None:
            words = row_words
        elif row_words != words:
            raise ScoringError("Rows of %r disagree on words" % label)

        raw[label] = [ float(value) for _, value in row ]
        normalized[label] = normalize_row(raw[label])

    return SurprisalProfile(sentence, words or [], raw, normalized)


def sentence_logprob(model, tokenizer, sentence, normalize=False):
    """
    Log probability of a sentence after <bos>: the sum over its tokens,
    or their mean when normalize is set.
    """
    ids = [ BOS ] + tokenizer.encode(sentence)
    if len(ids) < 2:
        return 0.0

    values = stream_nll(model, ids)
    total = -math.fsum(values)
    if normalize:
        total /= len(values)

    debug("log p(%r) = %f" % (sentence, total))
    return total
