#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Top-k one-word completion of a prefix.

A hypothesis is a token path that starts with a word-initiating token.
Once a hypothesis has at least one token, the next-token mass of every
word-initiating token plus <eos> is reassigned to a virtual terminate
event: closing the hypothesis there scores score(path) + log p(terminate).
Continuation tokens extend the word.  Scores are raw sums of log
probabilities, with no length penalty.

The first step is never pruned, so single-token words are scored
exactly; later steps keep the beam_width best extensions.  The search
stops once k distinct words are complete and no live hypothesis scores
above the k-th of them, since extending a path can only lower its score.
"""

import math

import torch
import torch.nn.functional as F

from libdiachron.output import debug
from libdiachron.tokenizer import BOS, EOS, is_word_surface

BATCH_SIZE = 128
MAX_PATHS = 200000

WHITESPACE = frozenset(b" \t\n\r\x0b\x0c")


class DecodingError(Exception):
    """Raised when a prefix cannot be decoded."""

    def __init__(self, message):
        super(DecodingError, self).__init__(message)


class SearchBudgetError(DecodingError):
    """Raised when exhaustive enumeration would visit too many paths."""

    def __init__(self, estimate, budget):
        self.estimate = estimate
        self.budget = budget
        super(SearchBudgetError, self).__init__(
            "Exhaustive search would enumerate about %d paths, more than "
            "the budget of %d; lower max_word_tokens" % (estimate, budget)
        )


class Completion(object):
    """A completed word with the log probability of its token path."""

    def __init__(self, word, score, rank, path):
        self.word = word
        self.score = score
        self.rank = rank
        self.path = tuple(path)

    def __repr__(self):
        return "Completion(%d, %r, %.6f)" % (self.rank, self.word, self.score)


class CompletionList(list):
    """Completions in rank order.  short is set when fewer than k exist."""

    def __init__(self, items=(), k=None):
        super(CompletionList, self).__init__(items)
        self.k = k
        self.short = k is not None and len(self) < k

    def words(self):
        return [ item.word for item in self ]

    def rank_of(self, word):
        """0-based rank of word, compared case-insensitively, or None."""

        word = word.lower()
        for item in self:
            if item.word.lower() == word:
                return item.rank
        return None


class Vocabulary(object):
    """The token classes the search needs, derived from a tokenizer."""

    def __init__(self, tokenizer, allow_punctuation=False):
        self.tokenizer = tokenizer
        initiating, continuation, _ = tokenizer.partition()

        self.terminate = torch.as_tensor(initiating + [ EOS ],
            dtype=torch.long)
        self.continuation = torch.as_tensor(
            [ tid for tid in continuation if not tokenizer.is_special(tid) ],
            dtype=torch.long
        )
        self.first = [
            tid for tid in initiating
            if self._starts_word(tokenizer.token_bytes(tid),
                allow_punctuation)
        ]

    @staticmethod
    def _starts_word(surface, allow_punctuation):
        if not surface.startswith(b" ") or len(surface) < 2:
            return False

        rest = surface[1:]
        if allow_punctuation:
            return not any(b in WHITESPACE for b in rest)
        return is_word_surface(rest)

    def word(self, path):
        return self.tokenizer.decode(path).strip()


def _prefix_ids(model, tokenizer, prefix):
    ids = [ BOS ] + tokenizer.encode(prefix.rstrip())
    if len(ids) >= model.context_length:
        raise DecodingError("Prefix of %d tokens leaves no room in a "
            "context of %d" % (len(ids), model.context_length))
    return ids


def _next_logprobs(model, sequences):
    """float64 next-token log probabilities after each sequence."""

    out = []
    with torch.no_grad():
        for start in range(0, len(sequences), BATCH_SIZE):
            batch = torch.as_tensor(sequences[start:start + BATCH_SIZE],
                dtype=torch.long)
            logits = model(batch)[:, -1, :]
            out.append(F.log_softmax(logits.double(), dim=-1))
    return torch.cat(out)


class _Results(object):
    """Completed hypotheses, optionally reduced to the best per word."""

    def __init__(self, vocab, k, dedup):
        self.vocab = vocab
        self.k = k
        self.dedup = dedup
        self.best = {}
        self.items = []

    def add(self, score, path):
        word = self.vocab.word(path)
        if not self.dedup:
            self.items.append((score, path, word))
            return

        key = word.lower()
        held = self.best.get(key)
        if held is None or (-score, path) < (-held[0], held[1]):
            self.best[key] = (score, path, word)

    def threshold(self):
        """The k-th best distinct word score, or None."""

        if not self.dedup or self.k is None or len(self.best) < self.k:
            return None
        return sorted((item[0] for item in self.best.values()),
            reverse=True)[self.k - 1]

    def ranked(self):
        items = self.best.values() if self.dedup else self.items
        items = sorted(items, key=lambda item: (-item[0], item[1]))
        if self.k is not None:
            items = items[:self.k]
        return CompletionList([
            Completion(word, score, rank, path)
            for rank, (score, path, word) in enumerate(items)
        ], self.k)


def _search(model, tokenizer, prefix, k, beam_width, max_word_tokens,
        allow_punctuation, exhaustive, dedup=True):
    vocab = Vocabulary(tokenizer, allow_punctuation)
    prefix_ids = _prefix_ids(model, tokenizer, prefix)
    results = _Results(vocab, k, dedup)

    first = _next_logprobs(model, [ prefix_ids ])[0]
    frontier = sorted(
        ((float(first[tid]), (tid,)) for tid in vocab.first),
        key=lambda hyp: (-hyp[0], hyp[1])
    )

    depth = 1
    while frontier:
        if len(prefix_ids) + depth > model.context_length:
            debug("Context exhausted at depth %d" % depth)
            break

        extend = max_word_tokens is None or depth < max_word_tokens
        candidates = []

        for start in range(0, len(frontier), BATCH_SIZE):
            batch = frontier[start:start + BATCH_SIZE]
            threshold = None if exhaustive else results.threshold()
            if threshold is not None and batch[0][0] < threshold:
                break

            logps = _next_logprobs(model,
                [ prefix_ids + list(path) for _, path in batch ])
            terminate = torch.logsumexp(logps[:, vocab.terminate], dim=1)

            for row, (score, path) in enumerate(batch):
                results.add(score + float(terminate[row]), path)

            if not extend or not len(vocab.continuation):
                continue

            cont = logps[:, vocab.continuation]
            if not exhaustive and cont.shape[1] > beam_width:
                cont, index = torch.topk(cont, beam_width, dim=1)
                tokens = vocab.continuation[index]
            else:
                tokens = vocab.continuation.expand(cont.shape[0], -1)

            for row, (score, path) in enumerate(batch):
                for logp, tid in zip(cont[row].tolist(),
                        tokens[row].tolist()):
                    candidates.append((score + logp, path + (tid,)))

            if not exhaustive and len(candidates) > 4 * beam_width:
                candidates.sort(key=lambda hyp: (-hyp[0], hyp[1]))
                del candidates[beam_width:]

        candidates.sort(key=lambda hyp: (-hyp[0], hyp[1]))
        frontier = candidates if exhaustive else candidates[:beam_width]
        depth += 1

        threshold = None if exhaustive else results.threshold()
        if threshold is not None and frontier and frontier[0][0] < threshold:
            break

    return results.ranked()


def top_k_single_words(model, tokenizer, prefix, k, beam_width=None,
        max_word_tokens=None, allow_punctuation=False):
    """
    Returns the k most probable one-word completions of prefix, best
    first.  Words are deduplicated case-insensitively, keeping the best
    scoring variant; equal scores are ordered by token-id path.  The
    returned CompletionList is flagged short when fewer than k words
    could be completed.

    @param {int} k                  Number of words, at least 1.
    @param {int} beam_width         Hypotheses kept per step after the
                                    first; 4 * k by default.
    @param {int} max_word_tokens    Longest token path considered; bounded
                                    only by the context when None.
    @param {bool} allow_punctuation Admit punctuation in first tokens.
    @raise {DecodingError}          When the prefix fills the context.
    """
    if k < 1:
        raise DecodingError("k must be at least 1, not %r" % k)

    beam_width = beam_width or 4 * k
    if beam_width < k:
        raise DecodingError("beam_width %d is smaller than k %d" % (
            beam_width, k
        ))

    return _search(model, tokenizer, prefix, k, beam_width,
        max_word_tokens, allow_punctuation, exhaustive=False)


def enumeration_size(tokenizer, max_word_tokens, allow_punctuation=False):
    """Number of token paths exhaustive enumeration visits."""

    vocab = Vocabulary(tokenizer, allow_punctuation)
    first, cont = len(vocab.first), len(vocab.continuation)
    return sum(first * cont ** depth for depth in range(max_word_tokens))


def brute_force_single_words(model, tokenizer, prefix, k=None,
        max_word_tokens=2, allow_punctuation=False, dedup=True,
        budget=MAX_PATHS):
    """
    Scores every single-word token path of up to max_word_tokens tokens
    exactly as top_k_single_words does, and ranks them globally.  With
    dedup off and k None every path is returned, so that the completion
    probabilities can be summed.

    @raise {SearchBudgetError} When more than budget paths would be
                               enumerated.
    """
    estimate = enumeration_size(tokenizer, max_word_tokens,
        allow_punctuation)
    if estimate > budget:
        raise SearchBudgetError(estimate, budget)

    return _search(model, tokenizer, prefix, k, None, max_word_tokens,
        allow_punctuation, exhaustive=True, dedup=dedup)


def total_mass(completions):
    """Sum of the probabilities of a list of completions."""

    return math.fsum(math.exp(item.score) for item in completions)


def decode_prefixes(model, tokenizer, prefixes, k, beam_width=None):
    """
    Yields (prefix id, rank, word, score) rows for each prefix; the prefix
    id is its 0-based position in prefixes.
    """
    for prefix_id, prefix in enumerate(prefixes):
        for item in top_k_single_words(model, tokenizer, prefix, k,
                beam_width):
            yield (prefix_id, item.rank, item.word, item.score)
