#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Table-driven language models with known probabilities.  They implement
the LanguageModel interface in float64 and serve as exact references
for scoring, decoding and evaluation.
"""

import math

import torch

from libdiachron.model import LanguageModel, ModelConfigError


class LookupConfig(object):
    def __init__(self, vocab_size, context_length):
        self.vocab_size = vocab_size
        self.context_length = context_length

    def to_dict(self):
        return {
            "vocab_size": self.vocab_size,
            "context_length": self.context_length,
        }

    def __repr__(self):
        return "LookupConfig(vocab_size=%d, context_length=%d)" % (
            self.vocab_size, self.context_length
        )


class UniformModel(LanguageModel):
    """Assigns every token the same probability at every position."""

    def __init__(self, vocab_size, context_length=512):
        super(UniformModel, self).__init__(
            LookupConfig(vocab_size, context_length)
        )

    def forward(self, ids):
        self.check_length(ids.shape[1])
        return torch.zeros(ids.shape[0], ids.shape[1], self.vocab_size,
            dtype=torch.float64)


class BigramModel(LanguageModel):
    """
    Next-token log probabilities read from a table indexed by the current
    token.  Rows are normalized on construction.

    @param {list} table   vocab x vocab probabilities (or weights), row i
                          being the distribution following token i.
    """
    def __init__(self, table, context_length=512):
        table = torch.as_tensor(table, dtype=torch.float64)
        if table.dim() != 2 or table.shape[0] != table.shape[1]:
            raise ModelConfigError("Bigram table must be square, not %s" % (
                tuple(table.shape),
            ))
        if (table < 0).any() or (table.sum(-1) <= 0).any():
            raise ModelConfigError("Bigram rows must be non-negative with "
                "positive mass")

        super(BigramModel, self).__init__(
            LookupConfig(table.shape[0], context_length)
        )

        probs = table / table.sum(-1, keepdim=True)
        self.register_buffer("logprobs", probs.log())

    def forward(self, ids):
        self.check_length(ids.shape[1])
        return self.logprobs[ids]

    def logprob(self, prev, token):
        return float(self.logprobs[prev, token])

    def chain_nll(self, ids):
        """Per-position negative log likelihoods read off the table."""

        return [
            -self.logprob(prev, token) for prev, token in zip(ids, ids[1:])
        ]

    def chain_perplexity(self, ids):
        values = self.chain_nll(ids)
        return math.exp(math.fsum(values) / len(values))

    @classmethod
    def from_logits(cls, logits, context_length=512):
        """Builds a table model from raw scores via a stable softmax."""

        logits = torch.as_tensor(logits, dtype=torch.float64)
        return cls(torch.softmax(logits, -1), context_length)
