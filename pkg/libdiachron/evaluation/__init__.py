#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The evaluation module: cloze tasks and their leakage metrics, filtered
minimal pairs and the cross-time perplexity matrix.
"""


class EvaluationError(Exception):
    """Raised when an evaluation input is unusable."""

    def __init__(self, message):
        super(EvaluationError, self).__init__(message)


class SkipReport(object):
    """Input records an evaluation builder passed over, with reasons."""

    def __init__(self):
        self.entries = []

    def add(self, ref, reason):
        self.entries.append((ref, reason))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def reasons(self):
        counts = {}
        for _, reason in self.entries:
            counts[reason] = counts.get(reason, 0) + 1
        return counts

    def __repr__(self):
        return "SkipReport(%s)" % ", ".join(
            "%s=%d" % item for item in sorted(self.reasons().items())
        )
