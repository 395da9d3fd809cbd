#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Minimal pair acceptability.  A pair is correct when the model gives the
good sentence a strictly higher log probability than the bad one.
"""

from libdiachron.output import verbose
from libdiachron.records import Record, iter_jsonl
from libdiachron.corpus.vocab import words
from libdiachron.model.scoring import sentence_logprob
from libdiachron.evaluation import SkipReport


class MinimalPair(object):
    def __init__(self, good, bad, subtask="all"):
        self.good = good
        self.bad = bad
        self.subtask = subtask or "all"

    @property
    def group(self):
        return self.subtask

    def words(self):
        return words(self.good) + words(self.bad)

    def errors(self):
        errors = []
        if not self.good or not self.bad:
            errors.append("empty sentence")
        elif self.good == self.bad:
            errors.append("sentences are identical")
        return errors

    def __repr__(self):
        return "MinimalPair(%s, %r / %r)" % (self.subtask, self.good,
            self.bad)


def load_pairs(path):
    """
    Reads minimal pairs from JSON lines with keys good, bad and an
    optional subtask (the field names sentence_good and sentence_bad
    are accepted too).  Invalid lines are skipped with a report.

    @return {tuple} (pairs, SkipReport)
    """
    report = SkipReport()
    pairs = []
    malformed = []

    for lineno, record in iter_jsonl(path, malformed):
        record = Record(record)
        pair = MinimalPair(
            record.good or record.sentence_good,
            record.bad or record.sentence_bad,
            record.subtask or record.UID
        )
        errors = pair.errors()
        if errors:
            report.add("%s:%d" % (path, lineno), errors[0])
            continue
        pairs.append(pair)

    for lineno, _ in malformed:
        report.add("%s:%d" % (path, lineno), "malformed")

    return pairs, report


class PairReport(object):
    """
    Aggregate and per-subtask accuracy.  accuracy is None when there were
    no pairs.
    """
    def __init__(self, model_id, subtasks):
        self.model_id = model_id
        self.subtasks = subtasks

        correct = sum(hits for hits, _ in subtasks.values())
        total = sum(count for _, count in subtasks.values())
        self.n = total
        self.accuracy = float(correct) / total if total else None

    def subtask_accuracy(self, subtask):
        hits, total = self.subtasks[subtask]
        return float(hits) / total

    def rows(self):
        yield ( self.model_id, "all", "pair_accuracy", self.accuracy )
        for subtask in sorted(self.subtasks):
            yield ( self.model_id, subtask, "pair_accuracy",
                self.subtask_accuracy(subtask) )

    def __repr__(self):
        return "PairReport(%s, %r over %d)" % (self.model_id, self.accuracy,
            self.n)


def score_pair(model, tokenizer, pair, normalize=False):
    good = sentence_logprob(model, tokenizer, pair.good, normalize)
    bad = sentence_logprob(model, tokenizer, pair.bad, normalize)
    return good > bad


def minimal_pair_accuracy(model, tokenizer, pairs, normalize=False,
        model_id=None):
    """
    Scores every pair and returns a PairReport.  Ties count as incorrect.

    @param {bool} normalize   Compare per-token mean log probabilities
                              instead of sums.
    """
    subtasks = {}
    for pair in pairs:
        hits, total = subtasks.get(pair.subtask, (0, 0))
        correct = score_pair(model, tokenizer, pair, normalize)
        subtasks[pair.subtask] = ( hits + int(correct), total + 1 )

    report = PairReport(model_id, subtasks)
    verbose("Minimal pair accuracy %s: %r" % (model_id, report.accuracy))
    return report
