#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Bottom-up discovery of words whose surprisal shifts across the battery.

Every sample sentence is scored by every slice model, each model's
per-word surprisal row is min-max normalized, and each occurrence gives a
delta per model: its value minus the baseline model's value.  A word's
trajectory is the aggregate of its deltas in slice order.  Words whose
trajectory keeps falling towards the baseline are candidates for a sense
that emerged late.
"""

import math

from libdiachron.output import verbose, debug
from libdiachron.records import write_csv
from libdiachron.corpus.vocab import word_spans
from libdiachron.model.scoring import per_word_surprisal, normalize_profile

AGGREGATES = ( "mean", "median" )


class DiscoveryError(Exception):
    """Raised when a discovery request cannot be served."""

    def __init__(self, message):
        super(DiscoveryError, self).__init__(message)


class Occurrence(object):
    """One word position of one sentence with its values per model."""

    def __init__(self, sentence_id, index, start, end, sentence, raw,
            normalized):
        self.sentence_id = sentence_id
        self.index = index
        self.start = start
        self.end = end
        self.sentence = sentence
        self.raw = raw
        self.normalized = normalized

    def values(self, use_raw=False):
        return self.raw if use_raw else self.normalized

    def context(self, window=40):
        left = max(0, self.start - window)
        return self.sentence[left:self.end + window].strip()


def _sample(sentences):
    for number, item in enumerate(sentences):
        if isinstance(item, str):
            yield number, item
        else:
            yield item


def sentence_profile(battery, sentence, stride=None):
    """Per-model surprisal profile of one sentence across the battery."""

    return normalize_profile(dict(
        (label, per_word_surprisal(model, tokenizer, sentence, stride))
        for label, model, tokenizer in battery
    ), sentence)


def collect_occurrences(battery, sentences, stride=None):
    """
    Scores every sample sentence under the battery.

    @param {list} sentences     Texts, or (sentence id, text) pairs.
    @return {dict} lower-cased word to list of Occurrence, in sample order.
    """
    occurrences = {}
    count = 0
    for sentence_id, sentence in _sample(sentences):
        spans = word_spans(sentence)
        if not spans:
            continue

        profile = sentence_profile(battery, sentence, stride)
        for index, (word, start, end) in enumerate(spans):
            occurrences.setdefault(word, []).append(Occurrence(
                sentence_id, index, start, end, sentence,
                dict((label, profile.raw[label][index])
                    for label in profile.labels()),
                dict((label, profile.normalized[label][index])
                    for label in profile.labels()),
            ))
        count += 1

    verbose("Scored %d sample sentences, %d distinct words" % (
        count, len(occurrences)
    ))
    return occurrences


def _median(values):
    values = sorted(values)
    mid = len(values) // 2
    if len(values) % 2:
        return values[mid]
    return (values[mid - 1] + values[mid]) / 2.0


class TrajectoryRecord(object):
    """
    A word's aggregated deltas per slice model, in battery order.  The
    baseline model's delta is 0.
    """
    def __init__(self, word, labels, deltas, occurrences, epsilon=0.0):
        self.word = word
        self.labels = list(labels)
        self.deltas = list(deltas)
        self.occurrences = occurrences
        self.monotone_decreasing = all(
            a - b > -epsilon
            for a, b in zip(self.deltas, self.deltas[1:])
        )

    @property
    def first_last_change(self):
        return self.deltas[0] - self.deltas[-1]

    @property
    def cumulative(self):
        return math.fsum(max(delta, 0.0) for delta in self.deltas)

    def row(self):
        return [ self.word, self.occurrences, self.monotone_decreasing,
            self.first_last_change, self.cumulative ] + self.deltas

    def __repr__(self):
        return "TrajectoryRecord(%r, %s)" % (self.word, ", ".join(
            "%.4f" % delta for delta in self.deltas))


def _check(battery, baseline, aggregate="mean"):
    if baseline not in battery:
        raise DiscoveryError("Baseline slice %s is not in the battery (%s)" %
            (baseline, ", ".join(battery.labels())))
    if aggregate not in AGGREGATES:
        raise DiscoveryError("Unknown aggregate %r" % aggregate)


def trajectories(battery, baseline, occurrences, min_occurrences=5,
        aggregate="mean", use_raw=False, epsilon=0.0):
    """Builds a TrajectoryRecord for every word seen often enough."""

    _check(battery, baseline, aggregate)
    combine = _median if aggregate == "median" else (
        lambda values: math.fsum(values) / len(values))

    labels = battery.labels()
    records = []
    for word, items in occurrences.items():
        if len(items) < min_occurrences:
            continue

        deltas = []
        for label in labels:
            deltas.append(combine([
                item.values(use_raw)[label] - item.values(use_raw)[baseline]
                for item in items
            ]))
        records.append(TrajectoryRecord(word, labels, deltas, len(items),
            epsilon))

    debug("%d words with at least %d occurrences" % (len(records),
        min_occurrences))
    return records


def trajectory_candidates(battery, baseline, sentences, min_occurrences=5,
        top_n=50, epsilon=0.0, aggregate="mean", use_raw=False,
        occurrences=None, stride=None):
    """
    Returns up to top_n words whose deltas decrease strictly in slice
    order, ranked by first_last_change descending (ties by word).

    @param {float} epsilon      Slack: consecutive deltas may rise by less
                                than epsilon.
    @param {dict} occurrences   Precomputed collect_occurrences output;
                                sentences is ignored when given.
    @raise {DiscoveryError}     When baseline is not a battery slice.
    """
    _check(battery, baseline, aggregate)
    if occurrences is None:
        occurrences = collect_occurrences(battery, sentences, stride)

    records = [
        record for record in trajectories(battery, baseline, occurrences,
            min_occurrences, aggregate, use_raw, epsilon)
        if record.monotone_decreasing
    ]
    records.sort(key=lambda rec: (-rec.first_last_change, rec.word))
    return records[:top_n]


def cumulative_divergence(battery, baseline, sentences, top_n=50,
        min_occurrences=5, aggregate="mean", use_raw=False,
        occurrences=None, stride=None):
    """
    Ranks words by the sum of their positive deltas, ties broken by the
    larger occurrence count and then by word.
    """
    _check(battery, baseline, aggregate)
    if occurrences is None:
        occurrences = collect_occurrences(battery, sentences, stride)

    records = trajectories(battery, baseline, occurrences, min_occurrences,
        aggregate, use_raw)
    records.sort(key=lambda rec: (-rec.cumulative, -rec.occurrences,
        rec.word))
    return records[:top_n]


TRAJECTORY_HEADER = [ "word", "occurrences", "monotone_decreasing",
    "first_last_change", "cumulative" ]


def save_trajectories(path, records, labels):
    write_csv(path, TRAJECTORY_HEADER + [ "delta:%s" % label
        for label in labels ], [ record.row() for record in records ])


class OccurrenceTable(object):
    """Per-occurrence values of one word, with a sense label to fill in."""

    def __init__(self, word, labels, rows, note=None):
        self.word = word
        self.labels = list(labels)
        self.rows = rows
        self.note = note

    def __len__(self):
        return len(self.rows)

    def header(self):
        return ( [ "sentence_id", "word_index" ] + self.labels
            + [ "context", "sense_label" ] )

    def save(self, path):
        write_csv(path, self.header(), self.rows)


def occurrence_trajectories(battery, word, sentences, window=40,
        use_raw=False, occurrences=None, stride=None):
    """
    One row per occurrence of word: sentence id, word index, the value of
    every model, a context snippet and an empty sense label.  A word that
    does not occur yields an empty table with a note.
    """
    if occurrences is None:
        occurrences = collect_occurrences(battery, sentences, stride)

    labels = battery.labels()
    items = occurrences.get(word.lower(), [])
    rows = [
        [ item.sentence_id, item.index ]
        + [ item.values(use_raw)[label] for label in labels ]
        + [ item.context(window), "" ]
        for item in items
    ]

    note = None
    if not rows:
        note = "%r does not occur in the sample" % word
        verbose(note)

    return OccurrenceTable(word, labels, rows, note)


def rank_table(rankings, task_id):
    """(model, rank) of one cloze task across the battery, in ranking order."""

    return [ (item.model_id, item.rank) for item in rankings
        if item.task_id == task_id ]
