#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Cloze ranking and the metrics computed from it.

A task is a hit for a model when the target word is among its top k
one-word completions, at a 0-based rank of at most k - 1.  Misses carry
the sentinel rank k + 1, so rank k itself never occurs.  Tasks whose
decoding failed keep a None rank and are left out of every denominator.
"""

from libdiachron.output import verbose, debug
from libdiachron.records import Record, write_csv, read_csv
from libdiachron.decoding import DecodingError, top_k_single_words
from libdiachron.evaluation import EvaluationError

REPORT_HEADER = ( "model", "slice", "metric", "value" )


class ClozeRanking(object):
    def __init__(self, task_id, model_id, rank, k, error=None):
        self.task_id = task_id
        self.model_id = model_id
        self.rank = rank
        self.k = k
        self.error = error

    @property
    def failed(self):
        return self.rank is None

    @property
    def sentinel(self):
        return self.k + 1

    @property
    def hit(self):
        return self.rank is not None and self.rank <= self.k - 1

    def reciprocal_rank(self):
        return 1.0 / (self.rank + 1) if self.hit else 0.0

    def to_row(self):
        return ( self.model_id, self.task_id, self.rank, self.k, self.error )

    @classmethod
    def from_row(cls, row):
        rank = row.rank
        return cls(row.task_id, row.model, int(rank) if rank else None,
            int(row.k), row.error or None)

    def __repr__(self):
        return "ClozeRanking(%s, %s, %r)" % (
            self.model_id, self.task_id, self.rank
        )


RANKING_HEADER = ( "model", "task_id", "rank", "k", "error" )


def save_rankings(path, rankings):
    write_csv(path, RANKING_HEADER, [ item.to_row() for item in rankings ])


def load_rankings(path):
    return [ ClozeRanking.from_row(row) for row in read_csv(path) ]


def rank_cloze(battery, tasks, k=100, beam_width=None, decoder=None):
    """
    Decodes every task under every battery member and returns one
    ClozeRanking per (member, task), members in battery order.

    @param {callable} decoder   Replaces top_k_single_words; called as
                                decoder(model, tokenizer, prefix, k,
                                beam_width) and returning a
                                CompletionList.
    """
    decoder = decoder or top_k_single_words
    rankings = []

    for label, model, tokenizer in battery:
        failures = 0
        for task in tasks:
            try:
                completions = decoder(model, tokenizer, task.prefix, k,
                    beam_width)
            except DecodingError as ex:
                debug("Cloze task %s under %s: %s" % (task.id, label, ex))
                rankings.append(ClozeRanking(task.id, label, None, k,
                    str(ex)))
                failures += 1
                continue

            rank = completions.rank_of(task.target)
            rankings.append(ClozeRanking(task.id, label,
                k + 1 if rank is None else rank, k))

        verbose("Ranked %d cloze tasks under %s (%d failed)" % (
            len(tasks), label, failures
        ))

    return rankings


def _task_map(tasks):
    return dict((task.id, task) for task in tasks)


def _ratio(part, whole):
    if whole == 0:
        return None
    return float(part) / whole


class LeakageReport(object):
    """
    Recall over the tasks a model may know (sense year <= cutoff) and
    leakage over those it may not.  Undefined ratios are None and flagged
    by the *_defined properties.
    """
    def __init__(self, model_id, cutoff, n_true, n_false, hits_true,
            hits_false, k, failed=0):
        self.model_id = model_id
        self.cutoff = cutoff
        self.n_true = n_true
        self.n_false = n_false
        self.hits_true = hits_true
        self.hits_false = hits_false
        self.k = k
        self.failed = failed

        self.recall = _ratio(hits_true, n_true)
        self.leakage = _ratio(hits_false, n_false)
        self.rnl = None
        if self.leakage is not None and self.recall:
            self.rnl = self.leakage / self.recall

    @property
    def recall_defined(self):
        return self.recall is not None

    @property
    def leakage_defined(self):
        return self.leakage is not None

    @property
    def rnl_defined(self):
        return self.rnl is not None

    def rows(self):
        where = "cutoff-%d" % self.cutoff
        for metric in ( "n_true", "n_false", "hits_true", "hits_false",
                "recall", "leakage", "rnl", "failed" ):
            yield ( self.model_id, where, metric, getattr(self, metric) )

    def __repr__(self):
        return "LeakageReport(%s, t1=%d, r=%r, l=%r, rnl=%r)" % (
            self.model_id, self.cutoff, self.recall, self.leakage, self.rnl
        )


def leakage_report(rankings, tasks, cutoff, k):
    """
    Builds the LeakageReport of one model's rankings at cutoff year t1.

    @raise {EvaluationError} When rankings mix models or name an unknown
                             task.
    """
    by_id = _task_map(tasks)
    models = set(item.model_id for item in rankings)
    if len(models) > 1:
        raise EvaluationError("leakage_report takes one model's rankings, "
            "got %s" % ", ".join(sorted(models)))

    n_true = n_false = hits_true = hits_false = failed = 0
    for item in rankings:
        task = by_id.get(item.task_id)
        if task is None:
            raise EvaluationError("Unknown cloze task %s" % item.task_id)
        if item.failed:
            failed += 1
            continue

        hit = item.rank is not None and item.rank <= k - 1
        if task.sense_year <= cutoff:
            n_true += 1
            hits_true += hit
        else:
            n_false += 1
            hits_false += hit

    model_id = models.pop() if models else None
    return LeakageReport(model_id, cutoff, n_true, n_false, hits_true,
        hits_false, k, failed)


def mrr(rankings):
    """
    Mean reciprocal rank over the rankings that did not fail; a miss
    counts 0.

    @raise {EvaluationError} When no ranking is usable.
    """
    usable = [ item for item in rankings if not item.failed ]
    if not usable:
        raise EvaluationError("mrr needs at least one ranking")
    return sum(item.reciprocal_rank() for item in usable) / len(usable)


def accuracy(rankings):
    usable = [ item for item in rankings if not item.failed ]
    if not usable:
        raise EvaluationError("accuracy needs at least one ranking")
    return float(sum(item.hit for item in usable)) / len(usable)


def sense_group(year, slices):
    """
    The label of the slice holding a sense year.  Years before the first
    slice fall in "before-<start>" and years after the last in
    "after-<end>".
    """
    for slc in slices:
        if slc.contains(year):
            return slc.label

    if year < slices[0].start_year:
        return "before-%d" % slices[0].start_year
    return "after-%d" % slices[-1].end_year


def group_labels(slices):
    return ([ "before-%d" % slices[0].start_year ]
        + [ slc.label for slc in slices ]
        + [ "after-%d" % slices[-1].end_year ])


class GroupedAccuracy(object):
    """
    Hits and totals per sense-year group, in slice order.  Groups with no
    usable ranking are listed in omitted rather than given a fraction.
    """
    def __init__(self, model_id, groups, omitted):
        self.model_id = model_id
        self.groups = groups
        self.omitted = omitted

    def fractions(self):
        return dict(
            (label, float(hits) / total)
            for label, (hits, total) in self.groups.items()
        )

    def overall(self):
        hits = sum(hits for hits, _ in self.groups.values())
        total = sum(total for _, total in self.groups.values())
        return _ratio(hits, total)

    def __repr__(self):
        return "GroupedAccuracy(%s, %r)" % (self.model_id, self.fractions())


def _group_rankings(rankings, tasks, slices):
    by_id = _task_map(tasks)
    groups = dict((label, []) for label in group_labels(slices))
    for item in rankings:
        if item.failed:
            continue
        task = by_id.get(item.task_id)
        if task is None:
            raise EvaluationError("Unknown cloze task %s" % item.task_id)
        groups[sense_group(task.sense_year, slices)].append(item)
    return groups


def grouped_accuracy(rankings, tasks, slices):
    """
    Top-k accuracy of one model per sense-year group.

    @param {list} slices    TimeSlices in order, defining the groups.
    """
    slices = list(slices)
    if not slices:
        raise EvaluationError("grouped_accuracy needs at least one slice")

    groups = {}
    omitted = []
    for label, members in _group_rankings(rankings, tasks, slices).items():
        if not members:
            omitted.append(label)
            continue
        groups[label] = ( sum(item.hit for item in members), len(members) )

    if omitted:
        verbose("Empty sense-year groups omitted: %s" % ", ".join(omitted))

    models = sorted(set(item.model_id for item in rankings))
    return GroupedAccuracy(",".join(models), groups, omitted)


def _by_model(rankings):
    models = []
    split = {}
    for item in rankings:
        if item.model_id not in split:
            models.append(item.model_id)
            split[item.model_id] = []
        split[item.model_id].append(item)
    return [ (model, split[model]) for model in models ]


def accuracy_grid(rankings, tasks, slices, k=100):
    """(model, group, "accuracy@k", value) rows for every model."""

    rows = []
    for model, items in _by_model(rankings):
        grouped = grouped_accuracy(items, tasks, slices)
        fractions = grouped.fractions()
        for label in group_labels(slices):
            if label in fractions:
                rows.append(( model, label, "accuracy@%d" % k,
                    fractions[label] ))
    return rows


def mrr_grid(rankings, tasks, slices):
    """(model, group, "mrr", value) rows for every model."""

    slices = list(slices)
    rows = []
    for model, items in _by_model(rankings):
        for label, members in _group_rankings(items, tasks, slices).items():
            if members:
                rows.append(( model, label, "mrr", mrr(members) ))
    return rows


def slice_cutoff(slc):
    """The last year a slice's texts may come from."""

    return slc.end_year if slc.closed else slc.end_year - 1


def battery_leakage(rankings, tasks, plan, k=100):
    """
    One LeakageReport per model of a battery, each at the last year of
    the slice the model was trained on.  Model ids are slice labels.
    """
    reports = []
    for model, items in _by_model(rankings):
        slc = plan.get(model)
        if slc is None:
            raise EvaluationError("Model %s names no slice of the plan" %
                model)
        reports.append(leakage_report(items, tasks, slice_cutoff(slc), k))
    return reports


def write_report(path, rows):
    """Writes (model, slice, metric, value) rows as CSV."""

    write_csv(path, REPORT_HEADER, rows)


def read_report(path):
    return [ Record(row) for row in read_csv(path) ]
