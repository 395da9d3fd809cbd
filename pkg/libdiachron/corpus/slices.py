#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Time slice planning and the reserved train/validation/test split of a
slice.

Slices are contiguous whole-year intervals.  Every slice but the last is
half open, [start, end), so a boundary year belongs to the later slice;
the last slice is closed at the end of the configured range.  Labels
read "<start>-<end>".
"""

import random

from libdiachron.output import verbose, debug
from libdiachron.records import Record
from libdiachron.corpus import CorpusError, whitespace_tokens

SPLITS = ( "train", "val", "test" )


class Budgets(object):
    """Per-split token budgets of one slice."""

    def __init__(self, train, val, test):
        self.train = int(train)
        self.val = int(val)
        self.test = int(test)

        if min(self.train, self.val, self.test) < 0:
            raise CorpusError("Token budgets must be non-negative: %r" % (
                self
            ))

    @classmethod
    def coerce(cls, budgets):
        if isinstance(budgets, cls):
            return budgets
        if isinstance(budgets, dict):
            return cls(budgets["train"], budgets["val"], budgets["test"])
        return cls(*budgets)

    def total(self):
        return self.train + self.val + self.test

    def to_dict(self):
        return { "train": self.train, "val": self.val, "test": self.test }

    def __eq__(self, other):
        return isinstance(other, Budgets) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        return "Budgets(train=%d, val=%d, test=%d)" % (
            self.train, self.val, self.test
        )


class TimeSlice(object):
    """A contiguous year interval with its token budgets."""

    def __init__(self, start_year, end_year, budgets, closed=False,
            tokens=0):
        if start_year > end_year:
            raise CorpusError("Slice starts after it ends: %d-%d" % (
                start_year, end_year
            ))

        self.start_year = start_year
        self.end_year = end_year
        self.closed = closed
        self.tokens = tokens

        budgets = Budgets.coerce(budgets)
        self.train_budget = budgets.train
        self.val_budget = budgets.val
        self.test_budget = budgets.test

    @property
    def label(self):
        return "%d-%d" % (self.start_year, self.end_year)

    def budgets(self):
        return Budgets(self.train_budget, self.val_budget, self.test_budget)

    def contains(self, year):
        if self.closed:
            return self.start_year <= year <= self.end_year
        return self.start_year <= year < self.end_year

    def to_dict(self):
        return {
            "label": self.label, "start_year": self.start_year,
            "end_year": self.end_year, "closed": self.closed,
            "tokens": self.tokens, "train_budget": self.train_budget,
            "val_budget": self.val_budget, "test_budget": self.test_budget,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["start_year"], data["end_year"], Budgets(
            data["train_budget"], data["val_budget"], data["test_budget"]
        ), closed=data["closed"], tokens=data.get("tokens", 0))

    def __repr__(self):
        return "TimeSlice(%s, tokens=%d)" % (self.label, self.tokens)


class Shortfall(Record):
    """One slice's unmet budget: label, needed, available, shortfall."""


class Infeasibility(object):
    """
    The result of planning or splitting when budgets cannot be met.  It is
    returned as a value, never raised, so callers can print every
    shortfall at once.
    """
    def __init__(self, shortfalls, reason="insufficient tokens"):
        self.shortfalls = list(shortfalls)
        self.reason = reason

    def labels(self):
        return [ item.label for item in self.shortfalls ]

    def __bool__(self):
        return bool(self.shortfalls)

    def __str__(self):
        return "%s: %s" % (self.reason, "; ".join(
            "%s needs %d tokens, has %d (short %d)" % (
                item.label, item.needed, item.available, item.shortfall
            ) for item in self.shortfalls
        ))

    def to_dict(self):
        return {
            "reason": self.reason,
            "shortfalls": [ dict(item) for item in self.shortfalls ],
        }

    def __repr__(self):
        return "Infeasibility(%s)" % self


class SlicePlan(object):
    """
    The slices of a corpus range and the assignment of documents to them.
    The plan keeps each document's budget token count so that slices can
    be split without the store.
    """
    def __init__(self, slices, assignment, doc_tokens, year_range,
            infeasibility=None):
        self.slices = list(slices)
        self.assignment = dict(assignment)
        self.doc_tokens = dict(doc_tokens)
        self.year_range = tuple(year_range)
        self.infeasibility = infeasibility

    @property
    def feasible(self):
        return not self.infeasibility

    def labels(self):
        return [ slc.label for slc in self.slices ]

    def get(self, label):
        for slc in self.slices:
            if slc.label == label:
                return slc
        return None

    def documents(self, label):
        """Returns the sorted ids of documents assigned to a slice."""

        return sorted(
            doc_id for doc_id, lbl in self.assignment.items()
            if lbl == label
        )

    def slice_of(self, year):
        for slc in self.slices:
            if slc.contains(year):
                return slc
        return None

    def boundaries(self):
        """The exclusive end boundaries of every slice but the last."""

        return [ slc.end_year for slc in self.slices[:-1] ]

    def to_dict(self):
        return {
            "year_range": list(self.year_range),
            "slices": [ slc.to_dict() for slc in self.slices ],
            "assignment": self.assignment,
            "doc_tokens": self.doc_tokens,
            "infeasibility": self.infeasibility.to_dict()
                if self.infeasibility else None,
        }

    @classmethod
    def from_dict(cls, data):
        infeasibility = None
        if data.get("infeasibility"):
            infeasibility = Infeasibility(
                [ Shortfall(item)
                    for item in data["infeasibility"]["shortfalls"] ],
                data["infeasibility"]["reason"]
            )

        return cls(
            [ TimeSlice.from_dict(item) for item in data["slices"] ],
            data["assignment"], data["doc_tokens"], data["year_range"],
            infeasibility
        )

    def __repr__(self):
        return "SlicePlan(%s%s)" % (
            ", ".join(self.labels()),
            "" if self.feasible else ", infeasible"
        )


def year_histogram(store, token_counter=whitespace_tokens):
    """Returns ({year: tokens}, {doc id: tokens}) for a store."""

    histogram = {}
    doc_tokens = {}

    for doc in store:
        count = token_counter(doc.text)
        doc_tokens[doc.id] = count
        histogram[doc.year] = histogram.get(doc.year, 0) + count

    return histogram, doc_tokens


def plan_slices(store, n_slices, budgets, year_range=None,
        token_counter=whitespace_tokens):
    """
    Greedy left to right planning of contiguous slices of minimal duration.

    Each slice but the last ends at the smallest year Y at which the tokens
    of years [start, Y] meet its train+val+test budget; the next slice
    starts at Y + 1.  The last slice takes every remaining year.  When a
    budget cannot be met the plan carries an Infeasibility listing the
    shortfall of every slice.

    @param {CorpusStore} store      The ingested corpus.
    @param {int} n_slices           Number of slices, at least one.
    @param {Budgets} budgets        Per-slice token budgets, or a dict.
    @param {tuple} year_range       Inclusive range; the store's by default.
    @param {callable} token_counter text -> token count.

    @return {SlicePlan}
    """
    if n_slices < 1:
        raise CorpusError("n_slices must be at least 1, not %r" % n_slices)
    if not len(store):
        raise CorpusError("Cannot plan slices over an empty store")

    budgets = Budgets.coerce(budgets)
    need = budgets.total()
    first, last = year_range or store.year_range

    histogram, doc_tokens = year_histogram(store, token_counter)
    years = sorted(year for year in histogram if first <= year <= last)

    slices = []
    shortfalls = []
    start = first
    pos = 0

    for index in range(n_slices):
        final = index == n_slices - 1

        if start > last:
            shortfalls.append(Shortfall(
                label="slice-%d" % (index + 1), needed=need, available=0,
                shortfall=need
            ))
            continue

        tokens = 0
        end = None

        if final:
            while pos < len(years):
                tokens += histogram[years[pos]]
                pos += 1
            end = last
        else:
            while pos < len(years):
                tokens += histogram[years[pos]]
                pos += 1
                if tokens >= need:
                    end = years[pos - 1] + 1
                    break

            if end is None:
                # Ran out of years: this slice is short and takes the rest.
                end = last
                final = True

        slc = TimeSlice(start, end, budgets, closed=final, tokens=tokens)
        slices.append(slc)
        debug("Planned slice %s with %d tokens" % (slc.label, tokens))

        if tokens < need:
            shortfalls.append(Shortfall(
                label=slc.label, needed=need, available=tokens,
                shortfall=need - tokens
            ))

        start = last + 1 if final else end

    assignment = {}
    for doc in store:
        for slc in slices:
            if slc.contains(doc.year):
                assignment[doc.id] = slc.label
                break

    infeasibility = Infeasibility(shortfalls) if shortfalls else None
    plan = SlicePlan(slices, assignment, doc_tokens, (first, last),
        infeasibility)

    verbose("Planned %s" % plan)
    return plan


class SplitSet(object):
    """Disjoint train, validation and test document ids of one slice."""

    def __init__(self, label, train, val, test, seed, tokens=None):
        self.label = label
        self.train = list(train)
        self.val = list(val)
        self.test = list(test)
        self.seed = seed
        self.tokens = tokens or {}

    def ids(self, split):
        return getattr(self, split)

    def to_dict(self):
        return {
            "label": self.label, "seed": self.seed, "train": self.train,
            "val": self.val, "test": self.test, "tokens": self.tokens,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["label"], data["train"], data["val"], data["test"],
            data["seed"], data.get("tokens"))

    def __eq__(self, other):
        return isinstance(other, SplitSet) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        return "SplitSet(%s, train=%d, val=%d, test=%d)" % (
            self.label, len(self.train), len(self.val), len(self.test)
        )


def split_slice(plan, label, seed):
    """
    Reserves validation and test documents of a slice.

    The slice's document ids are sorted, shuffled with a Random seeded by
    seed, then assigned whole to test until its budget is met, then to
    validation, and the remainder to train.

    @return {SplitSet|Infeasibility}
    """
    slc = plan.get(label)
    if slc is None:
        raise CorpusError("No slice %r in plan (slices: %s)" % (
            label, ", ".join(plan.labels())
        ))

    ids = plan.documents(label)
    total = sum(plan.doc_tokens[doc_id] for doc_id in ids)
    reserved = slc.val_budget + slc.test_budget

    if total < reserved:
        return Infeasibility([ Shortfall(
            label=label, needed=reserved, available=total,
            shortfall=reserved - total
        ) ], "slice too small for validation and test reservation")

    random.Random(seed).shuffle(ids)

    parts = { "train": [], "val": [], "test": [] }
    tokens = { "train": 0, "val": 0, "test": 0 }
    targets = [ ("test", slc.test_budget), ("val", slc.val_budget) ]

    for doc_id in ids:
        split = "train"
        for name, budget in targets:
            if tokens[name] < budget:
                split = name
                break

        parts[split].append(doc_id)
        tokens[split] += plan.doc_tokens[doc_id]

    split_set = SplitSet(label, parts["train"], parts["val"], parts["test"],
        seed, tokens)

    if tokens["train"] < slc.train_budget:
        debug("Slice %s realises %d of %d train tokens" % (
            label, tokens["train"], slc.train_budget
        ))

    verbose("Split %r" % split_set)
    return split_set
