#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Dating works by prompting a text-generation endpoint, and scoring the
dates against gold years.
"""

import os
import re

from concurrent.futures import ThreadPoolExecutor, as_completed

from libdiachron.output import verbose, debug
from libdiachron.records import Record, iter_jsonl, append_jsonl, \
    read_jsonl, write_csv
from libdiachron.attribution import AttributionError

PROMPT = "When was the work {} by {} written? Answer just with the year."
PLAUSIBLE_RANGE = ( 1000, 2030 )

OK = "ok"
UNPARSEABLE = "unparseable"
FAILED = "failed"

_YEAR_RE = re.compile(r"(?<![\d.])(\d{3,4})(?!\d)")

STANDARD_SETTINGS = ( (1, None), (10, None), (1, 50), (10, 50) )


def prompt_for(title, author):
    return PROMPT.format(title, author)


def extract_year(text, year_range=PLAUSIBLE_RANGE):
    """
    The first standalone 3 or 4 digit integer of text that lies in
    year_range, or None.
    """
    low, high = year_range
    for match in _YEAR_RE.finditer(text or ""):
        year = int(match.group(1))
        if low <= year <= high:
            return year
    return None


def _gold(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple, set)):
        return sorted(int(year) for year in value)
    return [ int(value) ]


class Work(object):
    def __init__(self, id, title, author, gold_years=None):
        # pylint: disable-msg=W0622
        self.id = id
        self.title = title
        self.author = author
        self.gold_years = _gold(gold_years)

    @classmethod
    def from_dict(cls, data):
        data = Record(data)
        gold = data.gold_years if data.gold_years is not None \
            else data.gold_year
        return cls(data.id, data.title, data.author, gold)

    def __repr__(self):
        return "Work(%s, %r by %r)" % (self.id, self.title, self.author)


def load_works(path):
    return [ Work.from_dict(rec) for rec in read_jsonl(path) ]


class DateAttribution(object):
    def __init__(self, work_id, predicted_year, gold_years=None,
            raw_response=None, status=OK, error=None):
        self.work_id = work_id
        self.predicted_year = predicted_year
        self.gold_years = _gold(gold_years)
        self.raw_response = raw_response
        self.status = status
        self.error = error

    @property
    def gold_labeled(self):
        return bool(self.gold_years)

    def difference(self):
        """Distance to the closest gold year, None when either is missing."""

        if self.predicted_year is None or not self.gold_years:
            return None
        return min(abs(self.predicted_year - year)
            for year in self.gold_years)

    def to_dict(self):
        return {
            "work_id": self.work_id, "predicted_year": self.predicted_year,
            "raw_response": self.raw_response, "status": self.status,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data, gold_years=None):
        return cls(data["work_id"], data.get("predicted_year"), gold_years,
            data.get("raw_response"), data.get("status", OK),
            data.get("error"))

    def __repr__(self):
        return "DateAttribution(%s, %r, %s)" % (self.work_id,
            self.predicted_year, self.status)


def parse_response(work, response, year_range=PLAUSIBLE_RANGE):
    year = extract_year(response, year_range)
    return DateAttribution(work.id, year, work.gold_years, response,
        OK if year is not None else UNPARSEABLE)


def load_cache(path):
    """
    Reads an attribution cache; later lines for a work replace earlier
    ones.  Malformed lines, such as one cut short by an interrupted run,
    are ignored.
    """
    cached = {}
    if path is None or not os.path.exists(path):
        return cached

    errors = []
    for _, record in iter_jsonl(path, errors):
        if record.work_id is not None:
            cached[record.work_id] = record
    if errors:
        debug("Ignored %d malformed cache lines in %s" % (len(errors), path))
    return cached


def attribute_dates(works, client, cache_path=None,
        year_range=PLAUSIBLE_RANGE):
    """
    Asks the endpoint for the year of every work, up to client.in_flight
    requests at a time.  Each answer is appended to the cache as it
    arrives; works whose cached status is ok or unparseable are not asked
    again, failed ones are.

    @return {list} DateAttribution per work, in input order.
    """
    works = list(works)
    cached = load_cache(cache_path)
    results = {}
    pending = []

    for work in works:
        record = cached.get(work.id)
        if record is not None and record.status in ( OK, UNPARSEABLE ):
            results[work.id] = DateAttribution.from_dict(record,
                work.gold_years)
        else:
            pending.append(work)

    verbose("Attributing %d works, %d from cache" % (len(pending),
        len(results)))

    def ask(work):
        try:
            response = client.complete(prompt_for(work.title, work.author))
        except AttributionError as ex:
            debug("Dating %s failed: %s" % (work.id, ex))
            return DateAttribution(work.id, None, work.gold_years, None,
                FAILED, str(ex))
        return parse_response(work, response, year_range)

    in_flight = getattr(client, "in_flight", 1)
    with ThreadPoolExecutor(max_workers=in_flight) as pool:
        futures = [ pool.submit(ask, work) for work in pending ]
        for future in as_completed(futures):
            attribution = future.result()
            results[attribution.work_id] = attribution
            if cache_path is not None:
                append_jsonl(cache_path, attribution.to_dict())

    return [ results[work.id] for work in works ]


class AttributionScore(object):
    """Accuracy over the scored items; disqualified items are left out."""

    def __init__(self, tolerance, dq_delta, hits, n_scored, n_disqualified):
        self.tolerance = tolerance
        self.dq_delta = dq_delta
        self.hits = hits
        self.n_scored = n_scored
        self.n_disqualified = n_disqualified

    @property
    def accuracy(self):
        if not self.n_scored:
            return None
        return float(self.hits) / self.n_scored

    @property
    def setting(self):
        if self.dq_delta is None:
            return "+-%d" % self.tolerance
        return "dq%d+-%d" % (self.dq_delta, self.tolerance)

    def __repr__(self):
        return "AttributionScore(%s, %r of %d, %d disqualified)" % (
            self.setting, self.accuracy, self.n_scored, self.n_disqualified
        )


def evaluate_attribution(attributions, tolerance, dq_delta=None):
    """
    A prediction is a hit when within tolerance years of any gold year.
    With dq_delta, predictions further than dq_delta from every gold year
    are disqualified.  Items without a prediction count as misses.

    @raise {AttributionError} When no attribution has a gold year.
    """
    labeled = [ item for item in attributions if item.gold_labeled ]
    if not labeled:
        raise AttributionError("No gold-labeled attributions to evaluate")

    hits = scored = disqualified = 0
    for item in labeled:
        diff = item.difference()
        if dq_delta is not None and diff is not None and diff > dq_delta:
            disqualified += 1
            continue
        scored += 1
        hits += diff is not None and diff <= tolerance

    return AttributionScore(tolerance, dq_delta, hits, scored, disqualified)


def score_table(attributions, settings=STANDARD_SETTINGS):
    """Scores under each (tolerance, dq_delta) setting."""

    return [ evaluate_attribution(attributions, tolerance, dq_delta)
        for tolerance, dq_delta in settings ]


def save_scores(path, scores):
    write_csv(path, ( "model", "slice", "metric", "value" ), [
        ( "attribution", "all", "accuracy:%s" % score.setting,
            score.accuracy )
        for score in scores
    ])
