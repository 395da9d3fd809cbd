#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Cloze task construction from a sense-dated inventory.

Inventory records carry a word, a sense id, the sense year, a definition,
example sentences and the word's frequency per million words.  Each
example whose last occurrence of the word starts within the final tail
of the sentence becomes a task whose prefix is the sentence cut right
before that occurrence.
"""

from libdiachron.output import verbose
from libdiachron.records import Record, read_jsonl, write_jsonl
from libdiachron.corpus.vocab import words, word_spans, filter_in_vocab
from libdiachron.evaluation import SkipReport

DEFAULT_TAIL = 0.10
DEFAULT_FREQUENCY_RANGE = ( 1.0, 1000.0 )


def frequency_band(per_million):
    """
    Maps a frequency per million words to the 8 band scheme: 8 above
    1000, 7 from 100, 6 from 10, 5 from 1, 4 from 0.1, 3 from 0.01, 2
    below that, and 1 when the frequency is unknown.
    """
    if per_million is None:
        return 1
    if per_million > 1000:
        return 8
    for band, floor in ( (7, 100), (6, 10), (5, 1), (4, 0.1), (3, 0.01) ):
        if per_million >= floor:
            return band
    return 2


class ClozeTask(object):
    """A prefix ending where the target word begins."""

    def __init__(self, id, prefix, target, sense_year, frequency_per_million,
            definition=None):
        # pylint: disable-msg=W0622
        self.id = id
        self.prefix = prefix
        self.target = target
        self.sense_year = sense_year
        self.frequency_per_million = frequency_per_million
        self.definition = definition

    @property
    def group(self):
        return "band-%d" % frequency_band(self.frequency_per_million)

    def words(self):
        return words(self.prefix) + [ self.target.lower() ]

    def to_dict(self):
        return {
            "id": self.id, "prefix": self.prefix, "target": self.target,
            "sense_year": self.sense_year,
            "frequency_per_million": self.frequency_per_million,
            "definition": self.definition,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["id"], data["prefix"], data["target"],
            int(data["sense_year"]), data.get("frequency_per_million"),
            data.get("definition"))

    def __repr__(self):
        return "ClozeTask(%s, %r -> %r, %d)" % (
            self.id, self.prefix[-30:], self.target, self.sense_year
        )


def save_tasks(path, tasks):
    write_jsonl(path, [ task.to_dict() for task in tasks ])


def load_tasks(path):
    return [ ClozeTask.from_dict(rec) for rec in read_jsonl(path) ]


def _examples(record):
    examples = record.examples
    if examples is None and record.example is not None:
        examples = [ record.example ]
    if isinstance(examples, str):
        examples = [ examples ]
    return [ ex for ex in (examples or []) if isinstance(ex, str) and ex ]


def build_cloze_set(records, vocabularies, tail_fraction=DEFAULT_TAIL,
        frequency_range=DEFAULT_FREQUENCY_RANGE, min_count=2):
    """
    Builds cloze tasks from inventory records.

    Rules are applied in order: the record must have a year, an example
    and a frequency; the target word must occur in the example; its last
    occurrence must start at or after (1 - tail_fraction) of the
    sentence's characters; its frequency must lie in the inclusive
    frequency_range; finally every word of the prefix and the target
    must occur min_count times in every vocabulary.

    @param {list} records        Inventory records (dicts or Records).
    @param {list} vocabularies   WordCounts of every slice's training split.
    @return {tuple} (tasks, SkipReport)
    """
    report = SkipReport()
    low, high = frequency_range
    candidates = []

    for index, record in enumerate(records):
        record = Record(record)
        word = record.word
        ref = "%s/%s" % (word, record.sense_id or index)

        if not word:
            report.add(ref, "missing word")
            continue
        if record.year is None:
            report.add(ref, "missing year")
            continue

        examples = _examples(record)
        if not examples:
            report.add(ref, "missing example")
            continue

        frequency = record.frequency
        if frequency is None:
            report.add(ref, "missing frequency")
            continue

        target = word.lower()
        for number, sentence in enumerate(examples):
            sref = "%s#%d" % (ref, number)
            starts = [ start for w, start, _ in word_spans(sentence)
                if w == target ]

            if not starts:
                report.add(sref, "target absent")
                continue

            start = starts[-1]
            if start < (1.0 - tail_fraction) * len(sentence):
                report.add(sref, "target outside tail")
                continue

            if not low <= float(frequency) <= high:
                report.add(sref, "frequency out of range")
                continue

            prefix = sentence[:start]
            if not prefix.strip():
                report.add(sref, "empty prefix")
                continue

            candidates.append(ClozeTask(sref, prefix,
                sentence[start:start + len(word)], int(record.year),
                float(frequency), record.definition))

    tasks, retention = filter_in_vocab(candidates, vocabularies, min_count)
    kept = set(id(task) for task in tasks)
    for task in candidates:
        if id(task) not in kept:
            report.add(task.id, "out of vocabulary")

    verbose("Built %d cloze tasks, skipped %r" % (len(tasks), report))
    return tasks, report
