#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import math, os, shutil, tempfile, unittest

from libdiachron.records import read_csv
from libdiachron.model.battery import Battery
from libdiachron.model.lookup import UniformModel
from libdiachron.evaluation.metrics import ClozeRanking
from libdiachron.discovery import (
    DiscoveryError, Occurrence, TrajectoryRecord, collect_occurrences,
    trajectories, trajectory_candidates, cumulative_divergence,
    save_trajectories, occurrence_trajectories, rank_table
)

LABELS = [ "1800-1850", "1850-1900", "1900-1949" ]
BASELINE = "1900-1949"
SENTENCE = u"the fcue stood by the door"


def _occurrence(number, values):
    normalized = dict(zip(LABELS, values))
    raw = dict((label, 2.0 * value) for label, value in normalized.items())
    return Occurrence("s%d" % number, 1, 4, 8, SENTENCE, raw, normalized)


OCCURRENCES = {
    "fcue": [ _occurrence(0, ( 0.9, 0.5, 0.1 )),
        _occurrence(1, ( 0.7, 0.3, 0.1 )) ],
    "rise": [ _occurrence(2, ( 0.1, 0.5, 0.2 )),
        _occurrence(3, ( 0.1, 0.5, 0.2 )) ],
    "flat": [ _occurrence(4, ( 0.2, 0.2, 0.2 )),
        _occurrence(5, ( 0.2, 0.2, 0.2 )) ],
    "rare": [ _occurrence(6, ( 0.9, 0.5, 0.0 )) ],
}


def _battery():
    return Battery([ (label, None, None) for label in LABELS ])


class _Characters(object):
    """One token per character of "ab "."""

    def encode_offsets(self, text):
        ids = [ 3 + "ab ".index(char) for char in text ]
        return ids, [ (pos, pos + 1) for pos in range(len(text)) ]


class TestTrajectoryRecord(unittest.TestCase):
    def test_strictly_decreasing(self):
        record = TrajectoryRecord("w", LABELS, [ 0.6, 0.2, 0.0 ], 3)
        self.assertTrue(record.monotone_decreasing)
        self.assertAlmostEqual(0.6, record.first_last_change)
        self.assertAlmostEqual(0.8, record.cumulative)

    def test_plateau_needs_slack(self):
        self.assertFalse(TrajectoryRecord("w", LABELS, [ 0.2, 0.2, 0.0 ],
            3).monotone_decreasing)
        self.assertTrue(TrajectoryRecord("w", LABELS, [ 0.2, 0.2, 0.0 ], 3,
            epsilon=0.01).monotone_decreasing)

    def test_cumulative_ignores_negative_deltas(self):
        record = TrajectoryRecord("w", LABELS, [ -0.5, 0.25, 0.0 ], 3)
        self.assertEqual(0.25, record.cumulative)
        self.assertEqual([ "w", 3, False, -0.5, 0.25, -0.5, 0.25, 0.0 ],
            record.row())


class TestTrajectories(unittest.TestCase):
    def test_deltas_against_baseline(self):
        records = dict((record.word, record) for record in trajectories(
            _battery(), BASELINE, OCCURRENCES, min_occurrences=2))

        self.assertEqual(set([ "fcue", "rise", "flat" ]), set(records))
        for got, want in zip(records["fcue"].deltas, [ 0.7, 0.3, 0.0 ]):
            self.assertAlmostEqual(want, got)
        self.assertEqual(0.0, records["fcue"].deltas[-1])

    def test_raw_values(self):
        records = dict((record.word, record) for record in trajectories(
            _battery(), BASELINE, OCCURRENCES, min_occurrences=2,
            use_raw=True))
        self.assertAlmostEqual(1.4, records["fcue"].deltas[0])

    def test_median(self):
        occurrences = { "w": [ _occurrence(0, ( 0.1, 0.0, 0.0 )),
            _occurrence(1, ( 0.2, 0.0, 0.0 )),
            _occurrence(2, ( 0.9, 0.0, 0.0 )) ] }

        median, = trajectories(_battery(), BASELINE, occurrences,
            min_occurrences=1, aggregate="median")
        mean, = trajectories(_battery(), BASELINE, occurrences,
            min_occurrences=1)

        self.assertAlmostEqual(0.2, median.deltas[0])
        self.assertAlmostEqual(0.4, mean.deltas[0])

    def test_bad_requests(self):
        self.assertRaises(DiscoveryError, trajectories, _battery(),
            "1700-1750", OCCURRENCES)
        self.assertRaises(DiscoveryError, trajectories, _battery(), BASELINE,
            OCCURRENCES, aggregate="mode")
        self.assertRaises(DiscoveryError, trajectory_candidates, _battery(),
            "1700-1750", [])


class TestRankings(unittest.TestCase):
    def test_candidates(self):
        records = trajectory_candidates(_battery(), BASELINE, None,
            min_occurrences=2, occurrences=OCCURRENCES)
        self.assertEqual([ "fcue" ], [ record.word for record in records ])

    def test_candidates_with_slack(self):
        records = trajectory_candidates(_battery(), BASELINE, None,
            min_occurrences=2, epsilon=0.5, occurrences=OCCURRENCES)
        self.assertEqual([ "fcue", "flat", "rise" ],
            [ record.word for record in records ])

    def test_top_n(self):
        records = trajectory_candidates(_battery(), BASELINE, None,
            min_occurrences=1, top_n=1, occurrences=OCCURRENCES)
        self.assertEqual([ "rare" ], [ record.word for record in records ])

    def test_cumulative(self):
        records = cumulative_divergence(_battery(), BASELINE, None,
            min_occurrences=2, occurrences=OCCURRENCES)
        self.assertEqual([ "fcue", "rise", "flat" ],
            [ record.word for record in records ])
        self.assertAlmostEqual(1.0, records[0].cumulative)

    def test_rank_table(self):
        rankings = [ ClozeRanking("t1", "1800-1850", 3, 10),
            ClozeRanking("t2", "1800-1850", 0, 10),
            ClozeRanking("t1", "1850-1900", None, 10) ]
        self.assertEqual([ ("1800-1850", 3), ("1850-1900", None) ],
            rank_table(rankings, "t1"))


class TestOccurrences(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_collect(self):
        tokenizer = _Characters()
        battery = Battery([ (label, UniformModel(6, 32), tokenizer)
            for label in LABELS[:2] ])

        occurrences = collect_occurrences(battery, [ u"ab ba ab",
            ("custom", u"ba") ])

        self.assertEqual([ 0, 0 ], [ item.sentence_id
            for item in occurrences["ab"] ])
        self.assertEqual([ 0, "custom" ], [ item.sentence_id
            for item in occurrences["ba"] ])
        item = occurrences["ab"][1]
        self.assertEqual((2, 6, 8), (item.index, item.start, item.end))
        self.assertAlmostEqual(math.log(6), item.raw["1800-1850"])
        self.assertEqual(0.0, item.normalized["1850-1900"])

    def test_table(self):
        table = occurrence_trajectories(_battery(), "FCUE", None,
            occurrences=OCCURRENCES)

        self.assertEqual(2, len(table))
        self.assertIsNone(table.note)
        self.assertEqual([ "sentence_id", "word_index" ] + LABELS +
            [ "context", "sense_label" ], table.header())
        self.assertEqual([ "s0", 1, 0.9, 0.5, 0.1, SENTENCE, "" ],
            table.rows[0])

        path = os.path.join(self.tempdir, "fcue.csv")
        table.save(path)
        self.assertEqual("", read_csv(path)[1].sense_label)

    def test_absent_word(self):
        table = occurrence_trajectories(_battery(), "zzz", None,
            occurrences=OCCURRENCES)
        self.assertEqual(0, len(table))
        self.assertTrue("zzz" in table.note)

    def test_save_trajectories(self):
        path = os.path.join(self.tempdir, "trajectories.csv")
        records = trajectories(_battery(), BASELINE, OCCURRENCES,
            min_occurrences=2)
        save_trajectories(path, records, LABELS)

        rows = read_csv(path)
        self.assertEqual(3, len(rows))
        self.assertEqual("0.0", rows[0]["delta:1900-1949"])


if __name__ == "__main__":
    unittest.main()
