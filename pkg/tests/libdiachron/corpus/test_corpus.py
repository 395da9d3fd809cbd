#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import io, os, shutil, tempfile, unittest

from libdiachron.records import write_jsonl
from libdiachron.corpus import (
    Document, CorpusStore, CorpusError, UnreadableFileError, ingest,
    parse_year, whitespace_tokens
)
from libdiachron.corpus.crawler import crawl


class TestCaseTempDir(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def path(self, *parts):
        return os.path.join(self.tempdir, *parts)


class TestParseYear(unittest.TestCase):
    def test_integer(self):
        self.assertEqual(1850, parse_year(1850))

    def test_integral_float(self):
        self.assertEqual(1850, parse_year(1850.0))

    def test_fractional_float(self):
        self.assertRaises(ValueError, parse_year, 1850.5)

    def test_digit_string(self):
        self.assertEqual(1799, parse_year(" 1799 "))

    def test_date_string(self):
        self.assertEqual(1812, parse_year("1812-06-18"))
        self.assertEqual(1812, parse_year("June 18, 1812"))

    def test_missing(self):
        self.assertRaises(ValueError, parse_year, None)
        self.assertRaises(ValueError, parse_year, "")
        self.assertRaises(ValueError, parse_year, True)

    def test_unparseable(self):
        self.assertRaises(ValueError, parse_year, "sometime")


class TestCorpusStore(unittest.TestCase):
    def test_duplicate_ids(self):
        docs = [ Document("a", 1800, "x"), Document("a", 1801, "y") ]
        self.assertRaises(CorpusError, CorpusStore, docs)

    def test_order_and_lookup(self):
        store = CorpusStore([ Document("b", 1800, "one two"),
            Document("a", 1801, "three") ])

        self.assertEqual([ "b", "a" ], store.ids())
        self.assertEqual([ "three", "one two" ], store.texts([ "a", "b" ]))
        self.assertTrue("a" in store)
        self.assertIsNone(store.get("c"))


class TestIngest(TestCaseTempDir):
    def write_records(self, name, records, raw=()):
        path = self.path(name)
        write_jsonl(path, records)
        if raw:
            with io.open(path, "a", encoding="utf8") as fd:
                for line in raw:
                    fd.write(u"%s\n" % line)
        return path

    def test_missing_path(self):
        self.assertRaises(UnreadableFileError, ingest,
            [ self.path("nowhere.jsonl") ])

    def test_rejections(self):
        path = self.write_records("corpus.jsonl", [
            { "id": "ok", "year": 1800, "text": "some words here" },
            { "id": "ok", "year": 1801, "text": "duplicate" },
            { "year": 1800, "text": "no id" },
            { "id": "early", "year": 1700, "text": "too early" },
            { "id": "undated", "year": "whenever", "text": "bad year" },
            { "id": "blank", "year": 1800, "text": "   " },
        ], raw=[ "{not json" ])

        store, report = ingest([ path ], year_range=(1750, 1940))

        self.assertEqual([ "ok" ], store.ids())
        self.assertEqual(6, len(report))
        reasons = report.reasons()
        self.assertEqual(1, reasons["duplicate id"])
        self.assertEqual(1, reasons["missing id"])
        self.assertEqual(1, reasons["year out of range"])
        self.assertEqual(1, reasons["bad year"])
        self.assertEqual(1, reasons["empty text"])
        self.assertEqual(1, reasons["malformed"])

    def test_schema_mapping(self):
        path = self.write_records("mapped.jsonl", [
            { "doc": "d1", "date": "1820-01-01", "body": "hello there" },
        ])

        store, report = ingest([ path ], { "id": "doc", "year": "date",
            "text": "body" })

        self.assertEqual(0, len(report))
        self.assertEqual(1820, store["d1"].year)
        self.assertEqual("hello there", store["d1"].text)

    def test_store_round_trip(self):
        path = self.write_records("corpus.jsonl", [
            { "id": "a", "year": 1800, "text": "alpha", "title": "A" },
        ])
        store, _ = ingest([ path ])
        store.save(self.path("store.jsonl"))

        loaded = CorpusStore.load(self.path("store.jsonl"))
        self.assertEqual(list(store), list(loaded))


class TestCrawl(TestCaseTempDir):
    def test_directory_walk_filters_extensions(self):
        os.makedirs(self.path("sub"))
        for name in ( "b.jsonl", "a.ndjson", "notes.txt", "sub/c.jsonl" ):
            with open(self.path(name), "w") as fd:
                fd.write("")

        found = [ os.path.relpath(path, self.tempdir)
            for path in crawl([ self.tempdir ]) ]
        self.assertEqual([ "a.ndjson", "b.jsonl",
            os.path.join("sub", "c.jsonl") ], found)

    def test_named_file_is_always_yielded(self):
        path = self.path("notes.txt")
        with open(path, "w") as fd:
            fd.write("")
        self.assertEqual([ path ], list(crawl([ path ])))


class TestWhitespaceTokens(unittest.TestCase):
    def test_count(self):
        self.assertEqual(3, whitespace_tokens(" one\ttwo\n three "))
        self.assertEqual(0, whitespace_tokens(""))


if __name__ == "__main__":
    unittest.main()
