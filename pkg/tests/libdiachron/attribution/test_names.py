#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import unittest

from libdiachron.attribution import AttributionError
from libdiachron.attribution.names import (
    AuthorRecord, split_dates, canonical_name
)


class TestSplitDates(unittest.TestCase):
    def test_catalog_heading(self):
        text, birth, death = split_dates(u"Twain, Mark (1835-1910)")
        self.assertEqual(u"Twain, Mark", text.strip())
        self.assertEqual((1835, 1910), (birth, death))

    def test_authority_label(self):
        text, birth, death = split_dates(u"Mark Twain, b.1835 d.1910")
        self.assertEqual(u"Mark Twain,", text.strip())
        self.assertEqual((1835, 1910), (birth, death))

    def test_open_lifespan(self):
        _, birth, death = split_dates(u"Hardy, Thomas, 1840-")
        self.assertEqual((1840, None), (birth, death))

    def test_no_dates(self):
        self.assertEqual((u"Jane Austen", None, None),
            split_dates(u"Jane Austen"))


class TestCanonicalName(unittest.TestCase):
    def test_forms_agree(self):
        self.assertEqual("mark twain",
            canonical_name(u"Twain, Mark (1835-1910)"))
        self.assertEqual("mark twain",
            canonical_name(u"Mark Twain, b.1835 d.1910"))
        self.assertEqual("charles dickens",
            canonical_name(u"Dickens, Charles, 1812-1870"))

    def test_titles_and_accents(self):
        self.assertEqual("walter scott", canonical_name(u"Sir Walter Scott"))
        self.assertEqual("charlotte bronte",
            canonical_name(u"Brontë, Charlotte"))
        self.assertEqual("", canonical_name(None))


class TestAuthorRecord(unittest.TestCase):
    def test_parse(self):
        author = AuthorRecord.parse("q1", u"Mark Twain, b.1835 d.1910",
            "authority")
        self.assertEqual((1835, 1910), (author.birth_year,
            author.death_year))
        self.assertEqual("mark twain", author.canonical)

    def test_from_dict(self):
        author = AuthorRecord.from_dict({ "id": "c1", "name": u"Twain, Mark",
            "birth_year": 1835 })
        self.assertEqual((1835, None), (author.birth_year,
            author.death_year))

        author = AuthorRecord.from_dict({ "id": "c2",
            "name": u"Twain, Mark (1835-1910)" })
        self.assertEqual(1910, author.death_year)

    def test_invalid(self):
        self.assertRaises(AttributionError, AuthorRecord, "a", u"x",
            1900, 1850)
        self.assertRaises(AttributionError, AuthorRecord, "a", u"x",
            source="wiki")


if __name__ == "__main__":
    unittest.main()
