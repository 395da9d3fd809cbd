#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Author names and life dates, as found in catalogs and authority files.

A catalog heading such as "Twain, Mark (1835-1910)" and an authority
label such as "Mark Twain, b.1835 d.1910" both reduce to the canonical
name "mark twain" with birth 1835 and death 1910.
"""

import re

from unidecode import unidecode

from libdiachron.records import Record, read_jsonl
from libdiachron.attribution import AttributionError

SOURCES = ( "authority", "catalog" )

_LIFESPAN_RE = re.compile(
    r"\(?\s*(?:b\.\s*)?(\d{3,4})\??\s*[-–—]\s*(?:d\.\s*)?"
    r"(\d{3,4})?\??\s*\)?"
)
_BORN_RE = re.compile(r"\b(?:b\.|born)\s*(\d{3,4})", re.I)
_DIED_RE = re.compile(r"\b(?:d\.|died)\s*(\d{3,4})", re.I)
_TITLES = frozenset([ "sir", "mr", "mrs", "miss", "dr", "rev", "lady",
    "lord", "jr", "sr" ])


def split_dates(text):
    """
    Removes life dates from a name.

    @return {tuple} (remaining text, birth year, death year); years are
                    None when absent.
    """
    birth = death = None

    match = _BORN_RE.search(text)
    if match:
        birth = int(match.group(1))
        text = text[:match.start()] + text[match.end():]

    match = _DIED_RE.search(text)
    if match:
        death = int(match.group(1))
        text = text[:match.start()] + text[match.end():]

    match = _LIFESPAN_RE.search(text)
    if match:
        birth = int(match.group(1))
        if match.group(2):
            death = int(match.group(2))
        text = text[:match.start()] + text[match.end():]

    return text, birth, death


def canonical_name(text):
    """
    Lower-cased, ASCII-folded "first last" form of a name, with life
    dates, titles and punctuation removed.
    """
    text, _, _ = split_dates(unidecode(text or ""))
    text = text.strip().strip(",;").strip()

    if "," in text:
        last, first = text.split(",", 1)
        text = "%s %s" % (first, last)

    text = re.sub(r"[^\w\s]", " ", text.lower())
    parts = [ part for part in text.split() if part not in _TITLES ]
    return " ".join(parts)


class AuthorRecord(object):
    def __init__(self, id, name, birth_year=None, death_year=None,
            source="catalog"):
        # pylint: disable-msg=W0622
        if source not in SOURCES:
            raise AttributionError("Unknown author source %r" % source)
        if birth_year is not None and death_year is not None \
                and birth_year >= death_year:
            raise AttributionError("Author %s born %d after death %d" % (
                id, birth_year, death_year
            ))

        self.id = id
        self.name = name
        self.birth_year = birth_year
        self.death_year = death_year
        self.source = source
        self.canonical = canonical_name(name)

    @classmethod
    def parse(cls, id, text, source="catalog"):
        """Builds a record from a name that may embed its life dates."""
        # pylint: disable-msg=W0622
        _, birth, death = split_dates(unidecode(text))
        return cls(id, text, birth, death, source)

    @classmethod
    def from_dict(cls, data, source="catalog"):
        data = Record(data)
        if data.birth_year is None and data.death_year is None:
            return cls.parse(data.id, data.name, source)
        return cls(data.id, data.name, data.birth_year, data.death_year,
            source)

    def __repr__(self):
        return "AuthorRecord(%s, %r, %r-%r)" % (self.id, self.canonical,
            self.birth_year, self.death_year)


def load_authors(path, source):
    return [ AuthorRecord.from_dict(rec, source) for rec in read_jsonl(path) ]
