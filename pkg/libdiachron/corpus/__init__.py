#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The corpus module: dated documents, the immutable corpus store and the
ingest operation that validates records into it.
"""

import datetime, os

from dateutil import parser as dateparser

from libdiachron.output import verbose, debug
from libdiachron.records import (
    Record, RecordFormatError, iter_jsonl, write_jsonl, write_json,
    read_jsonl
)
from libdiachron.corpus.crawler import crawl

DEFAULT_RANGE = ( 1750, 1940 )

DOCUMENT_FIELDS = ( "id", "title", "author", "year", "text" )


class CorpusError(Exception):
    """Raised for corpus inputs that cannot be read at all."""

    def __init__(self, message):
        super(CorpusError, self).__init__(message)


class UnreadableFileError(CorpusError):
    """Raised when a corpus path does not exist or cannot be opened."""

    def __init__(self, path, reason="no such file or directory"):
        self.path = path
        super(UnreadableFileError, self).__init__(
            "Unreadable corpus file: %s: %s" % (path, reason)
        )


class Document(object):
    """A dated text.  Instances are treated as immutable."""

    def __init__(self, id, year, text, title=None, author=None):
        # pylint: disable-msg=W0622
        self.id = id
        self.year = year
        self.text = text
        self.title = title
        self.author = author

    def to_dict(self):
        return {
            "id": self.id, "title": self.title, "author": self.author,
            "year": self.year, "text": self.text,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["id"], int(data["year"]), data["text"],
            title=data.get("title"), author=data.get("author"))

    def __eq__(self, other):
        return isinstance(other, Document) and \
            self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.id, self.year))

    def __repr__(self):
        return "Document(id=%r, year=%d, title=%r)" % (
            self.id, self.year, self.title
        )


class CorpusStore(object):
    """
    An ordered, immutable collection of documents keyed by id.  The order
    is the order in which documents were ingested.
    """
    def __init__(self, documents=(), year_range=DEFAULT_RANGE):
        self._docs = {}
        self._order = []
        self.year_range = tuple(year_range)

        for doc in documents:
            if doc.id in self._docs:
                raise CorpusError("Duplicate document id: %r" % doc.id)
            self._docs[doc.id] = doc
            self._order.append(doc.id)

    def __len__(self):
        return len(self._order)

    def __iter__(self):
        for doc_id in self._order:
            yield self._docs[doc_id]

    def __contains__(self, doc_id):
        return doc_id in self._docs

    def __getitem__(self, doc_id):
        return self._docs[doc_id]

    def get(self, doc_id, default=None):
        return self._docs.get(doc_id, default)

    def ids(self):
        return list(self._order)

    def texts(self, ids):
        """Returns the texts of the given documents, in the given order."""

        return [ self._docs[doc_id].text for doc_id in ids ]

    def save(self, path):
        write_jsonl(path, [ doc.to_dict() for doc in self ])

    @classmethod
    def load(cls, path, year_range=DEFAULT_RANGE):
        return cls(
            [ Document.from_dict(rec) for rec in read_jsonl(path) ],
            year_range
        )

    def __repr__(self):
        return "CorpusStore(%d documents, range=%d-%d)" % (
            len(self), self.year_range[0], self.year_range[1]
        )


class RejectionReport(object):
    """The records ingest refused, each with a reason."""

    def __init__(self):
        self.entries = []

    def add(self, path, lineno, reason, doc_id=None):
        debug("Rejected %s(%d): %s" % (path, lineno, reason))
        self.entries.append(Record(
            path=path, line=lineno, id=doc_id, reason=reason
        ))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def reasons(self):
        """Returns a map of reason to the number of rejections."""

        counts = {}
        for entry in self.entries:
            key = entry.reason.split(":")[0]
            counts[key] = counts.get(key, 0) + 1
        return counts

    def to_dict(self):
        return {
            "rejected": len(self.entries),
            "entries": [ dict(entry) for entry in self.entries ],
        }

    def save(self, path):
        write_json(path, self.to_dict())

    def __repr__(self):
        return "RejectionReport(%d entries)" % len(self.entries)


def parse_year(value):
    """
    Returns the calendar year of a record's date field.  Integers and
    integral floats are taken as years, strings of digits likewise, and
    any other string is parsed as a date with dateutil.

    @raise {ValueError} When no year can be derived.
    """
    if value is None or isinstance(value, bool):
        raise ValueError("missing year")

    if isinstance(value, int):
        return value

    if isinstance(value, float):
        if value != int(value):
            raise ValueError("non-integral year %r" % value)
        return int(value)

    value = str(value).strip()
    if not value:
        raise ValueError("missing year")

    if value.lstrip("-").isdigit():
        return int(value)

    try:
        return dateparser.parse(
            value, default=datetime.datetime(1, 1, 1)
        ).year
    except (ValueError, OverflowError):
        raise ValueError("unparseable year %r" % value)


def _apply_schema(record, schema):
    if not schema:
        return record

    mapped = Record()
    for field in DOCUMENT_FIELDS:
        mapped[field] = record.get(schema.get(field, field))
    return mapped


def ingest(paths, schema=None, year_range=DEFAULT_RANGE):
    """
    Reads newline-delimited corpus records into a CorpusStore.

    Records that fail validation are collected into the rejection report
    rather than dropped: malformed lines, missing ids or duplicates,
    missing or unparseable years, years outside the inclusive range and
    empty texts.

    @param {list} paths         Record files, or directories to crawl.
    @param {dict} schema        Maps document field names to record keys,
                                e.g. {"year": "date"}.  Unmapped fields
                                keep their own name.
    @param {tuple} year_range   Inclusive (first, last) calendar years.

    @return {tuple} (CorpusStore, RejectionReport)
    @raise {UnreadableFileError} When a path does not exist.
    """
    first, last = year_range
    report = RejectionReport()
    documents = []
    seen = set()

    for path in paths:
        if not os.path.exists(path):
            raise UnreadableFileError(path)

    for path in crawl(paths):
        verbose("Ingesting %s" % path)
        errors = []

        try:
            records = list(iter_jsonl(path, errors))
        except (IOError, OSError, UnicodeDecodeError) as ex:
            raise UnreadableFileError(path, str(ex))

        for lineno, reason in errors:
            report.add(path, lineno, "malformed: %s" % reason)

        for lineno, record in records:
            record = _apply_schema(record, schema)
            doc_id = record.id

            if doc_id is None or str(doc_id) == "":
                report.add(path, lineno, "missing id")
                continue

            doc_id = str(doc_id)

            if doc_id in seen:
                report.add(path, lineno, "duplicate id", doc_id)
                continue

            try:
                year = parse_year(record.year)
            except ValueError as ex:
                report.add(path, lineno, "bad year: %s" % ex, doc_id)
                continue

            if year < first or year > last:
                report.add(path, lineno, "year out of range: %d" % year,
                    doc_id)
                continue

            text = record.text
            if not isinstance(text, str) or not text.strip():
                report.add(path, lineno, "empty text", doc_id)
                continue

            seen.add(doc_id)
            documents.append(Document(doc_id, year, text,
                title=record.title, author=record.author))

    verbose("Ingested %d documents, rejected %d records" % (
        len(documents), len(report)
    ))

    return CorpusStore(documents, year_range), report


def whitespace_tokens(text):
    """The budget token counter: whitespace-delimited tokens."""

    return len(text.split())
