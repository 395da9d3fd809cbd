#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Record objects and the readers and writers for the structured files the
pipeline exchanges: JSON lines, JSON documents and labeled CSV reports.
"""

import csv, io, os

try:
    import simplejson as json
except ImportError: # pragma: no cover
    import json

from libdiachron.output import debug


class RecordFormatError(Exception):
    """Raised when a structured file cannot be parsed."""

    def __init__(self, path, lineno, reason):
        self.path = path
        self.lineno = lineno
        self.reason = reason

        super(RecordFormatError, self).__init__(
            "Malformed record: %s(%d): %s" % (path, lineno, reason)
        )


class Record(dict):
    """
    Defines the Record adapter that provides attribute access to a
    structured record dictionary.  Missing attributes read as None.
    """
    __setattr__ = dict.__setitem__

    def __getattr__(self, key):
        if key.startswith("__"):
            raise AttributeError(key)
        return self.get(key)

    def __repr__(self):
        return "Record(%s)" % dict.__repr__(self)


def iter_jsonl(path, errors=None):
    """
    Yields (line number, Record) for each record of a JSON lines file.
    Blank lines are skipped.

    @param {str} path       The file to read.
    @param {list} errors    When given, malformed lines are appended to it
                            as (lineno, reason) tuples instead of raising
                            RecordFormatError.
    """
    with io.open(path, "r", encoding="utf8") as fd:
        for lineno, line in enumerate(fd, 1):
            line = line.strip()
            if not line:
                continue

            try:
                obj = json.loads(line)
            except ValueError as ex:
                if errors is None:
                    raise RecordFormatError(path, lineno, str(ex))
                debug("Malformed line %s(%d): %s" % (path, lineno, ex))
                errors.append((lineno, str(ex)))
                continue

            if not isinstance(obj, dict):
                if errors is None:
                    raise RecordFormatError(path, lineno, "not an object")
                errors.append((lineno, "not an object"))
                continue

            yield lineno, Record(obj)


def read_jsonl(path):
    """Returns every record of a JSON lines file as a list."""

    return [ rec for _, rec in iter_jsonl(path) ]


def write_jsonl(path, records):
    """Writes records to path, one canonical JSON object per line."""

    _makedirs_for(path)
    with io.open(path, "w", encoding="utf8") as fd:
        for rec in records:
            fd.write(json.dumps(rec, sort_keys=True, ensure_ascii=False))
            fd.write(u"\n")


def append_jsonl(path, record):
    """
    Appends a single record to a JSON lines file and flushes it.  A last
    line left without its newline by an interrupted writer is closed
    first.
    """
    _makedirs_for(path)
    partial = False
    if os.path.exists(path) and os.path.getsize(path) > 0:
        with io.open(path, "rb") as fd:
            fd.seek(-1, os.SEEK_END)
            partial = fd.read(1) != b"\n"

    with io.open(path, "a", encoding="utf8") as fd:
        if partial:
            fd.write(u"\n")
        fd.write(json.dumps(record, sort_keys=True, ensure_ascii=False))
        fd.write(u"\n")
        fd.flush()


def read_json(path):
    """Reads a JSON document."""

    with io.open(path, "r", encoding="utf8") as fd:
        try:
            return json.load(fd)
        except ValueError as ex:
            raise RecordFormatError(path, 0, str(ex))


def write_json(path, obj):
    """Writes a JSON document with sorted keys, so that it hashes stably."""

    _makedirs_for(path)
    with io.open(path, "w", encoding="utf8") as fd:
        fd.write(json.dumps(obj, sort_keys=True, indent=1,
            ensure_ascii=False))
        fd.write(u"\n")


def write_csv(path, header, rows):
    """
    Writes a CSV file with a header row.  Floats are written with repr
    precision so that reports are bitwise reproducible.
    """
    _makedirs_for(path)
    with io.open(path, "w", encoding="utf8", newline="") as fd:
        writer = csv.writer(fd, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([ _cell(val) for val in row ])


def read_csv(path):
    """Reads a CSV file written by write_csv into a list of Records."""

    with io.open(path, "r", encoding="utf8", newline="") as fd:
        return [ Record(row) for row in csv.DictReader(fd) ]


def _cell(val):
    if val is None:
        return ""
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(float(val))
    return val


def _makedirs_for(path):
    dirname = os.path.dirname(path)
    if dirname and not os.path.isdir(dirname):
        os.makedirs(dirname)
