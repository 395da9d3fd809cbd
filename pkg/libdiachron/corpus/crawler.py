#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Crawler module which finds corpus record files beneath the paths given
to ingest.
"""

import os

from libdiachron.output import debug

RECORD_EXTENSIONS = ( ".jsonl", ".ndjson" )


def os_walk_wrapper(path):
    """
    The os.walk function doesn't yield anything if passed a file.  This
    wrapper simply yields the file as if the directory had been provided
    as the path.
    """
    if os.path.isdir(path):
        for dirpath, dirs, files in os.walk(path):
            dirs.sort()
            yield (dirpath, dirs, sorted(files))

    elif os.path.exists(path):
        dirpart, filepart = os.path.split(path)
        yield (dirpart, [], [filepart])


def crawl(paths, extensions=RECORD_EXTENSIONS):
    """
    Yields record files in a stable order.  A path naming a file is
    yielded whatever its extension; files found by walking a directory
    must carry one of the record extensions.

    @param {list} paths        Files and directories to crawl.
    @param {tuple} extensions  Extensions of files picked up from walks.
    """
    for path in paths:
        if os.path.isfile(path):
            yield path
            continue

        for dirpath, _, files in os_walk_wrapper(path):
            for filename in files:
                if not filename.endswith(extensions):
                    debug("Skipping non-record file: %s" % filename)
                    continue

                yield os.path.join(dirpath, filename)
