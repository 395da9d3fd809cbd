#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Stage manifests and the rules deciding whether a stage must run.

A manifest records the hash of everything a stage read (its config
sections and input files), the hash of every file it wrote and how long
it took.  A stage is up to date when its manifest exists, the input hash
is unchanged and every recorded output is still on disk with the
recorded hash.

The decision is summarised rsync style in an 11 character change string:

    >s+++++++++   first run
    >sc........   inputs changed
    >s.o.......   outputs missing or modified
    >s..f......   forced
    .s.........   up to date
"""

import os
import time

from dateutil.tz import tzutc
from datetime import datetime

from libdiachron import __version__
from libdiachron.output import debug
from libdiachron.records import read_json, write_json, RecordFormatError
from libdiachron.hashlib import sha256_file, sha256_json

NOCHANGE = 0x0000
CREATE = 0x0001
UPDATE = 0x0002

BLANK = "..........."


def manifest_name(stage, label=None):
    return "%s@%s.json" % (stage, label) if label else "%s.json" % stage


def inputs_hash(stage, label, sections, files):
    """
    @param {dict} sections  Config sections the stage reads.
    @param {dict} files     Name to hash of every input file.
    """
    return sha256_json({
        "stage": stage, "slice": label, "config": sections, "files": files,
        "version": __version__,
    })


class Manifest(object):
    def __init__(self, stage, label, inputs_hash, outputs, duration=0.0,
            finished=None):
        # pylint: disable-msg=W0621
        self.stage = stage
        self.label = label
        self.inputs_hash = inputs_hash
        self.outputs = dict(outputs)
        self.duration = duration
        self.finished = finished

    @classmethod
    def record(cls, stage, label, inputs_hash, root, paths, started):
        """Hashes the written outputs, relative to root."""
        # pylint: disable-msg=W0621
        outputs = {}
        for path in paths:
            outputs[os.path.relpath(path, root)] = sha256_file(path)

        return cls(stage, label, inputs_hash, outputs,
            round(time.time() - started, 3),
            datetime.now(tzutc()).isoformat())

    def to_dict(self):
        return {
            "stage": self.stage, "slice": self.label,
            "inputs_hash": self.inputs_hash, "outputs": self.outputs,
            "duration": self.duration, "finished": self.finished,
            "version": __version__,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["stage"], data.get("slice"), data["inputs_hash"],
            data.get("outputs", {}), data.get("duration", 0.0),
            data.get("finished"))

    def save(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        if not os.path.exists(path):
            return None
        try:
            return cls.from_dict(read_json(path))
        except (KeyError, TypeError, ValueError, RecordFormatError) as ex:
            debug("Ignoring unreadable manifest %s: %s" % (path, ex))
            return None

    def __repr__(self):
        return "Manifest(%s%s, %d outputs)" % (self.stage,
            "@%s" % self.label if self.label else "", len(self.outputs))


class ManifestRules(object):
    """Compares a stage's current inputs against its last manifest."""

    def __init__(self, manifest, inputs_hash, root, force=False):
        # pylint: disable-msg=W0621
        self.manifest = manifest
        self.inputs_hash = inputs_hash
        self.root = root
        self.force = force
        self.changes = bytearray(BLANK, "ascii")
        self.action = NOCHANGE

    @debug.function
    def skip_inputs(self):
        """Skip when the inputs hash is unchanged"""

        if self.manifest.inputs_hash != self.inputs_hash:
            self.changes[2] = ord("c")
            return False
        return True

    @debug.function
    def skip_outputs(self):
        """Skip when every recorded output is intact"""

        for name, digest in self.manifest.outputs.items():
            path = os.path.join(self.root, name)
            if not os.path.exists(path) or sha256_file(path) != digest:
                self.changes[3] = ord("o")
                return False
        return True

    def apply(self):
        """
        Returns ( {bitmask} action, {str} changes ).  The action is
        NOCHANGE when the stage is up to date.
        """
        self.action = NOCHANGE

        if self.manifest is None:
            self.changes = bytearray("s+++++++++", "ascii")
            self.changes.insert(0, ord(">"))
            self.action |= CREATE
        else:
            self.changes = bytearray(BLANK, "ascii")
            self.changes[1] = ord("s")

            inputs = self.skip_inputs()
            outputs = self.skip_outputs()
            if self.force:
                self.changes[4] = ord("f")

            if self.force or not (inputs and outputs):
                self.action |= UPDATE
                self.changes[0] = ord(">")

        return self.action, self.changes.decode("ascii")
