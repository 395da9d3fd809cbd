#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The diachron command: runs pipeline stages against a configuration,
validates configurations, decodes prefixes and generates synthetic
fixtures.
"""

import csv
import errno
import io
import os
import sys
import time

from contextlib import contextmanager

from libdiachron.output import verbose, debug, itemize, critical
from libdiachron.options import DiachronOptions
from libdiachron.records import write_csv
from libdiachron.hashlib import sha256_file
from libdiachron.decoding import decode_prefixes
from libdiachron.pipeline import STAGES, ConfigError, PipelineLockedError
from libdiachron.pipeline import MissingArtifactError
from libdiachron.pipeline.config import load_config
from libdiachron.pipeline.manifest import Manifest, ManifestRules, \
    NOCHANGE, manifest_name, inputs_hash
from libdiachron.pipeline.stages import Workspace, get_stage, STUDENT, \
    TEACHERS

DECODE_HEADER = ( "model", "prefix_id", "rank", "word", "score" )

KINDS = { "student": STUDENT, "teacher": TEACHERS[0][0] }


def _pid_alive(pid):
    try:
        os.kill(pid, 0)
    except OSError as ex:
        return ex.errno == errno.EPERM
    return True


@contextmanager
def lock(path):
    """
    Holds path as an exclusive lock file containing our pid.

    @raise {PipelineLockedError} When the file exists; stale is set when
                                 its pid is no longer running.
    """
    dirname = os.path.dirname(path)
    if dirname and not os.path.isdir(dirname):
        os.makedirs(dirname)

    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY, 0o644)
    except OSError as ex:
        if ex.errno != errno.EEXIST:
            raise

        pid = None
        try:
            with open(path) as held:
                pid = int(held.read().strip() or 0) or None
        except (IOError, ValueError):
            pass
        raise PipelineLockedError(path, pid,
            stale=pid is not None and not _pid_alive(pid))

    try:
        os.write(fd, ("%d\n" % os.getpid()).encode("ascii"))
        os.close(fd)
        yield path
    finally:
        os.unlink(path)


class Pipeline(object):
    """
    Runs stages over one output directory, skipping those whose manifest
    is current.

    @param {PipelineConfig} config
    @param {bool} force     Run stages even when up to date.
    @param {str} label      Restrict per-slice stages to this slice.
    """
    def __init__(self, config, force=False, label=None, itemize_changes=False):
        self.config = config
        self.workspace = Workspace(config)
        self.force = force
        self.label = label
        self.itemize_changes = itemize_changes

    def _inputs_hash(self, stage):
        root = self.workspace.root
        files = {}
        for path, _ in stage.requires():
            files[os.path.relpath(path, root)] = sha256_file(path)
        for path in stage.input_files():
            files[os.path.relpath(path, root)] = sha256_file(path)

        sections = dict((name, self.config.section(name))
            for name in stage.sections)
        return inputs_hash(stage.name, stage.label, sections, files)

    def _check_requires(self, stage):
        for path, producer in stage.requires():
            if not os.path.exists(path):
                raise MissingArtifactError(stage.name, producer, path)

    def run_stage(self, name):
        """
        Runs one stage unless its manifest is current.

        @return {str} The change string of the stage, or None when the
                      stage is not configured.
        """
        stage = get_stage(name)(self.workspace, self.label)
        if not stage.configured():
            verbose("Stage %s is not configured, skipping" % name)
            return None

        self._check_requires(stage)
        digest = self._inputs_hash(stage)

        manifest_path = self.workspace.manifest_path(
            manifest_name(stage.name, stage.label))
        rules = ManifestRules(Manifest.load(manifest_path), digest,
            self.workspace.root, self.force)
        action, changes = rules.apply()

        if self.itemize_changes:
            itemize(changes, repr(stage))

        if action == NOCHANGE:
            debug("Stage up to date: %s" % name)
            verbose("%s: up to date" % name)
            return changes

        verbose("%s: running" % name)
        started = time.time()
        outputs = stage.run()

        Manifest.record(stage.name, stage.label, digest,
            self.workspace.root, outputs, started).save(manifest_path)
        verbose("%s: done in %.1fs" % (name, time.time() - started))
        return changes

    def run(self, name):
        """
        Runs a stage, or every stage in order for 'all', holding the
        output directory lock.
        """
        if name != "all" and name not in STAGES:
            raise ConfigError([ ( "stage", "unknown stage %r; expected one "
                "of %s or all" % (name, ", ".join(STAGES)) ) ])

        names = STAGES if name == "all" else ( name, )
        results = []
        with lock(self.workspace.lock_path):
            for stage in names:
                results.append(( stage, self.run_stage(stage) ))
        return results


def decode(config, prefix_file, k=None, beam_width=None, kind="student",
        label=None, output=None):
    """
    Writes (model, prefix id, rank, word, score) rows for every prefix of
    prefix_file under each selected slice model.  Prefix ids count the
    non-empty lines of the file from 0.
    """
    if kind not in KINDS:
        raise ConfigError([ ( "model", "must be one of %s" %
            ", ".join(sorted(KINDS)) ) ])

    section = config["evaluation"]
    k = k or section["k"]
    beam_width = beam_width or section["beam_width"]

    workspace = Workspace(config)
    battery = workspace.load_battery(KINDS[kind], workspace.labels(label))

    with io.open(prefix_file, "r", encoding="utf8") as fd:
        prefixes = [ line.rstrip("\n") for line in fd if line.strip() ]

    rows = []
    for member_label, model, tokenizer in battery:
        for row in decode_prefixes(model, tokenizer, prefixes, k,
                beam_width):
            rows.append(( member_label, ) + tuple(row))

    if output:
        write_csv(output, DECODE_HEADER, rows)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(DECODE_HEADER)
        writer.writerows(( member, pid, rank, word, repr(score) )
            for member, pid, rank, word, score in rows)
    return rows


def _int_option(value):
    return int(value) if value is not None else None


def _channels():
    if DiachronOptions.debug:
        debug.enable()
    if DiachronOptions.verbose:
        verbose.enable()
    if DiachronOptions.quiet:
        verbose.disable()


def main(argv=None):
    """
    Entry point of the diachron command.

    @return {int} 0 on success, 1 on configuration errors and 2 when a
                  stage fails.
    """
    if argv is not None:
        DiachronOptions.parse(argv)

    try:
        _channels()

        if DiachronOptions.synth:
            from libdiachron.pipeline.synthetic import generate
            path = generate(DiachronOptions.directory,
                DiachronOptions.preset, int(DiachronOptions.seed))
            verbose("Wrote synthetic fixture configuration %s" % path)
            return 0

        config = load_config(DiachronOptions.config)

        if DiachronOptions.validate:
            verbose("%s: valid" % DiachronOptions.config)
            return 0

        if DiachronOptions.decode:
            decode(config, DiachronOptions.prefix_file,
                _int_option(DiachronOptions.top_k),
                _int_option(DiachronOptions.beam_width),
                DiachronOptions.model, DiachronOptions.slice,
                DiachronOptions.output)
            return 0

        Pipeline(config, bool(DiachronOptions.force), DiachronOptions.slice,
            bool(DiachronOptions.itemize_changes)).run(DiachronOptions.stage)

    except ConfigError as ex:
        sys.stderr.write(u"diachron: %s\n" % ex)
        return 1

    except KeyboardInterrupt:
        sys.stderr.write(u"diachron: interrupted\n")
        return 2

    except Exception as ex: # pylint: disable-msg=W0703
        critical(ex)
        debug.exception(ex)
        return 2

    return 0
