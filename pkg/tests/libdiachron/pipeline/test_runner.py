#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import io, os, shutil, sys, tempfile, unittest

from libdiachron.records import write_json, write_jsonl, append_jsonl
from libdiachron.options import DiachronOptions
from libdiachron.pipeline import (
    ConfigError, MissingArtifactError, PipelineLockedError, main
)
from libdiachron.pipeline.config import PipelineConfig
from libdiachron.pipeline.runner import Pipeline, lock, decode

DOCUMENTS = [
    { "id": "d1", "year": 1849, "text": u"the cat sat on the mat" },
    { "id": "d2", "year": 1899, "text": u"the dog ran to the gate" },
    { "id": "d3", "year": 1910, "text": u"the car drove down the road" },
]

DATA = {
    "output_dir": "out",
    "corpus": { "paths": [ "corpus.jsonl" ], "range": [ 1800, 1949 ] },
    "slices": { "n_slices": 3,
        "budgets": { "train": 4, "val": 1, "test": 1 } },
}


class TestLock(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")
        self.path = os.path.join(self.tempdir, "out", ".lock")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_held_and_released(self):
        with lock(self.path):
            with io.open(self.path, "r") as fd:
                self.assertEqual(os.getpid(), int(fd.read()))

            try:
                with lock(self.path):
                    self.fail("Lock taken twice")
            except PipelineLockedError as ex:
                self.assertEqual(os.getpid(), ex.pid)
                self.assertFalse(ex.stale)

        self.assertFalse(os.path.exists(self.path))

    def test_released_on_error(self):
        try:
            with lock(self.path):
                raise KeyError("boom")
        except KeyError:
            pass
        self.assertFalse(os.path.exists(self.path))

    def test_stale(self):
        os.makedirs(os.path.dirname(self.path))
        with io.open(self.path, "w") as fd:
            fd.write(u"999999999\n")

        try:
            with lock(self.path):
                self.fail("Stale lock taken")
        except PipelineLockedError as ex:
            self.assertTrue(ex.stale)
            self.assertTrue("Stale" in str(ex))
        self.assertTrue(os.path.exists(self.path))


class TestPipeline(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")
        self.corpus = os.path.join(self.tempdir, "corpus.jsonl")
        write_jsonl(self.corpus, DOCUMENTS)
        self.config = PipelineConfig(DATA, self.tempdir).validate()

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_unknown_stage(self):
        self.assertRaises(ConfigError, Pipeline(self.config).run, "bogus")

    def test_missing_artifact(self):
        try:
            Pipeline(self.config).run("slice")
        except MissingArtifactError as ex:
            self.assertEqual("ingest", ex.needed_stage)
        else:
            self.fail("MissingArtifactError not raised")

    def test_unconfigured_stage_is_skipped(self):
        self.assertEqual([ ("eval-pairs", None) ],
            Pipeline(self.config).run("eval-pairs"))

    def test_reruns_only_when_needed(self):
        pipeline = Pipeline(self.config)

        self.assertEqual([ ("ingest", ">s+++++++++") ],
            pipeline.run("ingest"))
        self.assertTrue(os.path.exists(
            pipeline.workspace.manifest_path("ingest.json")))
        self.assertEqual([ ("ingest", ".s.........") ],
            pipeline.run("ingest"))

        append_jsonl(self.corpus, { "id": "d4", "year": 1920,
            "text": u"a plane" })
        self.assertEqual([ ("ingest", ">sc........") ],
            pipeline.run("ingest"))

        os.unlink(pipeline.workspace.path("corpus", "rejections.json"))
        self.assertEqual([ ("ingest", ">s.o.......") ],
            pipeline.run("ingest"))

        self.assertEqual([ ("ingest", ">s..f......") ],
            Pipeline(self.config, force=True).run("ingest"))

    def test_slice_after_ingest(self):
        pipeline = Pipeline(self.config)
        pipeline.run("ingest")
        pipeline.run("slice")

        self.assertEqual([ "1800-1850", "1850-1900", "1900-1949" ],
            pipeline.workspace.load_plan().labels())
        self.assertFalse(os.path.exists(pipeline.workspace.lock_path))

    def test_locked_directory(self):
        pipeline = Pipeline(self.config)
        with lock(pipeline.workspace.lock_path):
            self.assertRaises(PipelineLockedError, pipeline.run, "ingest")

    def test_decode_kind(self):
        prefixes = os.path.join(self.tempdir, "prefixes.txt")
        with io.open(prefixes, "w", encoding="utf8") as fd:
            fd.write(u"the \n")
        self.assertRaises(ConfigError, decode, self.config, prefixes,
            kind="oracle")
        self.assertRaises(MissingArtifactError, decode, self.config,
            prefixes)


class TestMain(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")
        write_jsonl(os.path.join(self.tempdir, "corpus.jsonl"), DOCUMENTS)
        self.config = os.path.join(self.tempdir, "diachron.json")
        write_json(self.config, DATA)

        self.stdout, sys.stdout = sys.stdout, io.StringIO()
        self.stderr, sys.stderr = sys.stderr, io.StringIO()

    def tearDown(self):
        sys.stdout = self.stdout
        sys.stderr = self.stderr
        DiachronOptions.reset()
        shutil.rmtree(self.tempdir)

    def test_validate(self):
        self.assertEqual(0, main([ "validate", "-c", self.config ]))

    def test_invalid_configuration(self):
        write_json(self.config, dict(DATA, seed="x"))
        self.assertEqual(1, main([ "validate", "-c", self.config ]))
        self.assertTrue("seed" in sys.stderr.getvalue())

    def test_mistyped_configuration(self):
        write_json(self.config, dict(DATA, slices=5,
            train={ "distillation_alpha": "0.5" }))
        self.assertEqual(1, main([ "validate", "-c", self.config ]))
        self.assertTrue("slices" in sys.stderr.getvalue())

    def test_missing_configuration(self):
        self.assertEqual(1, main([ "validate", "-c",
            os.path.join(self.tempdir, "absent.json") ]))

    def test_unknown_stage(self):
        self.assertEqual(1, main([ "run", "bogus", "-c", self.config ]))

    def test_stage_failure(self):
        self.assertEqual(2, main([ "run", "slice", "-c", self.config ]))
        self.assertTrue("run ingest" in sys.stderr.getvalue())

    def test_run(self):
        self.assertEqual(0, main([ "run", "ingest", "-c", self.config,
            "--itemize-changes" ]))
        self.assertTrue(">s+++++++++ Stage(ingest)" in
            sys.stdout.getvalue())
        self.assertTrue(os.path.exists(os.path.join(self.tempdir, "out",
            "corpus", "store.jsonl")))

    def test_synth(self):
        directory = os.path.join(self.tempdir, "fixture")
        self.assertEqual(0, main([ "synth", directory ]))
        self.assertTrue(os.path.exists(os.path.join(directory,
            "diachron.json")))

    def test_synth_unknown_preset(self):
        self.assertEqual(2, main([ "synth", self.tempdir,
            "--preset=huge" ]))


if __name__ == "__main__":
    unittest.main()
