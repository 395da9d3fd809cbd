#!/usr/bin/env python
# -*- coding: utf8 -*-

# Copyright (C) 2026 The diachron authors.  All rights reserved.

import io, os, shutil, tempfile, unittest

from libdiachron.records import write_json
from libdiachron.pipeline import ConfigError
from libdiachron.pipeline.config import (
    PipelineConfig, get_config_dir, get_config_file, load_config, dumps
)


class TestConfigFiles(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def test_config_dir(self):
        self.assertEqual(self.tempdir, get_config_dir({
            "DIACHRON_CONFIG_DIR": self.tempdir }))
        self.assertEqual(os.path.join("/home/someone", ".diachron"),
            get_config_dir({ "HOME": "/home/someone" }))

    def test_environment_override(self):
        self.assertEqual("/elsewhere/run.json", get_config_file(
            "diachron.json", { "DIACHRON_DIACHRON_JSON": "/elsewhere/run.json" }
        ))

    def test_lookup_in_config_dir(self):
        name = "diachron_unittest_absent.json"
        self.assertEqual(os.path.join(self.tempdir, name), get_config_file(
            name, { "DIACHRON_CONFIG_DIR": self.tempdir }))

        path = os.path.join(self.tempdir, "run.json")
        self.assertEqual(path, get_config_file(path, {}))

    def test_missing(self):
        path = os.path.join(self.tempdir, "absent.json")
        self.assertRaises(ConfigError, load_config, path, {})

    def test_does_not_parse(self):
        path = os.path.join(self.tempdir, "broken.json")
        with io.open(path, "w", encoding="utf8") as fd:
            fd.write(u"{ not json")
        self.assertRaises(ConfigError, load_config, path, {})

        write_json(path, [ 1, 2 ])
        self.assertRaises(ConfigError, load_config, path, {})

    def test_relative_paths(self):
        os.makedirs(os.path.join(self.tempdir, "corpus"))
        path = os.path.join(self.tempdir, "diachron.json")
        write_json(path, { "output_dir": "out",
            "corpus": { "paths": [ "corpus" ] } })

        config = load_config(path, {})

        self.assertEqual(os.path.join(self.tempdir, "out"), config.output_dir)
        self.assertEqual([ os.path.join(self.tempdir, "corpus") ],
            config.corpus_paths())

    def test_invalid_file_lists_every_problem(self):
        path = os.path.join(self.tempdir, "diachron.json")
        write_json(path, { "seed": "one", "corpus": { "paths": [] } })

        try:
            load_config(path, {})
        except ConfigError as ex:
            fields = [ field for field, _ in ex.diagnostics ]
            self.assertEqual([ "seed", "corpus.paths" ], fields)
            self.assertTrue("corpus.paths" in str(ex))
        else:
            self.fail("ConfigError not raised")


class TestPipelineConfig(unittest.TestCase):
    def setUp(self):
        self.tempdir = tempfile.mkdtemp(prefix="diachron_unittest_")

    def tearDown(self):
        shutil.rmtree(self.tempdir)

    def _config(self, **sections):
        data = { "corpus": { "paths": [ "." ] } }
        data.update(sections)
        return PipelineConfig(data, self.tempdir)

    def test_defaults_are_valid(self):
        config = self._config()
        self.assertEqual([], config.diagnostics())
        self.assertTrue(config.validate() is config)
        self.assertEqual((1750, 1940), config.year_range())

    def test_sections_merge_with_defaults(self):
        config = self._config(slices={ "budgets": { "train": 10 } })

        self.assertEqual(3, config["slices"]["n_slices"])
        self.assertEqual(500000, config["slices"]["budgets"]["val"])
        self.assertEqual(10, config["slices"]["budgets"]["train"])

    def test_schema_replaces_defaults(self):
        config = self._config(corpus={ "paths": [ "." ],
            "schema": { "text": "body" } })
        self.assertEqual({ "text": "body" }, config["corpus"]["schema"])

    def test_model_configs(self):
        config = self._config(model={ "n_layers": 2 },
            student={ "n_layers": 1 })

        self.assertEqual(2, config.model_config(500, 3).n_layers)
        self.assertEqual(500, config.model_config(500, 3).vocab_size)
        self.assertEqual(3, config.model_config(500, 3).seed)
        self.assertEqual(1, config.student_config(500).n_layers)
        self.assertEqual(7, config.train_config(7).seed)

    def test_diagnostics(self):
        config = self._config(
            extra={},
            corpus={ "paths": [ "absent" ], "range": [ 1900, 1800 ] },
            slices={ "n_slices": 0, "budgets": { "val": -1 } },
            tokenizer={ "vocab_size": 100 },
            model={ "d_model": 30 },
            evaluation={ "k": 10, "beam_width": 5, "tail_fraction": 0 },
            discovery={ "aggregate": "mode" },
            attribution={ "pass2_threshold": 0.5 },
        )

        fields = [ field for field, _ in config.diagnostics() ]
        for field in ( "extra", "corpus.paths[0]", "corpus.range",
                "slices.n_slices", "slices.budgets.val",
                "tokenizer.vocab_size", "model", "evaluation.beam_width",
                "evaluation.tail_fraction", "discovery.aggregate",
                "attribution.pass2_threshold" ):
            self.assertTrue(field in fields, field)

        self.assertRaises(ConfigError, config.validate)

    def test_wrongly_typed_train_fields(self):
        config = self._config(train={ "distillation_alpha": "0.5",
            "epochs": 2.5, "grad_clip": "yes" })

        fields = [ field for field, _ in config.diagnostics() ]
        self.assertEqual([ "train.distillation_alpha", "train.epochs",
            "train.grad_clip" ], fields)
        self.assertRaises(ConfigError, config.validate)

    def test_section_that_is_not_an_object(self):
        config = self._config(slices=5, train=[ 1 ])

        self.assertEqual([ "slices", "train" ],
            [ field for field, _ in config.diagnostics() ])
        self.assertRaises(ConfigError, config.validate)

    def test_round_trip(self):
        config = self._config(seed=5)
        path = os.path.join(self.tempdir, "saved.json")
        config.save(path)

        self.assertEqual(config, load_config(path, {}))
        self.assertTrue('"seed": 5' in dumps(config))


if __name__ == "__main__":
    unittest.main()
