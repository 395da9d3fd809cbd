#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The pipeline configuration: one JSON document whose sections feed the
stages.  Missing keys take the defaults below.  Relative paths in the
document are relative to the directory holding it.
"""

import copy
import os
import re

from libdiachron.output import debug
from libdiachron.records import json, read_json, write_json, \
    RecordFormatError
from libdiachron.model import ModelConfig
from libdiachron.training import TrainConfig
from libdiachron.discovery import AGGREGATES
from libdiachron.tokenizer import SPECIALS
from libdiachron.pipeline import ConfigError

DEFAULTS = {
    "output_dir": "diachron-out",
    "seed": 0,
    "corpus": {
        "paths": [],
        "schema": {},
        "range": [ 1750, 1940 ],
    },
    "slices": {
        "n_slices": 3,
        "budgets": { "train": 10000000, "val": 500000, "test": 500000 },
    },
    "tokenizer": {
        "vocab_size": 16000,
        "byte_fallback": True,
        "min_frequency": 2,
    },
    "model": ModelConfig().to_dict(),
    "student": {},
    "train": TrainConfig().to_dict(),
    "evaluation": {
        "cloze_inventory": None,
        "minimal_pairs": None,
        "k": 100,
        "beam_width": None,
        "max_word_tokens": None,
        "tail_fraction": 0.10,
        "frequency_range": [ 1.0, 1000.0 ],
        "min_count": 2,
        "stride": None,
        "normalize_pairs": False,
    },
    "discovery": {
        "baseline": None,
        "min_occurrences": 5,
        "top_n": 50,
        "epsilon": 0.0,
        "aggregate": "mean",
        "use_raw": False,
        "max_sentences": 2000,
        "words": [],
        "tasks": [],
    },
    "attribution": {
        "works": None,
        "authority": None,
        "catalog": None,
        "endpoint": {},
        "pass1_threshold": 0.25,
        "pass2_threshold": 0.10,
        "plausible_range": [ 1000, 2030 ],
    },
}

SECTIONS = tuple(sorted(DEFAULTS))


def get_config_dir(environ=None):
    """The diachron configuration directory, $DIACHRON_CONFIG_DIR."""

    environ = os.environ if environ is None else environ
    configdir = environ.get("DIACHRON_CONFIG_DIR",
        os.path.join(environ.get("HOME", "~"), ".diachron"))
    debug("Config dir = %s" % configdir)
    return configdir


def get_config_file(name, environ=None):
    """
    Resolves a configuration file name.  DIACHRON_<NAME>, with every
    non-alphanumeric character of the name replaced by an underscore,
    overrides it.  Otherwise a relative name missing from the working
    directory is looked up in the configuration directory.
    """
    environ = os.environ if environ is None else environ
    envname = re.sub(r"[^0-9A-Z]", "_",
        "DIACHRON_%s" % os.path.basename(name).upper())

    val = environ.get(envname)
    if val:
        debug("Environment: %s=%s" % (envname, val))
        return val

    if os.path.isabs(name) or os.path.exists(name):
        return name

    return os.path.join(get_config_dir(environ), name)


def _merge(defaults, data):
    merged = copy.deepcopy(defaults)
    for key, val in data.items():
        if isinstance(val, dict) and isinstance(merged.get(key), dict) \
                and key not in ( "schema", "endpoint" ):
            merged[key] = _merge(merged[key], val)
        else:
            merged[key] = copy.deepcopy(val)
    return merged


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class PipelineConfig(object):
    """
    A validated view over the configuration document.

    @param {dict} data          The document; missing keys take defaults.
    @param {str} base_dir       Directory relative paths are resolved in.
    """
    def __init__(self, data=None, base_dir="."):
        self.raw = copy.deepcopy(data or {})
        self.data = _merge(DEFAULTS, self.raw)
        self.base_dir = base_dir

    def __getitem__(self, section):
        return self.data[section]

    def section(self, name):
        return copy.deepcopy(self.data[name])

    def resolve(self, path):
        if path is None:
            return None
        return os.path.normpath(os.path.join(self.base_dir,
            os.path.expanduser(path)))

    @property
    def seed(self):
        return self.data["seed"]

    @property
    def output_dir(self):
        return self.resolve(self.data["output_dir"])

    def corpus_paths(self):
        return [ self.resolve(path) for path in self.data["corpus"]["paths"] ]

    def year_range(self):
        return tuple(self.data["corpus"]["range"])

    def model_config(self, vocab_size, seed=0):
        return ModelConfig.from_dict(dict(self.data["model"],
            vocab_size=vocab_size, seed=seed))

    def student_config(self, vocab_size, seed=0):
        data = dict(self.data["model"])
        data.update(self.data["student"])
        return ModelConfig.from_dict(dict(data, vocab_size=vocab_size,
            seed=seed))

    def train_config(self, seed=0):
        return TrainConfig.from_dict(dict(self.data["train"], seed=seed))

    def evaluation_path(self, name):
        return self.resolve(self.data["evaluation"][name])

    def attribution_path(self, name):
        return self.resolve(self.data["attribution"][name])

    def diagnostics(self):
        """Returns every (field path, message) problem of the document."""

        out = []

        for key in self.raw:
            if key not in DEFAULTS:
                out.append(( key, "unknown section" ))

        malformed = [ name for name in SECTIONS
            if isinstance(DEFAULTS[name], dict)
            and not isinstance(self.data[name], dict) ]
        for name in malformed:
            out.append(( name, "must be an object, not %r" % (
                self.data[name],) ))
        if malformed:
            return out

        if not _is_int(self.seed):
            out.append(( "seed", "must be an integer" ))
        if not isinstance(self.data["output_dir"], str) or \
                not self.data["output_dir"]:
            out.append(( "output_dir", "must be a non-empty path" ))

        out.extend(self._corpus_diagnostics())
        out.extend(self._slice_diagnostics())
        out.extend(self._model_diagnostics())
        out.extend(self._evaluation_diagnostics())
        out.extend(self._discovery_diagnostics())
        out.extend(self._attribution_diagnostics())
        return out

    def _corpus_diagnostics(self):
        corpus = self.data["corpus"]
        paths = corpus["paths"]
        if not isinstance(paths, list) or not paths:
            yield ( "corpus.paths", "must list at least one file or "
                "directory" )
        else:
            for index, path in enumerate(paths):
                if not os.path.exists(self.resolve(path)):
                    yield ( "corpus.paths[%d]" % index, "%s does not exist" %
                        path )

        if not isinstance(corpus["schema"], dict):
            yield ( "corpus.schema", "must map field names to record keys" )

        years = corpus["range"]
        if not isinstance(years, list) or len(years) != 2 or \
                not all(_is_int(year) for year in years):
            yield ( "corpus.range", "must be [first, last] integer years" )
        elif years[0] > years[1]:
            yield ( "corpus.range", "first year %d is after last year %d" %
                tuple(years) )

    def _slice_diagnostics(self):
        slices = self.data["slices"]
        if not _is_int(slices["n_slices"]) or slices["n_slices"] < 1:
            yield ( "slices.n_slices", "must be an integer of at least 1, "
                "not %r" % (slices["n_slices"],) )

        budgets = slices["budgets"]
        for split in ( "train", "val", "test" ):
            value = budgets.get(split) if isinstance(budgets, dict) else None
            if not _is_int(value) or value < 0:
                yield ( "slices.budgets.%s" % split, "must be a non-negative "
                    "integer, not %r" % (value,) )

    def _model_diagnostics(self):
        tokenizer = self.data["tokenizer"]
        vocab_size = tokenizer["vocab_size"]
        floor = len(SPECIALS) + (256 if tokenizer["byte_fallback"] else 1)
        if not _is_int(vocab_size) or vocab_size <= floor:
            yield ( "tokenizer.vocab_size", "must be an integer above %d, "
                "not %r" % (floor, vocab_size) )
            vocab_size = floor + 1

        try:
            for message in self.model_config(vocab_size).errors():
                yield ( "model", message )
            for message in self.student_config(vocab_size).errors():
                yield ( "student", message )
        except TypeError as ex:
            yield ( "model", str(ex) )

        for message in self.train_config().errors():
            yield ( "train.%s" % message.split(" ", 1)[0], message )

    def _evaluation_diagnostics(self):
        section = self.data["evaluation"]
        for name in ( "cloze_inventory", "minimal_pairs" ):
            path = section[name]
            if path is not None and not os.path.exists(self.resolve(path)):
                yield ( "evaluation.%s" % name, "%s does not exist" % path )

        k = section["k"]
        if not _is_int(k) or k < 1:
            yield ( "evaluation.k", "must be an integer of at least 1" )
        beam = section["beam_width"]
        if beam is not None and (not _is_int(beam) or
                (_is_int(k) and beam < k)):
            yield ( "evaluation.beam_width", "must be an integer no smaller "
                "than k" )

        tail = section["tail_fraction"]
        if not _is_number(tail) or not 0 < tail <= 1:
            yield ( "evaluation.tail_fraction", "must lie in (0, 1]" )

        low_high = section["frequency_range"]
        if not isinstance(low_high, list) or len(low_high) != 2 or \
                not all(_is_number(val) for val in low_high) or \
                low_high[0] > low_high[1]:
            yield ( "evaluation.frequency_range", "must be [low, high] "
                "with low <= high" )

        stride = section["stride"]
        if stride is not None and (not _is_int(stride) or stride < 1):
            yield ( "evaluation.stride", "must be a positive integer" )

    def _discovery_diagnostics(self):
        section = self.data["discovery"]
        baseline = section["baseline"]
        if baseline is not None and not isinstance(baseline, str):
            yield ( "discovery.baseline", "must be a slice label" )
        if not _is_int(section["min_occurrences"]) or \
                section["min_occurrences"] < 1:
            yield ( "discovery.min_occurrences", "must be at least 1" )
        if not _is_int(section["top_n"]) or section["top_n"] < 1:
            yield ( "discovery.top_n", "must be at least 1" )
        if not _is_number(section["epsilon"]) or section["epsilon"] < 0:
            yield ( "discovery.epsilon", "must be non-negative" )
        if section["aggregate"] not in AGGREGATES:
            yield ( "discovery.aggregate", "must be one of %s" %
                ", ".join(AGGREGATES) )

    def _attribution_diagnostics(self):
        section = self.data["attribution"]
        for name in ( "works", "authority", "catalog" ):
            path = section[name]
            if path is not None and not os.path.exists(self.resolve(path)):
                yield ( "attribution.%s" % name, "%s does not exist" % path )

        pass1, pass2 = section["pass1_threshold"], section["pass2_threshold"]
        if not _is_number(pass1) or not 0 <= pass1 <= 1:
            yield ( "attribution.pass1_threshold", "must lie in [0, 1]" )
        if not _is_number(pass2) or not 0 <= pass2 <= 1:
            yield ( "attribution.pass2_threshold", "must lie in [0, 1]" )
        elif _is_number(pass1) and pass2 > pass1:
            yield ( "attribution.pass2_threshold", "must not exceed "
                "pass1_threshold" )

    def validate(self):
        diagnostics = self.diagnostics()
        if diagnostics:
            raise ConfigError(diagnostics)
        return self

    def to_dict(self):
        return copy.deepcopy(self.data)

    @classmethod
    def from_dict(cls, data, base_dir="."):
        return cls(data, base_dir)

    def save(self, path):
        write_json(path, self.to_dict())

    def __eq__(self, other):
        return isinstance(other, PipelineConfig) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        return "PipelineConfig(%s)" % self.base_dir


def load_config(name, environ=None):
    """
    Reads and validates a configuration file.

    @raise {ConfigError} When the file is missing, does not parse or
                         fails validation.
    """
    path = get_config_file(name, environ)
    if not os.path.exists(path):
        raise ConfigError([ ( "config", "%s does not exist" % path ) ])

    try:
        data = read_json(path)
    except (IOError, ValueError, RecordFormatError) as ex:
        raise ConfigError([ ( "config", "%s does not parse: %s" % (
            path, ex) ) ])

    if not isinstance(data, dict):
        raise ConfigError([ ( "config", "%s is not a JSON object" % path ) ])

    config = PipelineConfig(data, os.path.dirname(os.path.abspath(path)))
    return config.validate()


def dumps(config):
    return json.dumps(config.to_dict(), sort_keys=True, indent=1)
