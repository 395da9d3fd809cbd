#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Checkpoint I/O.  A checkpoint is a safetensors file: named tensors with
dtype, shape and little-endian data, and a __metadata__ string map with
the model config, the tokenizer digest, training metadata and a format
version.  See docs/FORMATS.rst.
"""

import os, warnings

from safetensors import safe_open
from safetensors.torch import save_file

from libdiachron.output import debug, verbose
from libdiachron.records import json
from libdiachron.model import CheckpointError, ModelConfig

FORMAT = "diachron-checkpoint/1"


class TokenizerMismatchWarning(UserWarning):
    """A checkpoint was loaded against a different tokenizer."""


class Checkpoint(object):
    """
    Named tensors of a model together with its config, the digest of its
    tokenizer and free-form training metadata (epoch, step, val_loss).
    """
    def __init__(self, config, tensors, tokenizer_hash=None, metadata=None):
        self.config = config
        self.tensors = tensors
        self.tokenizer_hash = tokenizer_hash
        self.metadata = dict(metadata or {})
        self.path = "<memory>"

    @classmethod
    def from_model(cls, model, tokenizer_hash=None, metadata=None):
        tensors = dict(
            (name, tensor.detach().clone().contiguous())
            for name, tensor in model.state_dict().items()
        )
        return cls(model.config, tensors, tokenizer_hash, metadata)

    @property
    def val_loss(self):
        return self.metadata.get("val_loss")

    def model(self):
        """Builds a model holding this checkpoint's parameters."""

        from libdiachron.model.transformer import CausalLM

        model = CausalLM(self.config)
        expected = model.state_dict()

        missing = sorted(set(expected) - set(self.tensors))
        unexpected = sorted(set(self.tensors) - set(expected))
        if missing or unexpected:
            raise CheckpointError(self.path,
                "tensor names do not match the config (missing %s, "
                "unexpected %s)" % (missing, unexpected))

        for name, tensor in self.tensors.items():
            if tuple(tensor.shape) != tuple(expected[name].shape):
                raise CheckpointError(self.path,
                    "shape mismatch for %s: %s != %s" % (
                        name, tuple(tensor.shape),
                        tuple(expected[name].shape)
                    ))

        model.load_state_dict(self.tensors)
        model.eval()
        return model

    def save(self, path):
        dirname = os.path.dirname(path)
        if dirname and not os.path.isdir(dirname):
            os.makedirs(dirname)

        save_file(self.tensors, path, metadata={
            "format": FORMAT,
            "config": json.dumps(self.config.to_dict(), sort_keys=True),
            "tokenizer_hash": self.tokenizer_hash or "",
            "metadata": json.dumps(self.metadata, sort_keys=True),
        })
        debug("Saved checkpoint %s" % path)

    @classmethod
    def load(cls, path, tokenizer_hash=None):
        """
        Reads a checkpoint.  When tokenizer_hash is given and differs from
        the stored digest a TokenizerMismatchWarning is issued.

        @raise {CheckpointError} For missing, truncated or foreign files.
        """
        if not os.path.isfile(path):
            raise CheckpointError(path, "no such file")

        try:
            with safe_open(path, framework="pt") as fd:
                header = fd.metadata() or {}
                tensors = dict(
                    (name, fd.get_tensor(name)) for name in fd.keys()
                )
        except Exception as ex: # pylint: disable-msg=W0703
            raise CheckpointError(path, "%s: %s" % (
                ex.__class__.__name__, ex
            ))

        if header.get("format") != FORMAT:
            raise CheckpointError(path, "unsupported format %r" % (
                header.get("format"),
            ))

        try:
            config = ModelConfig.from_dict(json.loads(header["config"]))
            metadata = json.loads(header.get("metadata") or "{}")
        except (KeyError, TypeError, ValueError) as ex:
            raise CheckpointError(path, "bad metadata: %s" % ex)

        stored_hash = header.get("tokenizer_hash") or None
        if tokenizer_hash is not None and stored_hash != tokenizer_hash:
            message = "Checkpoint %s was trained with tokenizer %s, " \
                "not %s" % (path, stored_hash, tokenizer_hash)
            debug(message)
            warnings.warn(message, TokenizerMismatchWarning)

        checkpoint = cls(config, tensors, stored_hash, metadata)
        checkpoint.path = path
        return checkpoint

    def __repr__(self):
        return "Checkpoint(%r, %s)" % (self.config, self.metadata)


def save_checkpoint(model, path, tokenizer_hash=None, metadata=None):
    """Writes a model to path and returns the Checkpoint written."""

    checkpoint = Checkpoint.from_model(model, tokenizer_hash, metadata)
    checkpoint.save(path)
    verbose("Wrote checkpoint %s" % path)
    return checkpoint


def load_checkpoint(path, tokenizer_hash=None):
    """Reads a checkpoint and returns the model it holds, in eval mode."""

    return Checkpoint.load(path, tokenizer_hash).model()
