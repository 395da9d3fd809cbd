#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
The model module: configuration of the small decoder-only causal language
model, its closed-form parameter count and the LanguageModel interface
every scorable model implements.
"""

import torch

from libdiachron.output import debug


class ModelConfigError(Exception):
    """Raised with every shape constraint a configuration violates."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [ errors ]
        self.errors = list(errors)
        super(ModelConfigError, self).__init__(
            "Invalid model configuration: %s" % "; ".join(self.errors)
        )


class CheckpointError(Exception):
    """Raised when a checkpoint cannot be read or does not fit its config."""

    def __init__(self, path, reason):
        self.path = path
        super(CheckpointError, self).__init__(
            "Bad checkpoint %s: %s" % (path, reason)
        )


class SequenceTooLongError(Exception):
    """Raised when a sequence exceeds the model context."""

    def __init__(self, length, context_length):
        self.length = length
        self.context_length = context_length
        super(SequenceTooLongError, self).__init__(
            "Sequence of %d tokens exceeds the context length %d; score "
            "it with sliding windows" % (length, context_length)
        )


class ScoringError(Exception):
    """Raised when there is nothing to score."""

    def __init__(self, message):
        super(ScoringError, self).__init__(message)


class ModelConfig(object):
    """
    Shape and seed of a causal language model.  Positions are always
    rotary; normalization is RMS pre-normalization.
    """
    FIELDS = ( "n_layers", "n_heads", "n_kv_heads", "d_model", "d_ff",
        "vocab_size", "context_length", "seed", "rope_theta", "norm_eps" )

    def __init__(self, n_layers=4, n_heads=4, n_kv_heads=2, d_model=128,
            d_ff=352, vocab_size=4096, context_length=512, seed=0,
            rope_theta=10000.0, norm_eps=1e-5, positional="rotary"):
        self.n_layers = n_layers
        self.n_heads = n_heads
        self.n_kv_heads = n_kv_heads
        self.d_model = d_model
        self.d_ff = d_ff
        self.vocab_size = vocab_size
        self.context_length = context_length
        self.seed = seed
        self.rope_theta = rope_theta
        self.norm_eps = norm_eps
        self.positional = positional

    @property
    def head_dim(self):
        return self.d_model // self.n_heads

    @property
    def kv_dim(self):
        return self.n_kv_heads * self.head_dim

    def errors(self):
        """Returns every violated constraint as a message."""

        errors = []
        for name in ( "n_layers", "n_heads", "n_kv_heads", "d_model",
                "d_ff", "vocab_size" ):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                errors.append("%s must be a positive integer, not %r" % (
                    name, value
                ))

        if errors:
            return errors

        if self.d_model % self.n_heads:
            errors.append("d_model %d is not divisible by n_heads %d" % (
                self.d_model, self.n_heads
            ))
        if self.n_heads % self.n_kv_heads:
            errors.append("n_heads %d is not divisible by n_kv_heads %d" % (
                self.n_heads, self.n_kv_heads
            ))
        if (self.d_model // self.n_heads) % 2:
            errors.append("head dimension %d must be even for rotary "
                "positions" % (self.d_model // self.n_heads))
        if not isinstance(self.context_length, int) or \
                self.context_length < 2:
            errors.append("context_length must be at least 2, not %r" % (
                self.context_length,
            ))
        if self.positional != "rotary":
            errors.append("positional scheme must be 'rotary', not %r" % (
                self.positional,
            ))

        return errors

    def validate(self):
        errors = self.errors()
        if errors:
            raise ModelConfigError(errors)
        return self

    def replace(self, **kwargs):
        data = self.to_dict()
        data.update(kwargs)
        return ModelConfig.from_dict(data)

    def to_dict(self):
        return dict((name, getattr(self, name)) for name in self.FIELDS)

    @classmethod
    def from_dict(cls, data):
        return cls(**dict(
            (key, val) for key, val in data.items()
            if key in cls.FIELDS or key == "positional"
        ))

    def __eq__(self, other):
        return isinstance(other, ModelConfig) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        return "ModelConfig(%s)" % ", ".join(
            "%s=%r" % (name, getattr(self, name)) for name in self.FIELDS
        )


def full_scale_config(seed=0):
    """The 32 layer, 15 head, 5 KV head, 960/2560 wide, 16k vocab shape."""

    return ModelConfig(n_layers=32, n_heads=15, n_kv_heads=5, d_model=960,
        d_ff=2560, vocab_size=16000, context_length=512, seed=seed)


def count_parameters(config):
    """
    Closed-form parameter count: token embedding, per layer the query,
    key, value and output projections, the gated feed-forward and two
    norms, then the final norm and an untied output head.
    """
    d = config.d_model
    per_layer = 2 * d * d + 2 * d * config.kv_dim + 3 * d * config.d_ff + \
        2 * d
    return 2 * config.vocab_size * d + config.n_layers * per_layer + d


class LanguageModel(torch.nn.Module):
    """
    Interface of every scorable model: forward() maps a (batch, length)
    LongTensor of token ids to (batch, length, vocab) next-token logits.
    """
    def __init__(self, config):
        super(LanguageModel, self).__init__()
        self.config = config

    @property
    def vocab_size(self):
        return self.config.vocab_size

    @property
    def context_length(self):
        return self.config.context_length

    def num_parameters(self):
        return sum(param.numel() for param in self.parameters())

    def check_length(self, length):
        if length > self.context_length:
            raise SequenceTooLongError(length, self.context_length)


def init_model(config):
    """
    Builds a freshly initialised causal LM.  Initialisation draws from a
    generator seeded with config.seed, so equal configs give equal models.
    """
    from libdiachron.model.transformer import CausalLM

    config.validate()
    model = CausalLM(config)
    debug("Initialised %r with %d parameters" % (
        config, model.num_parameters()
    ))
    return model
