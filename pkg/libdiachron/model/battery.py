#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
A battery is the ordered set of per-slice models, each paired with the
tokenizer of its slice.  On disk it is one directory per slice label:

    <root>/<label>/tokenizer.json
    <root>/<label>/<kind>.safetensors
"""

import os

from libdiachron.output import verbose
from libdiachron.tokenizer import BpeTokenizer
from libdiachron.model.checkpoint import load_checkpoint


class Member(object):
    def __init__(self, label, model, tokenizer):
        self.label = label
        self.model = model
        self.tokenizer = tokenizer

    def __iter__(self):
        return iter((self.label, self.model, self.tokenizer))

    def __repr__(self):
        return "Member(%s)" % self.label


class Battery(object):
    """Per-slice models in slice order, keyed by slice label."""

    def __init__(self, members=()):
        self.members = []
        for member in members:
            if not isinstance(member, Member):
                member = Member(*member)
            self.members.append(member)

    def labels(self):
        return [ member.label for member in self.members ]

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, label):
        return label in self.labels()

    def __getitem__(self, label):
        for member in self.members:
            if member.label == label:
                return member
        raise KeyError(label)

    @classmethod
    def load(cls, root, labels, kind="student"):
        members = []
        for label in labels:
            directory = os.path.join(root, label)
            tokenizer = BpeTokenizer.load(
                os.path.join(directory, "tokenizer.json")
            )
            model = load_checkpoint(
                os.path.join(directory, "%s.safetensors" % kind),
                tokenizer.digest()
            )
            members.append(Member(label, model, tokenizer))

        verbose("Loaded %s battery: %s" % (kind, ", ".join(labels)))
        return cls(members)

    def __repr__(self):
        return "Battery(%s)" % ", ".join(self.labels())
