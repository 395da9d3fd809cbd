#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
A hashlib wrapper library providing the content hashes used by stage
manifests, tokenizer files and checkpoints.  Every digest is a sha256
hex string.
"""

import hashlib

__all__ = ( "new", "sha256_bytes", "sha256_file", "sha256_json" )

new = getattr(hashlib, "new", lambda x: None) # pylint: disable-msg=C0103

BLOCK_SIZE = 1 << 20


def sha256_bytes(data):
    """Returns the hex digest of a byte string."""

    if isinstance(data, str):
        data = data.encode("utf8")
    return hashlib.sha256(data).hexdigest()


def sha256_file(path):
    """Returns the hex digest of a file's content, read in blocks."""

    digest = hashlib.sha256()
    with open(path, "rb") as fd:
        while True:
            block = fd.read(BLOCK_SIZE)
            if not block:
                break
            digest.update(block)
    return digest.hexdigest()


def canonical_json(obj):
    """Returns the canonical JSON text of obj: sorted keys, no spaces."""

    from libdiachron.records import json
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
        ensure_ascii=True)


def sha256_json(obj):
    """Returns the hex digest of the canonical JSON form of obj."""

    return sha256_bytes(canonical_json(obj))
