#!/usr/bin/env python
# -*- coding: utf8 -*-

"""
Byte-level byte-pair-encoding tokenizer, trained per time slice.

Text is pre-tokenized into chunks: a run of letters, of digits or of
other symbols, each optionally preceded by one space, or a single
whitespace character.  Characters are classed as Unicode, so punctuation
such as an em-dash never joins a word; bytes that are not valid UTF-8
count as letters and come back unchanged.  The leading space is the word
boundary marker; a token whose surface starts with it begins a new word.
Merges never cross chunks, so no token spans a boundary.

Token ids 0, 1 and 2 are the specials <bos>, <eos> and <unk>.  Base
symbols (single bytes) follow in byte order, then one id per merge in
the order merges were learnt.
"""

import heapq, re
from collections import Counter

from libdiachron.output import verbose, debug
from libdiachron.records import read_json, write_json, RecordFormatError
from libdiachron.hashlib import sha256_json

FORMAT = "diachron-bpe/1"

BOS, EOS, UNK = 0, 1, 2
SPECIALS = ( "<bos>", "<eos>", "<unk>" )

BOUNDARY = b" "

_MARKS = u"\u0300-\u036f"
_UNDECODED = u"\udc80-\udcff"

PRETOKEN_RE = re.compile(
    u" ?(?:[^\\W\\d_]|[%s%s])+| ?\\d+| ?(?:[^\\s\\w%s%s]|_)+|\\s" % (
        _MARKS, _UNDECODED, _MARKS, _UNDECODED
    )
)

REPLACEMENT = u"�".encode("utf8")


class TokenizerError(Exception):
    """Raised for invalid tokenizer input or configuration."""

    def __init__(self, message):
        super(TokenizerError, self).__init__(message)


def _surface_text(surface):
    return surface.decode("utf8", errors="surrogateescape")


def is_word_char(char):
    """
    Letters, digits and combining marks are word characters, and so is
    any byte of a surface that does not decode as UTF-8 on its own.
    """
    return char.isalnum() or u"\u0300" <= char <= u"\u036f" or \
        u"\udc80" <= char <= u"\udcff"


def is_word_surface(surface):
    """True for a non-empty byte string of word characters only."""

    text = _surface_text(surface)
    return bool(text) and all(is_word_char(char) for char in text)


def has_word_char(surface):
    return any(is_word_char(char) for char in _surface_text(surface))


def pretokenize(data):
    """Splits a byte string into the chunks merges are confined to."""

    return [ chunk.encode("utf8", errors="surrogateescape")
        for chunk in PRETOKEN_RE.findall(_surface_text(data)) ]


class BpeTokenizer(object):
    """
    An immutable BPE codec.  Construct it with train_bpe() or load().

    @param {list} base       Byte values of the base alphabet.
    @param {list} merges     Ordered (left id, right id) merge rules.
    @param {bool} byte_fallback
                             True when the base alphabet is every byte, so
                             that no text encodes to <unk>.
    """
    def __init__(self, base, merges, byte_fallback=True):
        self.byte_fallback = byte_fallback
        self.base = sorted(set(int(b) for b in base))
        self.merges = [ (int(a), int(b)) for a, b in merges ]

        self.tokens = [ None ] * len(SPECIALS)
        self.tokens.extend(bytes([ b ]) for b in self.base)
        self._byte_ids = dict(
            (b, len(SPECIALS) + i) for i, b in enumerate(self.base)
        )

        self.ranks = {}
        for rank, (left, right) in enumerate(self.merges):
            if left >= len(self.tokens) or right >= len(self.tokens) or \
                    left < len(SPECIALS) or right < len(SPECIALS):
                raise TokenizerError("Merge %d refers to an unknown id: "
                    "(%d, %d)" % (rank, left, right))
            self.ranks[(left, right)] = (rank, len(self.tokens))
            self.tokens.append(self.tokens[left] + self.tokens[right])

        self._cache = {}
        self._initiating = [
            self._surface_initiates(token_id)
            for token_id in range(len(self.tokens))
        ]

    @property
    def vocab_size(self):
        return len(self.tokens)

    bos_id = BOS
    eos_id = EOS
    unk_id = UNK

    def is_special(self, token_id):
        return token_id < len(SPECIALS)

    def token_bytes(self, token_id):
        """Returns the surface bytes of a token; specials have none."""

        self._check_id(token_id)
        return self.tokens[token_id] or b""

    def _check_id(self, token_id):
        if not isinstance(token_id, int) or \
                not 0 <= token_id < len(self.tokens):
            raise TokenizerError("Unknown token id: %r" % (token_id,))

    def _surface_initiates(self, token_id):
        if token_id < len(SPECIALS):
            return False

        surface = self.tokens[token_id]
        if surface.startswith(BOUNDARY):
            return True
        return not has_word_char(surface)

    def is_word_initiating(self, token_id):
        """
        True if the token starts a new word: its surface starts with the
        boundary marker, or it holds no letters or digits at all.  The
        specials are never word-initiating.
        """
        self._check_id(token_id)
        return self._initiating[token_id]

    def partition(self):
        """
        Classifies every id.  Returns (initiating, continuation, excluded)
        id lists; <eos> is the only excluded id.
        """
        initiating, continuation = [], []
        for token_id in range(len(self.tokens)):
            if token_id == EOS:
                continue
            if self._initiating[token_id]:
                initiating.append(token_id)
            else:
                continuation.append(token_id)
        return initiating, continuation, [ EOS ]

    def _encode_chunk(self, chunk):
        ids = self._cache.get(chunk)
        if ids is not None:
            return ids

        ids = [ self._byte_ids.get(b, UNK) for b in chunk ]

        while len(ids) > 1:
            best = None
            for pair in zip(ids, ids[1:]):
                found = self.ranks.get(pair)
                if found is not None and (best is None or found < best[0]):
                    best = (found, pair)

            if best is None:
                break

            (_, merged), pair = best
            out = []
            i = 0
            while i < len(ids):
                if i < len(ids) - 1 and (ids[i], ids[i + 1]) == pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(ids[i])
                    i += 1
            ids = out

        ids = tuple(ids)
        self._cache[chunk] = ids
        return ids

    def encode_bytes(self, data):
        """Encodes a byte string."""

        ids = []
        for chunk in pretokenize(data):
            ids.extend(self._encode_chunk(chunk))
        return ids

    def encode(self, text):
        """Encodes text, greedily applying merges by rank within chunks."""

        return self.encode_bytes(text.encode("utf8"))

    def encode_offsets(self, text):
        """
        Encodes text and returns (ids, spans) where spans[i] is the
        (start, end) byte offset of token i in the UTF-8 encoding.
        """
        ids, spans = [], []
        offset = 0

        for chunk in pretokenize(text.encode("utf8")):
            for token_id in self._encode_chunk(chunk):
                width = 1 if token_id == UNK else len(self.tokens[token_id])
                ids.append(token_id)
                spans.append((offset, offset + width))
                offset += width

        return ids, spans

    def decode_bytes(self, ids):
        """
        Decodes ids to bytes.  <bos> and <eos> decode to nothing and <unk>
        to the replacement character.
        """
        out = []
        for token_id in ids:
            self._check_id(token_id)
            if token_id == UNK:
                out.append(REPLACEMENT)
            elif token_id >= len(SPECIALS):
                out.append(self.tokens[token_id])
        return b"".join(out)

    def decode(self, ids):
        """Decodes ids to text; invalid UTF-8 is replaced."""

        return self.decode_bytes(ids).decode("utf8", errors="replace")

    def to_dict(self):
        return {
            "format": FORMAT,
            "byte_fallback": self.byte_fallback,
            "specials": dict((name, i) for i, name in enumerate(SPECIALS)),
            "base": self.base,
            "merges": [ list(pair) for pair in self.merges ],
            "vocab": [
                name if token is None else token.decode("latin-1")
                for name, token in zip(
                    list(SPECIALS) + [ None ] * len(self.tokens),
                    self.tokens
                )
            ],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != FORMAT:
            raise TokenizerError("Unsupported tokenizer format: %r" % (
                data.get("format"),
            ))

        tokenizer = cls(data["base"], data["merges"], data["byte_fallback"])

        vocab = data.get("vocab")
        if vocab is not None and vocab != tokenizer.to_dict()["vocab"]:
            raise TokenizerError("Tokenizer vocab table does not match its "
                "merges")

        return tokenizer

    def save(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        try:
            return cls.from_dict(read_json(path))
        except (KeyError, TypeError, ValueError, RecordFormatError) as ex:
            raise TokenizerError("Bad tokenizer file %s: %s" % (path, ex))

    def digest(self):
        """The sha256 of the canonical serialized tokenizer."""

        return sha256_json(self.to_dict())

    def __eq__(self, other):
        return isinstance(other, BpeTokenizer) and \
            self.to_dict() == other.to_dict()

    def __repr__(self):
        return "BpeTokenizer(vocab_size=%d, merges=%d)" % (
            self.vocab_size, len(self.merges)
        )


def is_word_initiating(tokenizer, token_id):
    return tokenizer.is_word_initiating(token_id)


def encode(tokenizer, text):
    return tokenizer.encode(text)


def decode(tokenizer, ids):
    return tokenizer.decode(ids)


def load(path):
    return BpeTokenizer.load(path)


def train_bpe(texts, vocab_size, byte_fallback=True, min_frequency=2):
    """
    Trains a tokenizer by greedy highest-frequency pair merging.

    Ties between equally frequent pairs go to the pair whose merged
    surface is the smallest byte string, then to the smaller left and
    right surfaces.  Merging stops when the vocabulary is full or no
    pair occurs min_frequency times.

    @param {list} texts          Training texts.
    @param {int} vocab_size      Target size, specials included.
    @param {bool} byte_fallback  Use all 256 bytes as the base alphabet;
                                 otherwise only bytes seen in texts.
    """
    texts = list(texts)
    if not texts or not any(texts):
        raise TokenizerError("Cannot train a tokenizer on no text")

    chunk_freqs = Counter()
    for text in texts:
        chunk_freqs.update(pretokenize(text.encode("utf8")))

    if byte_fallback:
        base = list(range(256))
    else:
        base = sorted(set(b for chunk in chunk_freqs for b in chunk))

    if vocab_size <= len(base) + len(SPECIALS):
        raise TokenizerError("vocab_size %d must exceed the base alphabet "
            "(%d) plus specials (%d)" % (
                vocab_size, len(base), len(SPECIALS)
            ))

    tokens = [ None ] * len(SPECIALS) + [ bytes([ b ]) for b in base ]
    byte_ids = dict((b, len(SPECIALS) + i) for i, b in enumerate(base))

    chunks = sorted(chunk_freqs)
    words = [ [ byte_ids[b] for b in chunk ] for chunk in chunks ]
    freqs = [ chunk_freqs[chunk] for chunk in chunks ]

    pair_counts = Counter()
    where = {}

    def add_pairs(index, sign):
        symbols = words[index]
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += sign * freqs[index]
            if sign > 0:
                where.setdefault(pair, set()).add(index)

    for index in range(len(words)):
        add_pairs(index, 1)

    def heap_key(pair):
        left, right = pair
        return (-pair_counts[pair], tokens[left] + tokens[right],
            tokens[left], tokens[right], left, right)

    heap = [ heap_key(pair) for pair in pair_counts ]
    heapq.heapify(heap)

    merges = []
    while len(tokens) < vocab_size and heap:
        key = heapq.heappop(heap)
        pair = (key[4], key[5])
        count = pair_counts.get(pair, 0)

        if count != -key[0]:
            continue # stale entry; a current one was pushed on change
        if count < min_frequency:
            break

        merged = len(tokens)
        tokens.append(tokens[pair[0]] + tokens[pair[1]])
        merges.append(pair)

        touched = set()
        for index in sorted(where.pop(pair, ())):
            symbols = words[index]
            if len(symbols) < 2:
                continue

            add_pairs(index, -1)

            out = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and \
                        (symbols[i], symbols[i + 1]) == pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1

            words[index] = out
            add_pairs(index, 1)
            touched.update(zip(out, out[1:]))

            for old in zip(symbols, symbols[1:]):
                touched.add(old)

        for other in touched:
            if other != pair and pair_counts.get(other, 0) > 0:
                heapq.heappush(heap, heap_key(other))

        pair_counts.pop(pair, None)

    tokenizer = BpeTokenizer(base, merges, byte_fallback)
    verbose("Trained %r" % tokenizer)
    debug("First merges: %r" % [
        (tokens[a], tokens[b]) for a, b in merges[:10]
    ])
    return tokenizer
