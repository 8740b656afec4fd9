"""Byte-level BPE codec for the token genome encoding.

The vocabulary is the 256 single-byte tokens plus an ordered merge list;
merged token ids start at 256 in rank order. A token genome is a float
vector: each value rounds half-away-from-zero, clamps into the valid id
range, and the decoded byte strings concatenate into a prompt fragment.

A small fixture vocabulary trained on prompt-like text ships with the
package (``data/bpe_fixture.json``) so runs need no external tokenizer.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ParseError

FULL_SCALE_ID_LIMIT = 32768

TOKEN_TEMPLATE_PREFIX = "A car in the shape of "


@dataclass(frozen=True)
class BpeVocab:
    """Immutable byte-pair vocabulary.

    token_bytes: id -> bytes, ids 0..255 are the raw bytes.
    merges: (left bytes, right bytes) -> rank; merged id = 256 + rank.
    """

    token_bytes: tuple
    merges: dict

    @property
    def size(self) -> int:
        return len(self.token_bytes)

    def __post_init__(self):
        if len(self.token_bytes) < 256:
            raise ParseError("vocabulary must contain the 256 byte tokens")
        for i in range(256):
            if self.token_bytes[i] != bytes([i]):
                raise ParseError(f"token id {i} must be the raw byte {i}")
        if len(self.merges) != len(self.token_bytes) - 256:
            raise ParseError("merge count inconsistent with vocabulary size")


def load_vocab(source: Union[str, Path, dict]) -> BpeVocab:
    """Load a vocabulary from a JSON document with base64 byte fields:
    {"tokens": [b64, ...], "merges": [[b64, b64], ...]}.

    tokens is the dense id -> bytes table (position = id); merges is the
    ranked pair list. The two must agree: token 256 + rank is the
    concatenation of merge rank's pair.
    """
    if isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid vocabulary JSON: {exc}") from exc
    if not isinstance(doc, dict) or "tokens" not in doc or "merges" not in doc:
        raise ParseError("vocabulary document needs 'tokens' and 'merges' lists")

    def debase64(value, what):
        try:
            return base64.b64decode(value, validate=True)
        except Exception as exc:
            raise ParseError(f"{what}: bad base64: {exc}") from exc

    token_bytes = [debase64(t, f"token id {i}") for i, t in enumerate(doc["tokens"])]
    if len(token_bytes) != 256 + len(doc["merges"]):
        raise ParseError(
            f"{len(token_bytes)} tokens inconsistent with {len(doc['merges'])} merges"
        )

    merges = {}
    for rank, pair in enumerate(doc["merges"]):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ParseError(f"malformed merge entry at rank {rank}")
        left = debase64(pair[0], f"merge rank {rank} left")
        right = debase64(pair[1], f"merge rank {rank} right")
        key = (left, right)
        if key in merges:
            raise ParseError(f"duplicate merge pair at rank {rank}")
        if token_bytes[256 + rank] != left + right:
            raise ParseError(f"token id {256 + rank} does not match merge rank {rank}")
        merges[key] = rank
    return BpeVocab(token_bytes=tuple(token_bytes), merges=merges)


def fixture_path() -> Path:
    return Path(__file__).parent / "data" / "bpe_fixture.json"


def load_fixture_vocab() -> BpeVocab:
    return load_vocab(fixture_path())


def round_and_clamp(values, id_limit: int = FULL_SCALE_ID_LIMIT) -> np.ndarray:
    """Round half-away-from-zero, then clamp into [0, id_limit - 1]."""
    if id_limit <= 0:
        raise ValueError("id_limit must be positive")
    v = np.asarray(values, dtype=np.float64)
    rounded = np.sign(v) * np.floor(np.abs(v) + 0.5)
    return np.clip(rounded, 0, id_limit - 1).astype(np.int64)


def encode_text(vocab: BpeVocab, text: str) -> list[int]:
    """Greedy BPE encoding: always apply the lowest-ranked applicable merge."""
    parts = [bytes([b]) for b in text.encode("utf-8")]
    while len(parts) > 1:
        best_rank = None
        best_idx = -1
        for i in range(len(parts) - 1):
            rank = vocab.merges.get((parts[i], parts[i + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_idx = i
        if best_rank is None:
            break
        parts[best_idx : best_idx + 2] = [parts[best_idx] + parts[best_idx + 1]]
    index = {b: i for i, b in enumerate(vocab.token_bytes)}
    return [index[p] for p in parts]


def decode_tokens(vocab: BpeVocab, ids) -> str:
    """Token ids -> text; invalid UTF-8 becomes U+FFFD, edges are stripped."""
    blob = b"".join(vocab.token_bytes[int(i)] for i in ids)
    return blob.decode("utf-8", errors="replace").strip()


def decode_token_genome(vocab: BpeVocab, genome, id_limit: int = None) -> str:
    """Float genome -> prompt. The fragment decodes through the vocabulary
    and lands in a fixed template; an empty fragment leaves the bare stem."""
    limit = vocab.size if id_limit is None else min(id_limit, vocab.size)
    ids = round_and_clamp(np.asarray(genome, dtype=np.float64).reshape(-1), limit)
    fragment = decode_tokens(vocab, ids)
    return TOKEN_TEMPLATE_PREFIX + fragment
