"""Regenerate src/aeroprompt/data/bpe_fixture.json.

Trains a small byte-pair vocabulary (200 merges, 456 ids total) on
prompt-like text built from the bundled word list, so common fragments
("car", " shape", " wing", ...) become single tokens. Deterministic:
frequency ties break on the lexicographically smaller byte pair.

Run from the repo root:  python tools/make_bpe_fixture.py
"""

from __future__ import annotations

import base64
import collections
import json
import sys
from pathlib import Path

N_MERGES = 200

WORDS = [
    "wing", "aileron", "machine", "wedge", "needle", "arrow", "box", "tube",
    "pipe", "car", "truck", "airplane", "balloon", "snake", "frog", "bird",
    "shark", "cloud", "object", "substance",
    "fast", "quick", "slow", "lazy", "sleek", "streamlined", "aerodynamic",
    "boxy", "blocky", "flat", "thin", "bulky",
]


def corpus() -> str:
    lines = ["A car in the shape of a wing"]
    for adj in WORDS[20:]:
        for noun in WORDS[:20]:
            lines.append(f"A {adj} car in the shape of {noun}")
    lines.append("a car in the shape of the shape of the car")
    return "\n".join(lines)


def train(text: str, n_merges: int) -> list:
    # words carry their leading space so merges respect word boundaries
    words: collections.Counter = collections.Counter()
    chunks = text.replace("\n", " ").split(" ")
    for i, chunk in enumerate(chunks):
        if chunk:
            words[(" " if i else "") + chunk] += 1

    seqs = {w: [bytes([b]) for b in w.encode("utf-8")] for w in words}
    merges = []
    for _ in range(n_merges):
        pairs: collections.Counter = collections.Counter()
        for w, seq in seqs.items():
            for a, b in zip(seq, seq[1:]):
                pairs[(a, b)] += words[w]
        if not pairs:
            break
        best = min(pairs, key=lambda p: (-pairs[p], p))
        merges.append(best)
        a, b = best
        for w, seq in seqs.items():
            i = 0
            while i < len(seq) - 1:
                if seq[i] == a and seq[i + 1] == b:
                    seq[i : i + 2] = [a + b]
                else:
                    i += 1
    return merges


def main() -> int:
    merges = train(corpus(), N_MERGES)
    b64 = lambda raw: base64.b64encode(raw).decode("ascii")
    tokens = [bytes([i]) for i in range(256)] + [a + b for a, b in merges]
    doc = {
        "tokens": [b64(t) for t in tokens],
        "merges": [[b64(a), b64(b)] for a, b in merges],
    }
    out = Path(__file__).resolve().parent.parent / "src" / "aeroprompt" / "data" / "bpe_fixture.json"
    out.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out} ({256 + len(merges)} ids)")

    sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
    from aeroprompt import tokenizer

    vocab = tokenizer.load_vocab(doc)
    for probe in (" wing", " shape", "A car in the shape of a wing"):
        ids = tokenizer.encode_text(vocab, probe)
        assert tokenizer.decode_tokens(vocab, ids) == probe.strip()
        print(f"  {probe!r} -> {ids}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
