"""Word taxonomy, Wu-Palmer similarity, and the bag-of-words prompt codec.

A taxonomy document is JSON of the form::

    {
      "nodes":  [{"id": "entity", "parent": null}, {"id": "object", "parent": "entity"}, ...],
      "lemmas": [{"word": "car", "pos": "noun", "senses": ["car"]}, ...]
    }

Exactly one node has ``parent: null`` (the root). Every word maps to one or
more sense nodes; similarity between words is the maximum Wu-Palmer value
over their sense pairs. Depth counts nodes on the path from the root
inclusive, so the root has depth 1.

The bundled fixture (``data/taxonomy_fixture.json``) keeps the real WordNet
hypernym chains for the car/animal nouns (so e.g. snake-vs-car similarity
lands where a full WordNet import would put it) and gives adjectives a
synthetic cluster hierarchy, since adjective taxonomies are otherwise flat.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import CycleDetected, MissingRoot, ParseError, UnknownWord

ADJECTIVE = "adjective"
NOUN = "noun"

BOW_TEMPLATE = "A {adjective} car in the shape of {noun}"


@dataclass(frozen=True)
class Taxonomy:
    """Validated rooted word hierarchy with a lemma index."""

    root: str
    parent: dict  # node id -> parent id (root maps to None)
    depth: dict  # node id -> depth, root = 1
    lemma_index: dict  # word -> tuple of sense node ids
    pos: dict  # word -> "adjective" | "noun"

    def words(self, pos: str) -> list[str]:
        return sorted(w for w, p in self.pos.items() if p == pos)

    def ancestor_chain(self, node: str) -> list[str]:
        """Node ids from `node` up to the root, inclusive."""
        chain = [node]
        while self.parent[chain[-1]] is not None:
            chain.append(self.parent[chain[-1]])
        return chain


def load_taxonomy(source: Union[str, Path, dict]) -> Taxonomy:
    """Parse and validate a taxonomy document (mapping, JSON text, or path)."""
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid taxonomy JSON: {exc}") from exc

    if not isinstance(doc, dict) or "nodes" not in doc or "lemmas" not in doc:
        raise ParseError("taxonomy document needs 'nodes' and 'lemmas' lists")

    parent: dict = {}
    for entry in doc["nodes"]:
        if not isinstance(entry, dict) or "id" not in entry or "parent" not in entry:
            raise ParseError(f"malformed node entry: {entry!r}")
        nid = entry["id"]
        if nid in parent:
            raise ParseError(f"duplicate node id: {nid!r}")
        parent[nid] = entry["parent"]

    roots = [nid for nid, p in parent.items() if p is None]
    if len(roots) != 1:
        raise MissingRoot(f"expected exactly one root node, found {len(roots)}")
    root = roots[0]

    for nid, p in parent.items():
        if p is not None and p not in parent:
            raise ParseError(f"node {nid!r} references missing parent {p!r}")

    # depth by memoized walk; any chain that revisits a node is a cycle
    depth: dict = {root: 1}

    def resolve(nid: str) -> int:
        trail = []
        cur = nid
        while cur not in depth:
            if cur in trail:
                raise CycleDetected(f"cycle through node {cur!r}")
            trail.append(cur)
            cur = parent[cur]
        d = depth[cur]
        for t in reversed(trail):
            d += 1
            depth[t] = d
        return depth[nid]

    for nid in parent:
        resolve(nid)

    lemma_index: dict = {}
    pos_map: dict = {}
    for entry in doc["lemmas"]:
        if not isinstance(entry, dict) or not {"word", "pos", "senses"} <= set(entry):
            raise ParseError(f"malformed lemma entry: {entry!r}")
        word = entry["word"]
        pos = entry["pos"]
        senses = entry["senses"]
        if pos not in (ADJECTIVE, NOUN):
            raise ParseError(f"lemma {word!r} has unknown pos {pos!r}")
        if word in lemma_index:
            raise ParseError(f"duplicate lemma: {word!r}")
        if not senses:
            raise ParseError(f"lemma {word!r} has no senses")
        for s in senses:
            if s not in parent:
                raise ParseError(f"lemma {word!r} references missing node {s!r}")
        lemma_index[word] = tuple(senses)
        pos_map[word] = pos

    return Taxonomy(root=root, parent=parent, depth=depth, lemma_index=lemma_index, pos=pos_map)


def fixture_path() -> Path:
    return Path(__file__).parent / "data" / "taxonomy_fixture.json"


def load_fixture_taxonomy() -> Taxonomy:
    return load_taxonomy(fixture_path())


def wup_similarity(taxonomy: Taxonomy, word_a: str, word_b: str) -> float:
    """Wu-Palmer similarity: max over sense pairs of 2*depth(lcs) / (depth(a) + depth(b))."""
    for w in (word_a, word_b):
        if w not in taxonomy.lemma_index:
            raise UnknownWord(f"word not in lemma index: {w!r}")
    best = 0.0
    for sa in taxonomy.lemma_index[word_a]:
        chain_a = taxonomy.ancestor_chain(sa)
        ancestors_a = set(chain_a)
        da = taxonomy.depth[sa]
        for sb in taxonomy.lemma_index[word_b]:
            db = taxonomy.depth[sb]
            # first common node walking up from sb is the deepest shared ancestor
            cur = sb
            while cur not in ancestors_a:
                cur = taxonomy.parent[cur]
            sim = 2.0 * taxonomy.depth[cur] / (da + db)
            if sim > best:
                best = sim
    return best


@dataclass(frozen=True)
class WordSet:
    """Candidate words with cached similarity to the reference words.

    Word lists are stored lexicographically sorted so that a plain
    first-minimum scan realizes the documented argmin tie-break
    (lexicographically smallest word wins).
    """

    adjectives: tuple
    nouns: tuple
    adj_sims: np.ndarray
    noun_sims: np.ndarray
    ref_adjective: str
    ref_noun: str

    def __post_init__(self):
        for words, sims in ((self.adjectives, self.adj_sims), (self.nouns, self.noun_sims)):
            if len(words) == 0:
                raise ValueError("word set must be non-empty")
            if len(set(words)) != len(words):
                raise ValueError("word set contains duplicates")
            if len(words) != len(sims):
                raise ValueError("similarity cache length mismatch")
            if np.any(sims <= 0.0) or np.any(sims > 1.0):
                raise ValueError("cached similarities must lie in (0, 1]")
        object.__setattr__(self, "adj_sims", _freeze(np.asarray(self.adj_sims, dtype=np.float64)))
        object.__setattr__(self, "noun_sims", _freeze(np.asarray(self.noun_sims, dtype=np.float64)))


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def build_word_set(
    taxonomy: Taxonomy,
    ref_adjective: str,
    ref_noun: str,
    n: int,
    seed: int,
) -> WordSet:
    """Sample `n` adjectives and `n` nouns (without replacement, deterministic
    per seed) and cache their similarity to the matching reference word."""
    if n <= 0:
        raise ValueError("sample size must be positive")
    for ref, pos in ((ref_adjective, ADJECTIVE), (ref_noun, NOUN)):
        if ref not in taxonomy.lemma_index:
            raise UnknownWord(f"reference word not in lemma index: {ref!r}")
        if taxonomy.pos[ref] != pos:
            raise UnknownWord(f"reference word {ref!r} is not a {pos}")

    rng = np.random.default_rng(seed)

    def sample(pool: list[str]) -> list[str]:
        if n >= len(pool):
            return sorted(pool)
        picks = rng.choice(len(pool), size=n, replace=False)
        return sorted(pool[i] for i in picks)

    adjectives = sample(taxonomy.words(ADJECTIVE))
    nouns = sample(taxonomy.words(NOUN))
    adj_sims = np.array([wup_similarity(taxonomy, w, ref_adjective) for w in adjectives])
    noun_sims = np.array([wup_similarity(taxonomy, w, ref_noun) for w in nouns])
    return WordSet(
        adjectives=tuple(adjectives),
        nouns=tuple(nouns),
        adj_sims=adj_sims,
        noun_sims=noun_sims,
        ref_adjective=ref_adjective,
        ref_noun=ref_noun,
    )


@dataclass(frozen=True)
class BowGenome:
    """Two target similarities: (adjective slot, noun slot)."""

    adj_value: float
    noun_value: float

    @classmethod
    def from_vector(cls, vec) -> "BowGenome":
        v = np.asarray(vec, dtype=np.float64).reshape(-1)
        if v.size != 2:
            raise ValueError(f"bag-of-words genome needs 2 values, got {v.size}")
        return cls(float(v[0]), float(v[1]))


def _nearest_word(words: tuple, sims: np.ndarray, value: float) -> str:
    # lists are sorted lexicographically; first minimum realizes the tie-break
    gaps = np.abs(sims - value)
    return words[int(np.argmin(gaps))]


def decode_bow(genome: BowGenome, words: WordSet) -> str:
    """Decode a genome to the prompt template, clamping values into [0, 1]."""
    av = min(1.0, max(0.0, genome.adj_value))
    nv = min(1.0, max(0.0, genome.noun_value))
    adjective = _nearest_word(words.adjectives, words.adj_sims, av)
    noun = _nearest_word(words.nouns, words.noun_sims, nv)
    return BOW_TEMPLATE.format(adjective=adjective, noun=noun)
