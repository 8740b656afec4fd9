"""Regenerate src/aeroprompt/data/taxonomy_fixture.json.

Noun hypernym chains follow real WordNet paths (so car/snake/frog land at
depths 11/12/11 and their pairwise Wu-Palmer values match a full WordNet
import). Adjectives get a synthetic cluster hierarchy: head adjectives sit
under quality nodes, near-synonyms hang off their head, which mimics how
similar-to satellite clusters come out when mapped onto a tree.

Run from the repo root:  python tools/make_taxonomy_fixture.py
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

# (id, parent) pairs; depth = chain length from entity, entity itself = 1
NODES = [
    ("entity", None),
    ("physical_entity", "entity"),
    ("abstraction", "entity"),
    ("object", "physical_entity"),
    ("substance", "physical_entity"),
    ("whole", "object"),
    ("natural_object", "whole"),
    ("artifact", "whole"),
    ("living_thing", "whole"),
    # artifacts
    ("instrumentality", "artifact"),
    ("way", "artifact"),
    ("container", "instrumentality"),
    ("device", "instrumentality"),
    ("implement", "instrumentality"),
    ("conveyance", "instrumentality"),
    ("wheeled_vehicle", "container"),
    ("self_propelled_vehicle", "wheeled_vehicle"),
    ("motor_vehicle", "self_propelled_vehicle"),
    ("car", "motor_vehicle"),
    ("truck", "motor_vehicle"),
    ("airfoil", "device"),
    ("wing_airfoil", "airfoil"),
    ("aileron", "airfoil"),
    ("machine", "device"),
    ("wedge", "machine"),
    ("projectile", "implement"),
    ("arrow", "projectile"),
    ("needle", "implement"),
    ("passage", "way"),
    ("conduit", "passage"),
    ("tube", "conduit"),
    ("pipe", "conduit"),
    ("box", "container"),
    ("vehicle", "conveyance"),
    ("craft", "vehicle"),
    ("aircraft", "craft"),
    ("heavier_than_air_craft", "aircraft"),
    ("airplane", "heavier_than_air_craft"),
    ("balloon", "aircraft"),
    # organisms
    ("organism", "living_thing"),
    ("animal", "organism"),
    ("chordate", "animal"),
    ("vertebrate", "chordate"),
    ("reptile", "vertebrate"),
    ("diapsid", "reptile"),
    ("snake", "diapsid"),
    ("amphibian", "vertebrate"),
    ("frog", "amphibian"),
    ("bird", "vertebrate"),
    ("aquatic_vertebrate", "vertebrate"),
    ("fish", "aquatic_vertebrate"),
    ("shark", "fish"),
    # natural objects
    ("cloud", "natural_object"),
    ("body_part", "natural_object"),
    ("organ", "body_part"),
    ("wing_organ", "organ"),
    # adjective hierarchy
    ("attribute", "abstraction"),
    ("property", "attribute"),
    ("speed_quality", "property"),
    ("fast", "speed_quality"),
    ("quick", "fast"),
    ("slow", "speed_quality"),
    ("lazy", "slow"),
    ("shape_quality", "property"),
    ("sleek", "shape_quality"),
    ("streamlined", "sleek"),
    ("aerodynamic", "streamlined"),
    ("boxy", "shape_quality"),
    ("blocky", "boxy"),
    ("flat", "shape_quality"),
    ("thin", "flat"),
    ("size_quality", "property"),
    ("bulky", "size_quality"),
]

NOUNS = [
    ("wing", ["wing_airfoil", "wing_organ"]),
    ("aileron", ["aileron"]),
    ("machine", ["machine"]),
    ("wedge", ["wedge"]),
    ("needle", ["needle"]),
    ("arrow", ["arrow"]),
    ("box", ["box"]),
    ("tube", ["tube"]),
    ("pipe", ["pipe"]),
    ("car", ["car"]),
    ("truck", ["truck"]),
    ("airplane", ["airplane"]),
    ("balloon", ["balloon"]),
    ("snake", ["snake"]),
    ("frog", ["frog"]),
    ("bird", ["bird"]),
    ("shark", ["shark"]),
    ("cloud", ["cloud"]),
    ("object", ["object"]),
    ("substance", ["substance"]),
]

ADJECTIVES = [
    "fast", "quick", "slow", "lazy",
    "sleek", "streamlined", "aerodynamic",
    "boxy", "blocky", "flat", "thin", "bulky",
]


def build_doc() -> dict:
    return {
        "nodes": [{"id": nid, "parent": p} for nid, p in NODES],
        "lemmas": (
            [{"word": w, "pos": "noun", "senses": s} for w, s in NOUNS]
            + [{"word": w, "pos": "adjective", "senses": [w]} for w in ADJECTIVES]
        ),
    }


def check(doc: dict) -> None:
    parent = {n["id"]: n["parent"] for n in doc["nodes"]}
    depth = {}

    def d(nid):
        if nid not in depth:
            depth[nid] = 1 if parent[nid] is None else d(parent[nid]) + 1
        return depth[nid]

    def chain(nid):
        out = [nid]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out

    def wup(a, b):
        ca = set(chain(a))
        cur = b
        while cur not in ca:
            cur = parent[cur]
        return Fraction(2 * d(cur), d(a) + d(b))

    # depths that anchor the WordNet-derived noun values
    expect_depth = {"car": 11, "snake": 12, "frog": 11, "wing_airfoil": 9, "wing_organ": 8}
    for nid, want in expect_depth.items():
        assert d(nid) == want, (nid, d(nid), want)

    assert wup("car", "snake") == Fraction(8, 23)
    assert wup("car", "frog") == Fraction(8, 22)
    assert wup("object", "substance") == Fraction(2, 3)

    # similarity-to-reference spectrum used by the decoder; ties are intended
    # and resolve to the lexicographically smallest word
    sims_to_wing = {}
    for word, senses in NOUNS:
        sims_to_wing[word] = max(
            max(wup(s, "wing_airfoil"), wup(s, "wing_organ")) for s in senses
        )
    winners = {}
    for word in sorted(sims_to_wing):
        winners.setdefault(sims_to_wing[word], word)
    reachable = set(winners.values())
    for word in ("wing", "aileron", "machine", "wedge", "box", "arrow",
                 "balloon", "airplane", "pipe", "cloud", "object", "bird",
                 "frog", "shark", "substance"):
        assert word in reachable, (word, sorted(sims_to_wing.items(), key=lambda kv: -kv[1]))

    sims_to_fast = {w: wup(w, "fast") for w in ADJECTIVES}
    winners = {}
    for word in sorted(sims_to_fast):
        winners.setdefault(sims_to_fast[word], word)
    reachable = set(winners.values())
    for word in ("fast", "quick", "slow", "lazy", "boxy", "blocky", "aerodynamic"):
        assert word in reachable, (word, sorted(sims_to_fast.items(), key=lambda kv: -kv[1]))
    assert sims_to_fast["aerodynamic"] == Fraction(8, 14)

    print(f"nodes: {len(doc['nodes'])}, lemmas: {len(doc['lemmas'])}")
    print("noun sims to 'wing':")
    for w in sorted(sims_to_wing, key=lambda w: -sims_to_wing[w]):
        print(f"  {float(sims_to_wing[w]):.4f}  {w}")
    print("adjective sims to 'fast':")
    for w in sorted(sims_to_fast, key=lambda w: -sims_to_fast[w]):
        print(f"  {float(sims_to_fast[w]):.4f}  {w}")


def main() -> int:
    doc = build_doc()
    check(doc)
    out = Path(__file__).resolve().parent.parent / "src" / "aeroprompt" / "data" / "taxonomy_fixture.json"
    out.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
