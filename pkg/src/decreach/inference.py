"""How the adversary revises his belief about the protagonist's action set.

A mechanism maps (current believed subset, observed protagonist action) to a
new subset.  Two rules are provided: plain accumulation of observed actions
(UNION) and accumulation through a closure map, where seeing one action
implies a whole set of others (CLOSURE).  Both only ever grow the belief:
the downstream hypergame construction and the deceptive synthesis assume the
adversary's knowledge accumulates, and the adversary's own moves reveal
nothing (mechanisms are typed over protagonist actions only).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .errors import GameFormatError
from .game import GameGraph, p1_action_id

UNION = "union"
CLOSURE = "closure"


@dataclass(frozen=True, eq=False)
class InferenceMechanism:
    kind: str
    universe: frozenset[int]
    closure_map: Optional[Mapping[int, frozenset[int]]] = field(default=None)

    @classmethod
    def union(cls, a1: Iterable[int]) -> "InferenceMechanism":
        return cls(UNION, frozenset(int(a) for a in a1))

    @classmethod
    def closure(
        cls, a1: Iterable[int], mapping: Mapping[int, Iterable[int]]
    ) -> "InferenceMechanism":
        """Closure rule; every action implies itself, map entries may add more."""
        universe = frozenset(int(a) for a in a1)
        unknown = set(mapping) - universe
        if unknown:
            raise ValueError(f"closure map keys outside the P1 alphabet: {sorted(unknown)}")
        full = {}
        for a in sorted(universe):
            implied = frozenset(int(b) for b in mapping.get(a, ())) | {a}
            extra = implied - universe
            if extra:
                raise ValueError(
                    f"closure of action {a} leaves the P1 alphabet: {sorted(extra)}"
                )
            full[a] = implied
        return cls(CLOSURE, universe, full)

    def __post_init__(self):
        if self.kind not in (UNION, CLOSURE):
            raise ValueError(f"unknown inference kind {self.kind!r}")
        if self.kind == CLOSURE and self.closure_map is None:
            raise ValueError("closure mechanism needs a closure map")


def infer_step(mech: InferenceMechanism, x: Iterable[int], a: int) -> frozenset[int]:
    """One observation: the updated belief always contains ``a`` and all of ``x``."""
    xs = frozenset(int(b) for b in x)
    if not xs <= mech.universe:
        raise ValueError(f"belief contains non-P1 actions: {sorted(xs - mech.universe)}")
    if a not in mech.universe:
        raise ValueError(f"observed action {a} is not a P1 action")
    if mech.kind == UNION:
        return xs | {a}
    return xs | mech.closure_map[a]


def infer_history(
    mech: InferenceMechanism, x0: Iterable[int], alpha: Iterable[int]
) -> frozenset[int]:
    """Left fold of :func:`infer_step` over an observed action sequence."""
    belief = frozenset(int(b) for b in x0)
    for a in alpha:
        belief = infer_step(mech, belief, a)
    return belief


# -- sidecar file ------------------------------------------------------
#
# {"kind": "union", "x0": [...]} or
# {"kind": "closure", "map": {action: [actions...]}, "x0": [...]}
# Actions are referred to by label when the game labels them, by id
# otherwise; the loader accepts either.


def load_inference(path, game: GameGraph) -> tuple[InferenceMechanism, frozenset[int]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFormatError(f"cannot read {path}: {exc}") from exc
    return loads_inference(text, game, source=str(path))


def loads_inference(
    text: str, game: GameGraph, source: str = "<string>"
) -> tuple[InferenceMechanism, frozenset[int]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{source}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GameFormatError(f"{source}: top level must be an object")
    kind = doc.get("kind")
    if kind not in (UNION, CLOSURE):
        raise GameFormatError(f"{source}: field 'kind' must be 'union' or 'closure'")
    if "x0" not in doc or not isinstance(doc["x0"], list):
        raise GameFormatError(f"{source}: missing required list field 'x0'")
    x0 = frozenset(p1_action_id(game, tok) for tok in doc["x0"])
    if kind == UNION:
        return InferenceMechanism.union(game.a1), x0
    raw_map = doc.get("map")
    if not isinstance(raw_map, dict):
        raise GameFormatError(f"{source}: closure inference needs an object field 'map'")
    mapping = {}
    for key, vals in raw_map.items():
        if not isinstance(vals, list):
            raise GameFormatError(f"{source}: map entry {key!r} must be a list")
        mapping[p1_action_id(game, key)] = [p1_action_id(game, v) for v in vals]
    try:
        mech = InferenceMechanism.closure(game.a1, mapping)
    except ValueError as exc:
        raise GameFormatError(f"{source}: {exc}") from exc
    return mech, x0


def dumps_inference(
    mech: InferenceMechanism, x0: Iterable[int], game: GameGraph
) -> str:
    def name(aid: int):
        act = game.action(aid)
        return act.label if act.label is not None else aid

    doc: dict = {"kind": mech.kind}
    if mech.kind == CLOSURE:
        doc["map"] = {
            str(name(a)): [name(b) for b in sorted(mech.closure_map[a])]
            for a in sorted(mech.closure_map)
        }
    doc["x0"] = [name(a) for a in sorted(frozenset(x0))]
    return json.dumps(doc, indent=2) + "\n"


def save_inference(mech: InferenceMechanism, x0, game: GameGraph, path) -> None:
    Path(path).write_text(dumps_inference(mech, x0, game))
