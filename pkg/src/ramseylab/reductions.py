"""Executable solution translations between the four principle shapes
for stable colorings, plus the registry of which uniform reductions
hold between them.

Principle shapes, ordered along the positive chain: D (limit
homogeneous set), SIPT (increasing pair-split), SPT (pair-split), SRT
(homogeneous set).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List

from .coloring import (
    Coloring,
    JoinedSet,
    check_homogeneity,
    encode_join,
    pair_key,
)

PRINCIPLES = ("D", "SIPT", "SPT", "SRT")
NOTIONS = ("c", "W", "sc", "sW")

_CHAIN_INDEX = {p: i for i, p in enumerate(PRINCIPLES)}


class PreconditionError(ValueError):
    pass


class InsufficientWitnessError(ValueError):
    pass


def limit_to_homogeneous(f: Coloring, limit_set: Iterable[int], color: int) -> List[int]:
    """Greedy extraction of a homogeneous set from a limit-homogeneous one.

    Starts at the least element and keeps each further element of the
    input whose pairs with all previous picks have the given color.
    Runs to the horizon; the prefix produced is homogeneous with that
    color by construction.
    """
    picks: List[int] = []
    for x in sorted(set(limit_set)):
        if x >= f.horizon or x < 0:
            raise ValueError(f"element {x} outside horizon {f.horizon}")
        if all(f.table[pair_key(h, x)] == color for h in picks):
            picks.append(x)
    return picks


def ipt_to_homogeneous(f: Coloring, z: JoinedSet) -> List[int]:
    """Homogeneous set computed from an increasing pair-split solution.

    Reads the color off the least increasing cross pair, then extracts
    greedily from the left column.
    """
    verdict = check_homogeneity(f, z, "incr-p-homog")
    if verdict is None:
        raise PreconditionError("input is not increasing pair-split homogeneous")
    left, right = z.left, z.right
    if not left:
        raise InsufficientWitnessError("empty left column")
    i0 = min(left)
    above = [y for y in right if y > i0]
    if not above:
        raise InsufficientWitnessError(f"no right element above {i0}")
    i1 = min(above)
    color = f.table[pair_key(i0, i1)]
    return limit_to_homogeneous(f, left, color)


def homogeneous_to_p(h: Iterable[int]) -> JoinedSet:
    """Join a set with itself: {2x} and {2x+1} for every element."""
    h = set(h)
    return encode_join(h, h)


def forward_chain(kind_from: str, kind_to: str, solution):
    """Translate a solution one step down the positive chain.

    SRT -> SPT joins the homogeneous set with itself; SPT -> SIPT is the
    identity on joined sets; SIPT -> D projects the left column.
    """
    step = (kind_from, kind_to)
    if step == ("SRT", "SPT"):
        return homogeneous_to_p(solution)
    if step == ("SPT", "SIPT"):
        if not isinstance(solution, JoinedSet):
            raise TypeError("pair-split solution must be a JoinedSet")
        return solution
    if step == ("SIPT", "D"):
        if not isinstance(solution, JoinedSet):
            raise TypeError("pair-split solution must be a JoinedSet")
        return set(solution.left)
    raise ValueError(f"unknown translation {kind_from} -> {kind_to}")


@dataclass(frozen=True)
class RelationEntry:
    holds: bool
    derived: bool
    citation: str

    @property
    def status(self) -> str:
        word = "holds" if self.holds else "fails"
        return f"{word} (derived)" if self.derived else word


@dataclass(frozen=True)
class RelationMatrix:
    entries: dict  # (P, Q, notion) -> RelationEntry

    def query(self, p: str, q: str, notion: str) -> RelationEntry:
        if p not in PRINCIPLES or q not in PRINCIPLES:
            raise ValueError(f"unknown principle in ({p}, {q})")
        if notion not in NOTIONS:
            raise ValueError(f"unknown notion {notion}")
        return self.entries[(p, q, notion)]

    def to_json_dict(self) -> dict:
        return {
            "principles": list(PRINCIPLES),
            "notions": list(NOTIONS),
            "entries": [
                {
                    "from": p,
                    "to": q,
                    "notion": n,
                    "holds": e.holds,
                    "derived": e.derived,
                    "citation": e.citation,
                }
                for (p, q, n), e in sorted(self.entries.items())
            ],
        }

    def table_lines(self) -> List[str]:
        lines = []
        for notion in NOTIONS:
            lines.append(f"reducibility <={notion}:")
            header = "        " + "".join(f"{q:>8}" for q in PRINCIPLES)
            lines.append(header)
            for p in PRINCIPLES:
                row = f"{p:>8}"
                for q in PRINCIPLES:
                    e = self.entries[(p, q, notion)]
                    mark = "yes" if e.holds else "no"
                    if e.derived:
                        mark += "*"
                    row += f"{mark:>8}"
                lines.append(row)
            lines.append("")
        lines.append("* derived by composition or by the implication diagram")
        return lines


_ADJACENT_STRONG = {
    ("D", "SIPT"): "left-column projection of an increasing pair-split solution",
    ("SIPT", "SPT"): "every pair-split solution is already an increasing one",
    ("SPT", "SRT"): "join a homogeneous set with itself",
}

_STRONG_SEPARATIONS = {
    ("SIPT", "D"): "coding a settled enumeration: every increasing "
    "pair-split solution computes it",
    ("SPT", "SIPT"): "labeled-tree diagonalization with parity-shifted queries",
    ("SRT", "SPT"): "labeled-tree diagonalization against pair-split solutions",
    ("SRT", "D"): "cone avoidance for limit-homogeneous solutions",
}

_EXTRACTION = "greedy homogeneous extraction using the coloring"


def relation_matrix() -> RelationMatrix:
    """Full registry: who reduces to whom, under which notion, and why."""
    entries = {}
    for p in PRINCIPLES:
        for q in PRINCIPLES:
            i, j = _CHAIN_INDEX[p], _CHAIN_INDEX[q]
            if p == q:
                for n in NOTIONS:
                    entries[(p, q, n)] = RelationEntry(True, False, "identity reduction")
                continue

            up = i < j  # p sits below q on the positive chain
            if up:
                if (p, q) in _ADJACENT_STRONG:
                    sw = RelationEntry(True, False, _ADJACENT_STRONG[(p, q)])
                else:
                    sw = RelationEntry(True, True, "composition along the chain")
                implied = RelationEntry(True, True, "implied by the strong uniform reduction")
                entries[(p, q, "sW")] = sw
                entries[(p, q, "sc")] = implied
                entries[(p, q, "W")] = implied
                entries[(p, q, "c")] = implied
                continue

            # i > j: downward direction
            if (p, q) in _STRONG_SEPARATIONS:
                sc = RelationEntry(False, False, _STRONG_SEPARATIONS[(p, q)])
            else:
                sc = RelationEntry(False, True, "composition of separations")
            entries[(p, q, "sc")] = sc
            entries[(p, q, "sW")] = RelationEntry(
                False, True, "implied by the strong computable separation"
            )
            if j == 0:
                # nothing above D comes back down uniformly
                if p == "SRT":
                    w = RelationEntry(
                        False, False, "cone avoidance for limit-homogeneous solutions"
                    )
                else:
                    w = RelationEntry(False, True, "composition with the uniform equivalences")
                entries[(p, q, "W")] = w
                entries[(p, q, "c")] = RelationEntry(True, False, _EXTRACTION)
            else:
                if (p, q) in (("SRT", "SPT"), ("SPT", "SIPT")):
                    w = RelationEntry(True, False, _EXTRACTION)
                else:
                    w = RelationEntry(True, True, "composition along the chain")
                entries[(p, q, "W")] = w
                entries[(p, q, "c")] = RelationEntry(
                    True, True, "implied by the plain uniform reduction"
                )
    return RelationMatrix(entries)
