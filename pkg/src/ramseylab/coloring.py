"""Stable 2-colorings of pairs over a finite horizon.

The universe is {0, ..., horizon-1}. A coloring assigns 0 or 1 to every
unordered pair below the horizon and may carry per-element limit
annotations (color, stabilization point): f(x, u) = color for every
u >= stabilization point inside the horizon.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple

COLORS = (0, 1)
KINDS = ("homog", "p-homog", "incr-p-homog", "limit-homog")

#: minimum constant-tail length accepted by empirical limit detection
DEFAULT_MIN_TAIL = 3


class OutOfHorizonError(ValueError):
    """An element at or above the coloring's horizon was used."""


class MissingLimitError(ValueError):
    """A limit-homogeneity check touched an element without a limit annotation."""


class _Vacuous:
    """Result of a homogeneity check with no pair to constrain: the
    property holds but there is no witnessing color."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VACUOUS"


VACUOUS = _Vacuous()


def pair_key(x: int, y: int) -> Tuple[int, int]:
    if x == y:
        raise ValueError(f"not a pair: {{{x},{y}}}")
    return (x, y) if x < y else (y, x)


@dataclass(frozen=True)
class Coloring:
    """Total symmetric 2-coloring of pairs below ``horizon``.

    ``table`` maps (x, y) with x < y to a color; ``limits`` maps x to
    (color, stabilization point).
    """

    horizon: int
    table: dict
    limits: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.horizon
        if n < 0:
            raise ValueError("negative horizon")
        for (x, y), c in self.table.items():
            if not (0 <= x < y < n):
                raise ValueError(f"table entry ({x},{y}) outside horizon {n}")
            if c not in COLORS:
                raise ValueError(f"bad color {c!r} at ({x},{y})")
        for x in range(n):
            for y in range(x + 1, n):
                if (x, y) not in self.table:
                    raise ValueError(f"table not total: pair ({x},{y}) missing")
        for x, (i, z) in self.limits.items():
            if not 0 <= x < n:
                raise ValueError(f"limit annotation for {x} outside horizon")
            if i not in COLORS or z < 0:
                raise ValueError(f"bad limit annotation {x} -> ({i},{z})")
            for u in range(z, n):
                if u != x and self.table[pair_key(x, u)] != i:
                    raise ValueError(
                        f"limit annotation ({i},{z}) at {x} contradicts "
                        f"table at pair {pair_key(x, u)}"
                    )

    def color(self, x: int, y: int) -> int:
        if x >= self.horizon or y >= self.horizon or x < 0 or y < 0:
            raise OutOfHorizonError(f"pair ({x},{y}) outside horizon {self.horizon}")
        return self.table[pair_key(x, y)]

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "entries": [[x, y, c] for (x, y), c in sorted(self.table.items())],
            "limits": [[x, i, z] for x, (i, z) in sorted(self.limits.items())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Coloring":
        n = data["horizon"]
        table = {}
        for x, y, c in data.get("entries", []):
            if not (0 <= x < y < n):
                raise ValueError(f"entry ({x},{y}) out of range")
            if (x, y) in table:
                raise ValueError(f"duplicate entry for pair ({x},{y})")
            table[(x, y)] = c
        limits = {}
        for x, i, z in data.get("limits", []):
            if x in limits:
                raise ValueError(f"duplicate limit annotation for {x}")
            limits[x] = (i, z)
        return cls(horizon=n, table=table, limits=limits)

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "Coloring":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class JoinedSet:
    """Finite set of naturals read as a two-column join: even codes 2x
    are left-column elements x, odd codes 2y+1 are right-column
    elements y."""

    elements: frozenset

    def __init__(self, elements: Iterable[int]):
        object.__setattr__(self, "elements", frozenset(elements))
        if any(e < 0 for e in self.elements):
            raise ValueError("negative code in joined set")

    @property
    def left(self) -> frozenset:
        return frozenset(e // 2 for e in self.elements if e % 2 == 0)

    @property
    def right(self) -> frozenset:
        return frozenset(e // 2 for e in self.elements if e % 2 == 1)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


def decode_join(z) -> Tuple[frozenset, frozenset]:
    """Split a joined set into its (left, right) columns."""
    if not isinstance(z, JoinedSet):
        z = JoinedSet(z)
    return z.left, z.right


def encode_join(left: Iterable[int], right: Iterable[int]) -> JoinedSet:
    return JoinedSet({2 * x for x in left} | {2 * y + 1 for y in right})


def _check_in_horizon(f: Coloring, values):
    for v in values:
        if v >= f.horizon or v < 0:
            raise OutOfHorizonError(f"element {v} outside horizon {f.horizon}")


def check_homogeneity(f: Coloring, subject, kind: str):
    """Decide one of the four homogeneity notions exactly.

    Returns the witnessing color when the property holds, None when it
    fails, and VACUOUS when there is no pair (or element) to constrain.
    For the p-homogeneity kinds ``subject`` must be a JoinedSet; for the
    others any iterable of naturals (a JoinedSet is then read as its raw
    element set).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown homogeneity kind {kind!r}")

    if kind in ("p-homog", "incr-p-homog"):
        if not isinstance(subject, JoinedSet):
            raise TypeError(f"{kind} check requires a JoinedSet")
        left, right = subject.left, subject.right
        _check_in_horizon(f, left)
        _check_in_horizon(f, right)
        seen = None
        for x in left:
            for y in right:
                if x == y:
                    continue
                if kind == "incr-p-homog" and not x < y:
                    continue
                c = f.table[pair_key(x, y)]
                if seen is None:
                    seen = c
                elif c != seen:
                    return None
        return VACUOUS if seen is None else seen

    elements = sorted(subject.elements if isinstance(subject, JoinedSet) else subject)
    _check_in_horizon(f, elements)

    if kind == "homog":
        if len(elements) < 2:
            return VACUOUS
        seen = None
        for i, x in enumerate(elements):
            for y in elements[i + 1 :]:
                c = f.table[(x, y)]
                if seen is None:
                    seen = c
                elif c != seen:
                    return None
        return seen

    # limit-homog: all elements share one limit color
    if not elements:
        return VACUOUS
    seen = None
    for x in elements:
        if x not in f.limits:
            raise MissingLimitError(f"no limit annotation for element {x}")
        c = f.limits[x][0]
        if seen is None:
            seen = c
        elif c != seen:
            return None
    return seen


def limit_color(f: Coloring, x: int, min_tail: int = DEFAULT_MIN_TAIL) -> Optional[Tuple[int, int]]:
    """Limit color and least stabilization point of row x.

    Prefers the stored annotation; otherwise scans for the longest
    constant tail, requiring at least ``min_tail`` witnesses.
    """
    if not 0 <= x < f.horizon:
        raise OutOfHorizonError(f"element {x} outside horizon {f.horizon}")
    if x in f.limits:
        return f.limits[x]
    others = [u for u in range(f.horizon) if u != x]
    if not others:
        return None
    tail_color = f.table[pair_key(x, others[-1])]
    z = 0
    for u in reversed(others):
        if f.table[pair_key(x, u)] != tail_color:
            z = u + 1
            break
    witnesses = sum(1 for u in others if u >= z)
    if witnesses < min_tail:
        return None
    return (tail_color, z)


def random_stable_coloring(seed: int, horizon: int, stab_bound: int) -> Coloring:
    """Seeded random coloring whose every stabilization point is <= stab_bound.

    Limit colors are assigned row by row; a row may differ in limit
    color from an earlier row only if its stabilization point can be
    pushed past that row, which keeps the annotations mutually
    consistent.
    """
    if stab_bound >= horizon:
        raise ValueError("stab_bound must be below the horizon")
    if stab_bound < 0:
        raise ValueError("negative stab_bound")
    rng = random.Random(seed)
    last = {0: -1, 1: -1}  # most recent row of each limit color
    colors = {}
    stabs = {}
    for x in range(horizon):
        i = rng.randint(0, 1)
        needed = last[1 - i] + 1
        if needed > stab_bound:
            i = 1 - i
            needed = last[1 - i] + 1
        # rows above stab_bound always admit one of the two colors
        if needed > stab_bound:
            raise AssertionError("unreachable: both colors blocked")
        colors[x] = i
        stabs[x] = rng.randint(needed, stab_bound)
        last[i] = x
    table = {}
    for x in range(horizon):
        for y in range(x + 1, horizon):
            if y >= stabs[x]:
                table[(x, y)] = colors[x]
            elif x >= stabs[y]:
                table[(x, y)] = colors[y]
            else:
                table[(x, y)] = rng.randint(0, 1)
    limits = {x: (colors[x], stabs[x]) for x in range(horizon)}
    return Coloring(horizon=horizon, table=table, limits=limits)
