"""Use-bounded Turing functionals on set oracles, presented as finite
axiom lists.

An axiom (n, pos, neg, out) fires on an oracle X when pos is contained
in X and neg misses X. A coloring transformer reads a coloring through
the pair-code oracle {code(x,y) : f(x,y) = 1} and may, at pair (x,y),
query only pairs below max(x,y) * B + B for its declared use bound B.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Iterable, Optional, Tuple

from .coloring import Coloring, pair_key


class InconsistentFunctionalError(ValueError):
    """Two compatible axioms with the same input disagree on the output."""


class UseBoundError(ValueError):
    """An axiom queries a pair outside its declared use region."""


class _Divergent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DIVERGENT"


class _Unknown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNKNOWN"


DIVERGENT = _Divergent()
#: three-valued evaluation result under a partial oracle
UNKNOWN = _Unknown()


def pair_code(x: int, y: int) -> int:
    """Bijective code of the unordered pair {x,y}, x < y, ordered by
    (max, min): (0,1) -> 0, (0,2) -> 1, (1,2) -> 2, (0,3) -> 3, ..."""
    x, y = pair_key(x, y)
    return y * (y - 1) // 2 + x


def pair_decode(code: int) -> Tuple[int, int]:
    y = (1 + isqrt(1 + 8 * code)) // 2
    while y * (y - 1) // 2 > code:
        y -= 1
    while (y + 1) * y // 2 <= code:
        y += 1
    x = code - y * (y - 1) // 2
    return (x, y)


@dataclass(frozen=True)
class Axiom:
    n: int
    pos: frozenset
    neg: frozenset
    out: int

    def __init__(self, n, pos=(), neg=(), out=1):
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "pos", frozenset(pos))
        object.__setattr__(self, "neg", frozenset(neg))
        object.__setattr__(self, "out", out)
        if out not in (0, 1):
            raise ValueError(f"axiom output must be 0 or 1, got {out!r}")
        if self.pos & self.neg:
            raise ValueError("axiom with overlapping positive and negative parts")

    def fires(self, oracle) -> bool:
        return self.pos <= oracle and not (self.neg & oracle)


def _compatible(a: Axiom, b: Axiom) -> bool:
    # both can fire on a common oracle
    return not (a.pos & b.neg) and not (b.pos & a.neg)


@dataclass(frozen=True)
class OracleFunctional:
    axioms: tuple
    monotone: bool = False

    def __init__(self, axioms: Iterable[Axiom], monotone: bool = False):
        object.__setattr__(self, "axioms", tuple(axioms))
        object.__setattr__(self, "monotone", monotone)
        if monotone:
            for ax in self.axioms:
                if ax.neg:
                    raise ValueError("negative condition in monotone-mode functional")

    def to_dict(self) -> dict:
        return {
            "axioms": [
                {"n": a.n, "pos": sorted(a.pos), "neg": sorted(a.neg), "out": a.out}
                for a in self.axioms
            ],
            "monotone": self.monotone,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OracleFunctional":
        axioms = [
            Axiom(a["n"], a.get("pos", ()), a.get("neg", ()), a.get("out", 1))
            for a in data.get("axioms", [])
        ]
        return cls(axioms, monotone=data.get("monotone", False))

    @classmethod
    def load(cls, path) -> "OracleFunctional":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@lru_cache(maxsize=None)
def _by_input(gamma: OracleFunctional):
    index = {}
    for pos, ax in enumerate(gamma.axioms):
        index.setdefault(ax.n, []).append((pos, ax))
    return {n: tuple(v) for n, v in index.items()}


@lru_cache(maxsize=None)
def _violations(gamma: OracleFunctional) -> tuple:
    bad = []
    for group in _by_input(gamma).values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                (pi, a), (pj, b) = group[i], group[j]
                if a.out != b.out and _compatible(a, b):
                    bad.append((pi, pj))
    return tuple(bad)


def check_consistency(gamma: OracleFunctional):
    """Return [] when consistent, else the list of violating index pairs.

    Only axioms sharing an input can conflict, so the check is grouped
    by input.
    """
    return list(_violations(gamma))


def evaluate(gamma: OracleFunctional, oracle, n: int):
    """Output of the unique firing axiom for input n, or DIVERGENT."""
    if _violations(gamma):
        raise InconsistentFunctionalError("functional has conflicting axioms")
    oracle = frozenset(oracle)
    for _, ax in _by_input(gamma).get(n, ()):
        if ax.fires(oracle):
            return ax.out
    return DIVERGENT


def evaluate_partial(gamma: OracleFunctional, known_one, known_zero, n: int):
    """Three-valued evaluation when the oracle is only partially decided.

    known_one / known_zero are the atoms known in / known out. Returns
    the output when some axiom fires under every completion, DIVERGENT
    when every axiom fails under every completion, UNKNOWN otherwise.
    """
    undetermined = False
    for _, ax in _by_input(gamma).get(n, ()):
        if ax.pos <= known_one and ax.neg <= known_zero:
            return ax.out
        if (ax.pos & known_zero) or (ax.neg & known_one):
            continue  # definitely does not fire
        undetermined = True
    return UNKNOWN if undetermined else DIVERGENT


@dataclass(frozen=True)
class ColoringTransformer:
    """Oracle functional on coloring oracles with an explicit use bound.

    The value at pair (x, y) is functional(pair_code(x, y)) on the
    oracle of color-1 pair codes; every axiom must confine its queries
    to pairs whose elements are below max(x, y) * use_bound + use_bound.
    """

    functional: OracleFunctional
    use_bound: int

    def __post_init__(self):
        if self.use_bound < 1:
            raise ValueError("use bound must be positive")
        for ax in self.functional.axioms:
            x, y = pair_decode(ax.n)
            limit = y * self.use_bound + self.use_bound
            for code in ax.pos | ax.neg:
                _, v = pair_decode(code)
                if v >= limit:
                    raise UseBoundError(
                        f"axiom for pair ({x},{y}) queries pair with element {v} "
                        f">= use limit {limit}"
                    )

    def to_dict(self) -> dict:
        d = self.functional.to_dict()
        d["use_bound"] = self.use_bound
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ColoringTransformer":
        return cls(OracleFunctional.from_dict(data), use_bound=data["use_bound"])

    @classmethod
    def load(cls, path) -> "ColoringTransformer":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def coloring_oracle(f: Coloring) -> frozenset:
    return frozenset(
        pair_code(x, y) for (x, y), c in f.table.items() if c == 1
    )


@dataclass(frozen=True)
class TransformResult:
    coloring: Optional[Coloring]
    undecided: Optional[tuple]  # first pair that could not be decided, or None


def apply_transformer(phi: ColoringTransformer, f: Coloring) -> TransformResult:
    """Image coloring on the largest horizon where every pair is decided.

    A pair (x, y) is decided when its whole use region lies below the
    source horizon and the functional converges there.
    """
    if check_consistency(phi.functional):
        raise InconsistentFunctionalError("functional has conflicting axioms")
    oracle = coloring_oracle(f)
    b = phi.use_bound
    table = {}
    undecided = None
    new_horizon = f.horizon
    for y in range(1, f.horizon):
        if y * b + b > f.horizon:
            new_horizon = min(new_horizon, y)
            break
        row_ok = True
        for x in range(y):
            val = evaluate(phi.functional, oracle, pair_code(x, y))
            if val is DIVERGENT:
                undecided = (x, y)
                row_ok = False
                break
            table[(x, y)] = val
        if not row_ok:
            new_horizon = min(new_horizon, y)
            break
    if undecided is None and new_horizon < f.horizon:
        undecided = (0, new_horizon)
    out_table = {
        (x, y): c for (x, y), c in table.items() if y < new_horizon
    }
    if new_horizon < 2:
        return TransformResult(coloring=None, undecided=undecided or (0, 1))
    return TransformResult(
        coloring=Coloring(horizon=new_horizon, table=out_table), undecided=undecided
    )


def identity_transformer(horizon: int) -> ColoringTransformer:
    """Copies the oracle color of every pair below the horizon; B = 1."""
    axioms = []
    for y in range(1, horizon):
        for x in range(y):
            code = pair_code(x, y)
            axioms.append(Axiom(code, pos={code}, out=1))
            axioms.append(Axiom(code, neg={code}, out=0))
    return ColoringTransformer(OracleFunctional(axioms), use_bound=1)


def constant_transformer(color: int, horizon: int) -> ColoringTransformer:
    axioms = [
        Axiom(pair_code(x, y), out=color)
        for y in range(1, horizon)
        for x in range(y)
    ]
    return ColoringTransformer(OracleFunctional(axioms), use_bound=1)


def flip_transformer(horizon: int) -> ColoringTransformer:
    """Outputs 1 minus the oracle color of every pair; B = 1."""
    axioms = []
    for y in range(1, horizon):
        for x in range(y):
            code = pair_code(x, y)
            axioms.append(Axiom(code, pos={code}, out=0))
            axioms.append(Axiom(code, neg={code}, out=1))
    return ColoringTransformer(OracleFunctional(axioms), use_bound=1)
