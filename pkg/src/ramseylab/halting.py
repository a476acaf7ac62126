"""Coding a staged enumeration into a stable coloring and decoding it
back out of any increasing pair-split solution.

The enumeration stands in for a halting set: a monotone stage list over
a finite domain, settled at its last stage. The coding coloring puts
color 0 on pairs whose gap is at most the worst least-modulus below the
left element, so color-1 pairs have gaps long enough to read membership
off the stage list.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable

from .coloring import Coloring, JoinedSet


class InsufficientSolutionError(ValueError):
    """The joined set lacks the elements the decoder needs."""


@dataclass(frozen=True)
class CEApproximation:
    """Monotone staged enumeration of a subset of {0, ..., domain-1}."""

    domain: int
    stages: tuple

    def __init__(self, domain: int, stages: Iterable[Iterable[int]]):
        frozen = tuple(frozenset(s) for s in stages)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "stages", frozen)
        if domain < 0:
            raise ValueError("negative domain")
        if not frozen:
            raise ValueError("need at least one stage")
        for s in frozen:
            if any(not 0 <= e < domain for e in s):
                raise ValueError("stage element outside domain")
        for a, b in zip(frozen, frozen[1:]):
            if not a <= b:
                raise ValueError("stages must be monotone nondecreasing")

    @property
    def final(self) -> frozenset:
        return self.stages[-1]

    def to_dict(self) -> dict:
        return {"domain": self.domain, "stages": [sorted(s) for s in self.stages]}

    @classmethod
    def from_dict(cls, data: dict) -> "CEApproximation":
        return cls(data["domain"], data.get("stages", []))

    @classmethod
    def load(cls, path) -> "CEApproximation":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def least_modulus(approx: CEApproximation, z: int) -> int:
    """Least stage after which membership below z+1 never changes."""
    if not 0 <= z < approx.domain:
        raise ValueError(f"{z} outside domain {approx.domain}")
    window = frozenset(range(z + 1))
    final = approx.final & window
    mu = 0
    for s, stage in enumerate(approx.stages):
        if stage & window != final:
            mu = s + 1
    return mu


def _threshold(approx: CEApproximation, x: int) -> int:
    bound = min(x, approx.domain - 1)
    if bound < 0:
        return 0
    return max(least_modulus(approx, z) for z in range(bound + 1))


def build_coding_coloring(approx: CEApproximation, horizon: int) -> Coloring:
    """Coloring with f(x, y) = 0 exactly when y - x is at most the worst
    least modulus at or below x; every row has limit color 1."""
    if horizon < 2:
        raise ValueError("degenerate horizon")
    thresholds = [_threshold(approx, x) for x in range(horizon)]
    table = {}
    for x in range(horizon):
        for y in range(x + 1, horizon):
            table[(x, y)] = 0 if y - x <= thresholds[x] else 1
    limits = {x: (1, thresholds[x] + x + 1) for x in range(horizon)}
    return Coloring(horizon=horizon, table=table, limits=limits)


def decode_membership(approx: CEApproximation, z_set: JoinedSet, z: int) -> bool:
    """Read membership of z out of an increasing pair-split solution.

    Finds the least left element x >= z and the least right element
    y > x; the gap y - x then points at a stage past the modulus of z
    (clamped to the settled final stage when it overshoots).
    """
    if not 0 <= z < approx.domain:
        raise ValueError(f"{z} outside domain {approx.domain}")
    left, right = z_set.left, z_set.right
    xs = [u for u in left if u >= z]
    if not xs:
        raise InsufficientSolutionError(f"no left element at or above {z}")
    x = min(xs)
    ys = [v for v in right if v > x]
    if not ys:
        raise InsufficientSolutionError(f"no right element above {x}")
    y = min(ys)
    stage_index = min(y - x, len(approx.stages) - 1)
    return z in approx.stages[stage_index]


def random_approximation(seed: int, domain: int, stage_count: int) -> CEApproximation:
    """Seeded random monotone enumeration with stage_count stages."""
    if stage_count < 1:
        raise ValueError("need at least one stage")
    rng = random.Random(seed)
    current = set()
    stages = []
    for _ in range(stage_count):
        for e in range(domain):
            if e not in current and rng.random() < 0.15:
                current.add(e)
        stages.append(frozenset(current))
    return CEApproximation(domain, stages)
