"""Forcing conditions for building stable colorings.

A condition is a finite coloring sigma on pairs below its length plus a
limit function l assigning each row a (color, point) pair; validity
demands sigma(x, y) = color for every y past the point. Extension is
data-preserving prolongation. Pressing a button triple (x, a, b) means
arranging sigma(a, b), l(a).color, l(b).color to be not all equal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .coloring import Coloring, pair_key


class InvalidConditionError(ValueError):
    pass


class PressBlockedError(ValueError):
    """Every completion leaves the three press values equal."""


@dataclass(frozen=True)
class ButtonTriple:
    x: int
    a: int
    b: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"button ({self.x},{self.a},{self.b}) needs a < b")


@dataclass(frozen=True)
class Condition:
    """Forcing condition: sigma total on pairs below length, limit total
    on rows below length. Not validated at construction; see
    validate_condition."""

    length: int
    sigma: dict
    limit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.length,
            "sigma": [[x, y, c] for (x, y), c in sorted(self.sigma.items())],
            "l": [[x, i, z] for x, (i, z) in sorted(self.limit.items())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Condition":
        sigma = {}
        for x, y, c in data.get("sigma", []):
            if (x, y) in sigma:
                raise ValueError(f"duplicate sigma entry ({x},{y})")
            sigma[(x, y)] = c
        limit = {}
        for x, i, z in data.get("l", []):
            if x in limit:
                raise ValueError(f"duplicate limit entry for row {x}")
            limit[x] = (i, z)
        return cls(length=data["n"], sigma=sigma, limit=limit)

    @classmethod
    def load(cls, path) -> "Condition":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def restrict(self, m: int) -> "Condition":
        """Initial segment of length m."""
        if m > self.length:
            raise ValueError("cannot restrict upward")
        return Condition(
            length=m,
            sigma={k: v for k, v in self.sigma.items() if k[1] < m},
            limit={x: v for x, v in self.limit.items() if x < m},
        )


EMPTY_CONDITION = Condition(length=0, sigma={}, limit={})


def validate_condition(p: Condition):
    """Empty list when valid; otherwise the violations.

    Violations are tuples: ("limit-conflict", x, y) when sigma
    contradicts a limit entry, ("missing-sigma", x, y), ("bad-sigma", x,
    y), ("missing-limit", x), ("bad-limit", x).
    """
    out = []
    n = p.length
    for x in range(n):
        for y in range(x + 1, n):
            if (x, y) not in p.sigma:
                out.append(("missing-sigma", x, y))
            elif p.sigma[(x, y)] not in (0, 1):
                out.append(("bad-sigma", x, y))
    for (x, y) in p.sigma:
        if not 0 <= x < y < n:
            out.append(("bad-sigma", x, y))
    for x in range(n):
        if x not in p.limit:
            out.append(("missing-limit", x))
    for x, entry in p.limit.items():
        if not 0 <= x < n or entry[0] not in (0, 1) or entry[1] < 0:
            out.append(("bad-limit", x))
            continue
        i, z = entry
        for y in range(max(z, x + 1), n):
            if p.sigma.get((x, y)) != i:
                out.append(("limit-conflict", x, y))
    return out


def _require_valid(p: Condition):
    bad = validate_condition(p)
    if bad:
        raise InvalidConditionError(f"invalid condition: {bad[:5]}")


def extends(q: Condition, p: Condition) -> bool:
    """Data-preserving prolongation: q keeps all of p's sigma and limit
    values and is at least as long."""
    _require_valid(q)
    _require_valid(p)
    if q.length < p.length:
        return False
    for x in range(p.length):
        for y in range(x + 1, p.length):
            if q.sigma[(x, y)] != p.sigma[(x, y)]:
                return False
        if q.limit[x] != p.limit[x]:
            return False
    return True


def press_check(q: Condition, t: ButtonTriple) -> bool:
    """True when sigma(a, b), l(a).color, l(b).color all exist and are
    not all equal."""
    if t.b >= q.length:
        return False
    vals = (q.sigma[(t.a, t.b)], q.limit[t.a][0], q.limit[t.b][0])
    return len(set(vals)) > 1


def _resolved_sigma(p, target, assigned, predetermined, pair):
    """Value of sigma at pair, or None while still free."""
    x, y = pair
    if y < p.length:
        return p.sigma[(x, y)]
    if pair in assigned:
        return assigned[pair]
    return predetermined.get(pair)


def _resolved_limit_color(p, fixed, assigned_l, row):
    if row < p.length:
        return p.limit[row][0]
    if row in assigned_l:
        return assigned_l[row][0]
    if row in fixed:
        return fixed[row][0]
    return None


def complete_condition(
    p: Condition,
    target: int,
    sigma_fixed: Optional[dict] = None,
    limit_fixed: Optional[dict] = None,
    nae: Sequence[Tuple[int, int]] = (),
    neq: Sequence[Tuple[Tuple[int, int], int]] = (),
) -> Optional[Condition]:
    """Lexicographically least valid prolongation of p to the target
    length, or None when none satisfies the constraints.

    Decision order: new sigma entries by (column, row) with value order
    0 < 1, then new limit rows ascending with value order (color, point)
    lexicographic, points running up to the target length.

    sigma_fixed / limit_fixed pin individual new entries. Every pair
    (a, b) in nae requires sigma(a,b), l(a).color, l(b).color not all
    equal; every ((a, b), r) in neq requires sigma(a,b) != l(r).color.
    """
    _require_valid(p)
    n0 = p.length
    if target < n0:
        raise ValueError("target below current length")
    sigma_fixed = dict(sigma_fixed or {})
    limit_fixed = dict(limit_fixed or {})
    nae = [pair_key(a, b) for a, b in nae]
    neq = [(pair_key(a, b), r) for (a, b), r in neq]
    for (a, b) in nae:
        if b >= target:
            raise ValueError(f"constraint pair ({a},{b}) beyond target {target}")
    for (a, b), r in neq:
        if b >= target or r >= target:
            raise ValueError("constraint beyond target")

    # values of new sigma entries already dictated by limit rows, old or pinned
    predetermined = {}

    def predetermine(pair, c):
        x, y = pair
        if y < n0:
            return p.sigma[pair] == c
        if pair in predetermined:
            return predetermined[pair] == c
        predetermined[pair] = c
        return True

    for x in range(n0):
        i, z = p.limit[x]
        for y in range(max(z, x + 1, n0), target):
            if not predetermine((x, y), i):
                return None
    for x in list(limit_fixed):
        i, z = limit_fixed[x]
        if x < n0:
            if p.limit[x] != (i, z):
                return None
            del limit_fixed[x]
            continue
        for y in range(max(z, x + 1), target):
            if not predetermine((x, y), i):
                return None
    for pair, c in sigma_fixed.items():
        if not predetermine(pair_key(*pair), c):
            return None
    # a disequality whose row color is already settled pins its pair
    for pair, r in neq:
        vr = _resolved_limit_color(p, limit_fixed, {}, r)
        if vr is not None and not predetermine(pair, 1 - vr):
            return None
    # a not-all-equal whose two row colors agree pins its pair likewise
    for a, b in nae:
        va = _resolved_limit_color(p, limit_fixed, {}, a)
        vb = _resolved_limit_color(p, limit_fixed, {}, b)
        if va is not None and va == vb and not predetermine((a, b), 1 - va):
            return None

    new_pairs = [(x, y) for y in range(n0, target) for x in range(y)]
    new_rows = list(range(n0, target))

    def nae_feasible(assigned, assigned_l, pair_cursor):
        for (a, b) in nae:
            vs = _resolved_sigma(p, target, assigned, predetermined, (a, b))
            va = _resolved_limit_color(p, limit_fixed, assigned_l, a)
            vb = _resolved_limit_color(p, limit_fixed, assigned_l, b)
            if vs is not None and va is not None and vb is not None:
                if vs == va == vb:
                    return False
        for (pair, r) in neq:
            vs = _resolved_sigma(p, target, assigned, predetermined, pair)
            vr = _resolved_limit_color(p, limit_fixed, assigned_l, r)
            if vs is not None and vr is not None and vs == vr:
                return False
        return True

    def sigma_at(assigned, pair):
        x, y = pair
        return p.sigma[pair] if y < n0 else assigned[pair]

    def assign_rows(idx, assigned, assigned_l):
        if idx == len(new_rows):
            return dict(assigned_l)
        x = new_rows[idx]
        if x in limit_fixed:
            i, z = limit_fixed[x]
            ok = all(
                sigma_at(assigned, (x, y)) == i for y in range(max(z, x + 1), target)
            )
            candidates = [limit_fixed[x]] if ok else []
        else:
            candidates = []
            for i in (0, 1):
                z_min = 0
                for y in range(x + 1, target):
                    if sigma_at(assigned, (x, y)) != i:
                        z_min = y + 1
                candidates.extend((i, z) for z in range(z_min, target + 1))
            candidates.sort()
        for cand in candidates:
            assigned_l[x] = cand
            if nae_feasible(assigned, assigned_l, None):
                result = assign_rows(idx + 1, assigned, assigned_l)
                if result is not None:
                    return result
            del assigned_l[x]
        return None

    # only pairs sitting inside a constraint can influence row-phase
    # satisfiability, so everything else may take 0 without a choice point
    constraint_pairs = {pk for pk in nae} | {pk for pk, _ in neq}

    def assign_sigma(idx, assigned):
        added = []

        def unwind():
            for k in added:
                del assigned[k]

        while idx < len(new_pairs):
            pair = new_pairs[idx]
            if pair in predetermined:
                assigned[pair] = predetermined[pair]
                added.append(pair)
                if pair in constraint_pairs and not nae_feasible(assigned, {}, idx):
                    unwind()
                    return None
                idx += 1
            elif pair in constraint_pairs:
                for v in (0, 1):
                    assigned[pair] = v
                    if nae_feasible(assigned, {}, idx):
                        result = assign_sigma(idx + 1, assigned)
                        if result is not None:
                            return result
                    del assigned[pair]
                unwind()
                return None
            else:
                assigned[pair] = 0
                added.append(pair)
                idx += 1
        result = assign_rows(0, assigned, {})
        if result is None:
            unwind()
        return result

    solution = {}
    rows = assign_sigma(0, solution)
    if rows is None:
        return None
    sigma = dict(p.sigma)
    sigma.update(solution)
    limit = dict(p.limit)
    limit.update(rows)
    out = Condition(length=target, sigma=sigma, limit=limit)
    assert not validate_condition(out)
    return out


def extend_pressing(q: Condition, t: ButtonTriple, target_length: int) -> Condition:
    """Least valid extension of q to the target length pressing t.

    Raises PressBlockedError when all three press values are already
    frozen equal in q (the only way a press can be impossible).
    """
    _require_valid(q)
    if target_length <= t.b:
        raise ValueError("target length must exceed the button's second row")
    r = complete_condition(q, target_length, nae=[(t.a, t.b)])
    if r is None:
        raise PressBlockedError(f"button ({t.x},{t.a},{t.b}) is frozen equal in q")
    assert press_check(r, t)
    return r


def assemble_coloring(chain: Sequence[Condition]) -> Coloring:
    """Coloring carried by a decreasing chain of conditions: the data of
    the last condition, with limit points bumped past their own row so
    they are valid two-sided annotations."""
    if not chain:
        raise ValueError("empty chain")
    for earlier, later in zip(chain, chain[1:]):
        if not extends(later, earlier):
            raise ValueError("input is not a chain under extension")
    last = chain[-1]
    _require_valid(last)
    limits = {x: (i, max(z, x + 1)) for x, (i, z) in last.limit.items()}
    return Coloring(horizon=last.length, table=dict(last.sigma), limits=limits)
