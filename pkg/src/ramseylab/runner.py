"""Stage-construction runner.

Threads a forcing condition, per-transformer segment pairs, a reservoir
and a family of reserved sets through scheduled steps: segment growth
steps, two-label diagonalization walks against the left segment, and
three-label button-pressing walks against the right segment. Every step
emits a transcript event carrying enough raw data (condition dumps,
buttons, witnesses) to re-verify its claims independently.

Forcing a limit fact here means: the condition's limit annotations plus
the transformer's use bound determine the transformed color of (x, u)
for every u between some stabilization point and the working horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product
from typing import Dict, List, Optional, Tuple

from .coloring import encode_join, pair_key
from .forcing import (
    ButtonTriple,
    Condition,
    EMPTY_CONDITION,
    complete_condition,
    extends,
    press_check,
    validate_condition,
)
from .functionals import (
    ColoringTransformer,
    OracleFunctional,
    constant_transformer,
    evaluate_partial,
    flip_transformer,
    identity_transformer,
    pair_code,
    pair_decode,
)
from .trees import (
    LabeledTree,
    TreeParams,
    build_tree,
    compute_sort,
    configuration,
    label_tree,
    labeled_subtree,
    prune,
    query_inputs,
    share_column,
    _inf_count,
)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class StageState:
    condition: Condition
    segments: dict  # (phi_id, column j) -> frozenset of joined codes
    reservoir: tuple
    family: tuple  # reserved sets, each a frozenset
    horizon: int

    def segment(self, phi_id: str, j: int) -> frozenset:
        return self.segments.get((phi_id, j), frozenset())

    def snapshot(self) -> dict:
        return {
            "condition": self.condition.to_dict(),
            "segments": {
                f"{pid}:{j}": sorted(v) for (pid, j), v in sorted(self.segments.items())
            },
            "reservoir": list(self.reservoir),
            "family": [sorted(s) for s in self.family],
            "horizon": self.horizon,
        }


@dataclass(frozen=True)
class StepOutcome:
    kind: str  # extended-segments | reserved-set-added | path-reservoir | diagonalized | blocked | noop
    payload: dict
    rationale: str


# ---------------------------------------------------------------------------
# forced evaluation of a transformer under a condition


def _atom_status(cond: Condition, code: int) -> Optional[int]:
    u, v = pair_decode(code)
    if v < cond.length:
        return cond.sigma[(u, v)]
    if u < cond.length:
        i, z = cond.limit[u]
        if v >= z:
            return i
    return None


def forced_value(phi: ColoringTransformer, cond: Condition, x: int, y: int):
    """Transformed color of the pair forced by the condition, or UNKNOWN
    / DIVERGENT."""
    code = pair_code(x, y)
    known_one, known_zero = set(), set()
    for _, ax in _axioms_for(phi, code):
        for atom in ax.pos | ax.neg:
            status = _atom_status(cond, atom)
            if status == 1:
                known_one.add(atom)
            elif status == 0:
                known_zero.add(atom)
    return evaluate_partial(phi.functional, known_one, known_zero, code)


def _axioms_for(phi: ColoringTransformer, code: int):
    from .functionals import _by_input

    return _by_input(phi.functional).get(code, ())


def forces_limit(
    phi: ColoringTransformer, cond: Condition, x: int, j: int, horizon: int
) -> Optional[int]:
    """Least stabilization point below horizon-1 past which the condition
    forces the transformed color of (x, u) to be j, or None."""
    stab = x
    seen = False
    for u in range(x + 1, horizon):
        if forced_value(phi, cond, x, u) != j:
            stab = u
        else:
            seen = True
    if not seen or stab > horizon - 2:
        return None
    return stab


def _limit_extension(phi, cond, x, j, horizon):
    """Bounded deterministic search for an extension forcing the limit
    of x under the transformer to be j.

    Family searched: the condition itself, then least completions to
    length max(|cond|, x+1) pinning the limit entry of row x to each
    (color, point) in lexicographic order.
    """
    stab = forces_limit(phi, cond, x, j, horizon)
    if stab is not None:
        return cond, stab, None
    target = max(cond.length, x + 1)
    if x < cond.length:
        q = complete_condition(cond, target)
        if q is not None:
            stab = forces_limit(phi, q, x, j, horizon)
            if stab is not None:
                return q, stab, None
        return None
    for i in (0, 1):
        for z in range(0, target + 1):
            q = complete_condition(cond, target, limit_fixed={x: (i, z)})
            if q is None:
                continue
            stab = forces_limit(phi, q, x, j, horizon)
            if stab is not None:
                return q, stab, (i, z)
    return None


# ---------------------------------------------------------------------------
# segment growth step


def segment_step(
    state: StageState, phi: ColoringTransformer, phi_id: str, mode: str = "SPT"
) -> Tuple[StageState, StepOutcome]:
    """Either reserve a reservoir tail no extension can force to the
    needed limit, or grow both segments by one even and one odd code
    under an extension forcing split homogeneity and the four limits.

    mode SIPT additionally demands increasing picks per column and only
    constrains increasing cross pairs.
    """
    if mode not in ("SPT", "SIPT"):
        raise ScheduleError(f"unknown segment mode {mode!r}")
    cond = state.condition
    reservoir = state.reservoir
    if not reservoir:
        return state, StepOutcome(
            "blocked", {"reason": "empty reservoir"}, "no candidates to extend with"
        )

    found: Dict[Tuple[int, int], tuple] = {}
    for j in (0, 1):
        for x in reservoir:
            hit = _limit_extension(phi, cond, x, j, state.horizon)
            if hit is not None:
                found[(x, j)] = hit

    for j in (0, 1):
        covered = [x for x in reservoir if (x, j) in found]
        if len(covered) < len(reservoir):
            top = max(covered) if covered else min(reservoir) - 1
            tail = tuple(x for x in reservoir if x > top)
            family = state.family + (frozenset(tail),)
            payload = {
                "j": j,
                "set": sorted(tail),
                "condition": cond.to_dict(),
            }
            return replace(state, family=family), StepOutcome(
                "reserved-set-added",
                payload,
                "no extension forces that limit color on the reservoir tail",
            )

    seg0 = state.segment(phi_id, 0)
    seg1 = state.segment(phi_id, 1)
    for tup in product(reservoir, repeat=4):
        x00, x01, x10, x11 = tup
        if len({x00, x01} & {x10, x11}) > 0:
            continue
        if mode == "SIPT" and not (x00 < x01 and x10 < x11):
            continue
        result = _try_segment_tuple(
            state, phi, cond, (seg0, seg1), tup, mode
        )
        if result is None:
            continue
        q, stabs, new0, new1 = result
        fence = max(
            [s for s in stabs.values()]
            + [max(new0 | new1)]
        )
        new_res = tuple(x for x in reservoir if x > fence)
        segments = dict(state.segments)
        segments[(phi_id, 0)] = new0
        segments[(phi_id, 1)] = new1
        new_state = replace(
            state, condition=q, segments=segments, reservoir=new_res
        )
        payload = {
            "picks": list(tup),
            "stabs": {str(x): s for x, s in stabs.items()},
            "segments": {"0": sorted(new0), "1": sorted(new1)},
            "reservoir": list(new_res),
            "condition_before": cond.to_dict(),
            "condition": q.to_dict(),
            "mode": mode,
        }
        return new_state, StepOutcome(
            "extended-segments",
            payload,
            "extension forces split homogeneity and all four limit colors",
        )
    return state, StepOutcome(
        "blocked",
        {"reason": "no four-element extension verifies within the horizon"},
        "bounded tuple search exhausted",
    )


def _cross_pairs(joined: frozenset, mode: str):
    left = {e // 2 for e in joined if e % 2 == 0}
    right = {e // 2 for e in joined if e % 2 == 1}
    pairs = set()
    for u in left:
        for v in right:
            if u == v:
                continue
            if mode == "SIPT" and not u < v:
                continue
            pairs.add(pair_key(u, v))
    return sorted(pairs)


def _try_segment_tuple(state, phi, cond, segs, tup, mode):
    x00, x01, x10, x11 = tup
    seg0, seg1 = segs
    new0 = seg0 | {2 * x00, 2 * x01 + 1}
    new1 = seg1 | {2 * x10, 2 * x11 + 1}
    limit_fixed = {}
    for x, j in ((x00, 0), (x01, 0), (x10, 1), (x11, 1)):
        hit = _limit_extension(phi, cond, x, j, state.horizon)
        if hit is None:
            return None
        _, _, fix = hit
        if fix is not None:
            if x in limit_fixed and limit_fixed[x] != fix:
                return None
            limit_fixed[x] = fix
    pairs0 = _cross_pairs(new0, mode)
    pairs1 = _cross_pairs(new1, mode)
    fresh = [
        p for p in sorted(set(pairs0) | set(pairs1)) if p[1] >= cond.length
    ]
    target = max(cond.length, max(tup) + 1)
    for values in product((0, 1), repeat=len(fresh)):
        sigma_fixed = dict(zip(fresh, values))
        q = complete_condition(
            cond, target, sigma_fixed=sigma_fixed, limit_fixed=limit_fixed
        )
        if q is None:
            continue
        stabs = {}
        ok = True
        for x, j in ((x00, 0), (x01, 0), (x10, 1), (x11, 1)):
            stab = forces_limit(phi, q, x, j, state.horizon)
            if stab is None:
                ok = False
                break
            stabs[x] = stab
        if not ok:
            continue
        for pairs, j in ((pairs0, 0), (pairs1, 1)):
            for u, v in pairs:
                if forced_value(phi, q, u, v) != j:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return q, stabs, new0, new1
    return None


# ---------------------------------------------------------------------------
# two-label diagonalization walk


def _capped_leaf(tree: LabeledTree):
    capped = [
        n
        for n, info in tree.nodes.items()
        if info.kind == "depth-exhausted" and len(n) == tree.params.depth_cap
    ]
    return min(capped) if capped else None


def _exhausted_leaf(tree: LabeledTree):
    bad = [n for n, info in tree.nodes.items() if info.kind == "depth-exhausted"]
    return min(bad) if bad else None


def _witness_use(gamma: OracleFunctional, oracle, queries) -> int:
    use = 0
    for q in queries:
        for ax in gamma.axioms:
            if ax.n == q and ax.fires(oracle):
                atoms = ax.pos | ax.neg
                if atoms:
                    use = max(use, max(atoms))
                break
    return use


def diag_step_two_label(
    state: StageState,
    phi: ColoringTransformer,
    gamma: OracleFunctional,
    phi_id: str,
    theta: Optional[int] = None,
    depth_cap: int = 4,
    variant: str = "plain",
) -> Tuple[StageState, StepOutcome]:
    """Walk the two-label labeled subtree against the left segment,
    forcing limit color 0 along the chosen path and diagonalizing at the
    first fully finite label, then extend the segment at a terminal."""
    cond = state.condition
    seg = state.segment(phi_id, 0)
    try:
        params = TreeParams(
            k=cond.length,
            gamma=gamma,
            segment=seg,
            reservoir=state.reservoir,
            arity=2,
            variant=variant,
            depth_cap=depth_cap,
        )
        tree = build_tree(params)
    except ValueError as exc:
        return state, StepOutcome("blocked", {"reason": str(exc)}, "tree construction failed")

    leaf = _capped_leaf(tree)
    if leaf is not None:
        new_res = tuple(leaf)
        payload = {"path": list(leaf), "reservoir": list(new_res)}
        return replace(state, reservoir=new_res), StepOutcome(
            "path-reservoir", payload, "a path survives to the depth cap"
        )
    bad = _exhausted_leaf(tree)
    if bad is not None:
        return state, StepOutcome(
            "blocked",
            {"reason": "reservoir exhausted without witness", "leaf": list(bad)},
            "tree is unlabelable",
        )

    labeled = label_tree(tree, theta)
    tl = labeled_subtree(labeled, theta)

    events: List[dict] = []
    q = cond
    diag = None
    stabs: Dict[int, int] = {}
    node = ()

    root_label = tl.label(())
    if _inf_count(root_label) == 0:
        a, b = int(root_label[0]), int(root_label[1])
        target = max(q.length, b + 1)
        q2 = complete_condition(q, target, nae=[(a, b)])
        if q2 is None:
            return state, StepOutcome(
                "blocked", {"reason": "root diagonalization impossible"}, "frozen values"
            )
        q = q2
        diag = (a, b)
        events.append(
            {"action": "bootstrap-diag", "pair": [a, b], "node": [], "condition": q.to_dict()}
        )

    while True:
        if tl.is_terminal(node):
            return _complete_walk(
                state, phi_id, 0, tl, node, q, diag, events, gamma, seg, variant
            )
        m = max(stabs.values(), default=-1) + 1
        kids = tl.kids(node)
        sel = [c for c in kids if c[-1] >= m]
        if not sel:
            return state, StepOutcome(
                "blocked",
                {"reason": "walker dead end", "node": list(node), "events": events},
                "no admissible successor",
            )
        mine = _inf_count(tl.label(node))
        kid_infs = {_inf_count(tl.label(c)) for c in kids}
        collapse_to_finite = mine > 0 and kid_infs == {0}

        if collapse_to_finite and diag is None:
            candidates = []
            for c in sel:
                lab = tl.label(c)
                a, b = int(lab[0]), int(lab[1])
                if b > q.length:
                    candidates.append((c[-1], a, b, c))
            advanced = False
            for x_star, a, b, child in sorted(candidates):
                hit = _forced_descend(phi, q, x_star, 0, state.horizon, nae=[(a, b)])
                if hit is None:
                    continue
                q, stab = hit
                stabs[x_star] = stab
                diag = (a, b)
                node = child
                events.append(
                    {
                        "action": "diag-descend",
                        "pair": [a, b],
                        "node": list(node),
                        "condition": q.to_dict(),
                    }
                )
                advanced = True
                break
            if advanced:
                continue
            return state, StepOutcome(
                "blocked",
                {"reason": "no tuple admits the diagonalizing extension", "events": events},
                "finite-scale failure of the collapse search",
            )

        # plain descent: force limit 0 at some admissible successor
        advanced = False
        for child in sorted(sel, key=lambda c: c[-1]):
            x_star = child[-1]
            hit = _forced_descend(phi, q, x_star, 0, state.horizon, nae=())
            if hit is None:
                continue
            q, stab = hit
            stabs[x_star] = stab
            node = child
            events.append(
                {"action": "descend", "node": list(node), "condition": q.to_dict()}
            )
            advanced = True
            break
        if advanced:
            continue
        reserved = frozenset(c[-1] for c in sel)
        family = state.family + (reserved,)
        payload = {
            "set": sorted(reserved),
            "condition": q.to_dict(),
            "events": events,
        }
        return replace(state, condition=q, family=family), StepOutcome(
            "reserved-set-added",
            payload,
            "no extension forces limit color 0 on any admissible successor",
        )


def _forced_descend(phi, cond, x, j, horizon, nae):
    """Least extension forcing the limit of x to j while honoring the
    not-all-equal constraints, searched over the single-row family."""
    target = max([cond.length, x + 1] + [b + 1 for _, b in nae])
    if x < cond.length:
        fixes = [None]
    else:
        fixes = [(i, z) for i in (0, 1) for z in range(0, target + 1)]
    for fix in fixes:
        limit_fixed = {x: fix} if fix is not None else {}
        q = complete_condition(cond, target, limit_fixed=limit_fixed, nae=list(nae))
        if q is None:
            continue
        stab = forces_limit(phi, q, x, j, horizon)
        if stab is not None:
            return q, stab
    return None


def _complete_walk(state, phi_id, column, tl, node, q, diag, events, functional, seg, variant):
    if diag is None:
        return state, StepOutcome(
            "blocked",
            {"reason": "terminal reached without a diagonalization", "events": events},
            "walk invariant violated",
        )
    info = tl.info(node)
    fl, fr, values = info.witness
    codes = frozenset(encode_join(fl, fr).elements)
    new_seg = seg | codes
    queries = query_inputs(values, tl.params.arity, variant)
    oracle = seg | codes
    use = _witness_use(functional, oracle, queries)
    fence = max([use] + [c for c in new_seg])
    new_res = tuple(x for x in state.reservoir if x > fence)
    segments = dict(state.segments)
    segments[(phi_id, column)] = new_seg
    a, b = diag
    payload = {
        "pair": [a, b],
        "pair_values": [q.sigma[(a, b)], q.limit[a][0], q.limit[b][0]],
        "witness": {"left": list(fl), "right": list(fr), "values": list(values)},
        "segment": f"{phi_id}:{column}",
        "new_segment": sorted(new_seg),
        "use": use,
        "reservoir": list(new_res),
        "condition": q.to_dict(),
        "events": events,
    }
    new_state = replace(
        state, condition=q, segments=segments, reservoir=new_res
    )
    return new_state, StepOutcome(
        "diagonalized",
        payload,
        "terminal witness extends the segment; the diagonalized pair kills "
        "homogeneity of any superset",
    )


# ---------------------------------------------------------------------------
# three-label button-pressing walk


def _validate_buttons(buttons) -> Dict[int, ButtonTriple]:
    table: Dict[int, ButtonTriple] = {}
    seen_b = set()
    for t in buttons:
        if t.x in table:
            raise ScheduleError(f"two buttons with first element {t.x}")
        if t.b in seen_b:
            raise ScheduleError(f"button second row {t.b} repeats")
        table[t.x] = t
        seen_b.add(t.b)
    return table


def _column_diag(q, button, pair, anchor_row, target):
    """Press the button while forcing sigma(pair) to disagree with the
    anchor row's limit color; when the anchor row is committed with a
    stabilization point at or below the pair's top, rebase that point
    past it and retry.

    Returns (condition, rebase record or None), or (None, None).
    """
    attempt = complete_condition(
        q, target, nae=[(button.a, button.b)], neq=[(pair, anchor_row)]
    )
    if attempt is not None:
        return attempt, None
    top = pair[1]
    if anchor_row < q.length and q.limit[anchor_row][1] <= top:
        i_old, z_old = q.limit[anchor_row]
        limit = dict(q.limit)
        limit[anchor_row] = (i_old, top + 1)
        rebased = Condition(q.length, dict(q.sigma), limit)
        # raising a stabilization point only weakens the validity constraint
        assert not validate_condition(rebased)
        attempt = complete_condition(
            rebased, target, nae=[(button.a, button.b)], neq=[(pair, anchor_row)]
        )
        if attempt is not None:
            record = {
                "row": anchor_row,
                "old": [i_old, z_old],
                "new": [i_old, top + 1],
            }
            return attempt, record
    return None, None


def diag_step_three_label(
    state: StageState,
    phi: ColoringTransformer,
    delta: OracleFunctional,
    phi_id: str,
    buttons,
    color: int = 1,
    theta: Optional[int] = None,
    depth_cap: int = 4,
    variant: str = "plain",
) -> Tuple[StageState, StepOutcome]:
    """Walk the three-label labeled subtree against the right segment.

    Every descent presses the button of the chosen element; the single
    diagonalization happens at the first transition whose label sheds
    infinities, with the column-split record steering the choices at the
    two-step transitions and pruning what would split the chosen pair
    across columns.
    """
    table = _validate_buttons(buttons)
    cond = state.condition
    seg = state.segment(phi_id, 1)
    try:
        params = TreeParams(
            k=cond.length,
            gamma=delta,
            segment=seg,
            reservoir=state.reservoir,
            arity=3,
            variant=variant,
            depth_cap=depth_cap,
        )
        tree = build_tree(params)
    except ValueError as exc:
        return state, StepOutcome("blocked", {"reason": str(exc)}, "tree construction failed")

    leaf = _capped_leaf(tree)
    if leaf is not None:
        new_res = tuple(leaf)
        return replace(state, reservoir=new_res), StepOutcome(
            "path-reservoir",
            {"path": list(leaf), "reservoir": list(new_res)},
            "a path survives to the depth cap",
        )
    bad = _exhausted_leaf(tree)
    if bad is not None:
        return state, StepOutcome(
            "blocked",
            {"reason": "reservoir exhausted without witness", "leaf": list(bad)},
            "tree is unlabelable",
        )

    labeled = label_tree(tree, theta)
    tl = compute_sort(labeled_subtree(labeled, theta), theta)

    events: List[dict] = []
    pressed: List[ButtonTriple] = []
    q = cond
    diag = None
    deferred = False
    node = ()
    path_nodes: List[tuple] = [()]

    def record(action, **extra):
        entry = {"action": action, "node": list(node), "condition": q.to_dict()}
        entry.update(extra)
        events.append(entry)

    def stab_of(x):
        s = forces_limit(phi, q, x, color, state.horizon)
        if s is not None:
            return s
        if x < q.length:
            return q.limit[x][1]
        return 0

    def blocked(reason):
        return state, StepOutcome(
            "blocked", {"reason": reason, "node": list(node), "events": events}, reason
        )

    root_label = tl.label(())
    if _inf_count(root_label) <= 1:
        a, b = int(root_label[0]), int(root_label[1])
        q2 = complete_condition(q, max(q.length, b + 1), nae=[(a, b)])
        if q2 is None:
            return blocked("root diagonalization impossible")
        q = q2
        diag = (a, b)
        record("bootstrap-diag", pair=[a, b])

    while True:
        if tl.is_terminal(node):
            if not all(press_check(q, t) for t in pressed):
                return blocked("a pressed button came undone")
            return _complete_walk(
                state, phi_id, 1, tl, node, q, diag, events, delta, seg, variant
            )
        kids = tl.kids(node)
        if not kids:
            return blocked("walker dead end: no kept successors")
        m = max((stab_of(e) for e in node), default=-1) + 1
        sel = [
            c
            for c in kids
            if c[-1] >= m and c[-1] in table and table[c[-1]].b > q.length
        ]
        if not sel:
            return blocked("no admissible successor with a fresh button")
        mine = _inf_count(tl.label(node))
        kid_inf_set = {_inf_count(tl.label(c)) for c in kids}
        s_kids = max(kid_inf_set)
        revised_transition = (
            mine > 0 and all(v < mine for v in kid_inf_set) and s_kids <= 1
        )
        prior_buttons = [table[e].b for e in node]

        def fresh(*entries):
            return all(
                v > q.length and all(v > pb for pb in prior_buttons) for v in entries
            )

        did_advance = False
        if revised_transition and diag is None:
            if mine >= 2 and s_kids == 0:
                # label collapses straight to finite: diagonalize on the
                # first two entries (three infinities) or the last two
                pos = (0, 1) if mine == 3 else (1, 2)
                for c in sorted(sel, key=lambda c: c[-1]):
                    lab = tl.label(c)
                    d1, d2 = int(lab[pos[0]]), int(lab[pos[1]])
                    if not fresh(d1, d2):
                        continue
                    bt = table[c[-1]]
                    q2 = complete_condition(
                        q,
                        max(q.length, bt.b + 1, d2 + 1),
                        nae=[(bt.a, bt.b), (d1, d2)],
                    )
                    if q2 is None:
                        continue
                    q = q2
                    pressed.append(bt)
                    diag = (d1, d2)
                    node = c
                    path_nodes.append(node)
                    record("press-diag", button=[bt.x, bt.a, bt.b], pair=[d1, d2])
                    did_advance = True
                    break
                if not did_advance:
                    return blocked("collapse transition admits no press-and-diagonalize")
            elif mine == 3 and s_kids == 1:
                for c in sorted(sel, key=lambda c: c[-1]):
                    lab = tl.label(c)
                    d1, d2 = int(lab[0]), int(lab[1])
                    if not fresh(d1, d2):
                        continue
                    bt = table[c[-1]]
                    q2 = complete_condition(
                        q,
                        max(q.length, bt.b + 1, d2 + 1),
                        nae=[(bt.a, bt.b), (d1, d2)],
                    )
                    if q2 is None:
                        continue
                    q = q2
                    pressed.append(bt)
                    diag = (d1, d2)
                    node = c
                    path_nodes.append(node)
                    record("press-diag", button=[bt.x, bt.a, bt.b], pair=[d1, d2])
                    did_advance = True
                    break
                if not did_advance:
                    return blocked("triple collapse admits no press-and-diagonalize")
            elif mine == 2 and s_kids == 1:
                k_idx = min(
                    i for i, n in enumerate(path_nodes) if _inf_count(tl.label(n)) == 2
                )
                cands = []
                for c in sorted(sel, key=lambda c: c[-1]):
                    lab = tl.label(c)
                    if fresh(int(lab[1])):
                        cands.append(c)
                if k_idx == 0:
                    for c in cands:
                        lab = tl.label(c)
                        d1, d2 = int(lab[0]), int(lab[1])
                        bt = table[c[-1]]
                        q2 = complete_condition(
                            q,
                            max(q.length, bt.b + 1, d2 + 1),
                            nae=[(bt.a, bt.b), (d1, d2)],
                        )
                        if q2 is None:
                            continue
                        q = q2
                        pressed.append(bt)
                        diag = (d1, d2)
                        node = c
                        path_nodes.append(node)
                        record("press-diag", button=[bt.x, bt.a, bt.b], pair=[d1, d2])
                        did_advance = True
                        break
                    if not did_advance:
                        return blocked("single-drop transition admits no extension")
                else:
                    x_star = path_nodes[k_idx][-1]
                    compatible = []
                    for c in cands:
                        if variant == "plain":
                            ok = share_column(tl, c, x_star, c[-1])
                        else:
                            ok = bool(
                                configuration(tl, c, x_star, c[-1]) & {"I", "II"}
                            )
                        if ok:
                            compatible.append(c)
                    if compatible:
                        for c in compatible:
                            lab = tl.label(c)
                            d1, d2 = int(lab[0]), int(lab[1])
                            bt = table[c[-1]]
                            y_star = c[-1]
                            q2, rebase = _column_diag(
                                q, bt, (d1, d2), d1, max(q.length, bt.b + 1, d2 + 1)
                            )
                            if q2 is None:
                                continue
                            q = q2
                            pressed.append(bt)
                            diag = (d1, d2)
                            node = c
                            path_nodes.append(node)
                            if rebase is not None:
                                record("rebase", rebase=rebase)
                                if not all(press_check(q, t) for t in pressed):
                                    return blocked("press lost across a rebase")
                            record(
                                "press-diag", button=[bt.x, bt.a, bt.b], pair=[d1, d2]
                            )
                            old_tl = tl
                            if variant == "plain":
                                pred = lambda s: share_column(old_tl, s, x_star, y_star)
                            else:
                                pred = lambda s: "III" not in configuration(
                                    old_tl, s, x_star, y_star
                                )
                            tl = prune(tl, node, pred)
                            record("prune", anchor=[x_star, y_star])
                            did_advance = True
                            break
                        if not did_advance:
                            return blocked("column-compatible choice admits no extension")
                    else:
                        deferred = True
            elif mine == 1 and s_kids == 0 and deferred:
                k_idx = min(
                    i for i, n in enumerate(path_nodes) if _inf_count(tl.label(n)) == 2
                )
                l_idx = min(
                    i for i, n in enumerate(path_nodes) if _inf_count(tl.label(n)) == 1
                )
                x_star = path_nodes[k_idx][-1]
                y_star = path_nodes[l_idx][-1]
                cands = []
                for c in sorted(sel, key=lambda c: c[-1]):
                    lab = tl.label(c)
                    if fresh(int(lab[2])):
                        cands.append(c)

                def relates(c, anchor, want):
                    if variant == "plain":
                        return share_column(tl, c, anchor, c[-1])
                    return want in configuration(tl, c, anchor, c[-1])

                p_two = [c for c in cands if relates(c, y_star, "II")]
                p_one = [c for c in cands if relates(c, x_star, "I")]
                branch = None
                if p_two:
                    branch = ("second", y_star, p_two, 1, 2)
                elif p_one:
                    branch = ("first", x_star, p_one, 0, 2)
                if branch is None:
                    return blocked("both column-compatible sets are empty")
                _, anchor_elem, pool, lo, hi = branch
                for c in pool:
                    lab = tl.label(c)
                    d1, d2 = int(lab[lo]), int(lab[hi])
                    bt = table[c[-1]]
                    z_star = c[-1]
                    q2, rebase = _column_diag(
                        q, bt, (d1, d2), d1, max(q.length, bt.b + 1, d2 + 1)
                    )
                    if q2 is None:
                        continue
                    q = q2
                    pressed.append(bt)
                    diag = (d1, d2)
                    node = c
                    path_nodes.append(node)
                    if rebase is not None:
                        record("rebase", rebase=rebase)
                        if not all(press_check(q, t) for t in pressed):
                            return blocked("press lost across a rebase")
                    record("press-diag", button=[bt.x, bt.a, bt.b], pair=[d1, d2])
                    old_tl = tl
                    want = "II" if branch[0] == "second" else "I"
                    if variant == "plain":
                        pred = lambda s: share_column(old_tl, s, anchor_elem, z_star)
                    else:
                        pred = lambda s: want in configuration(
                            old_tl, s, anchor_elem, z_star
                        )
                    tl = prune(tl, node, pred)
                    record("prune", anchor=[anchor_elem, z_star])
                    deferred = False
                    did_advance = True
                    break
                if not did_advance:
                    return blocked("deferred diagonalization admits no extension")

        if did_advance:
            if not all(press_check(q, t) for t in pressed):
                return blocked("a pressed button came undone")
            continue

        # plain descent: press the button of the least admissible element
        advanced = False
        for c in sorted(sel, key=lambda c: c[-1]):
            bt = table[c[-1]]
            q2 = complete_condition(
                q, max(q.length, bt.b + 1), nae=[(bt.a, bt.b)]
            )
            if q2 is None:
                continue
            q = q2
            pressed.append(bt)
            node = c
            path_nodes.append(node)
            record("press", button=[bt.x, bt.a, bt.b])
            advanced = True
            break
        if not advanced:
            return blocked("no successor's button can be pressed")
        if not all(press_check(q, t) for t in pressed):
            return blocked("a pressed button came undone")


# ---------------------------------------------------------------------------
# schedules and transcripts


def build_transformer(spec: dict, horizon: int) -> ColoringTransformer:
    kind = spec.get("kind")
    if kind == "identity":
        return identity_transformer(horizon)
    if kind == "constant":
        return constant_transformer(spec.get("color", 1), horizon)
    if kind == "flip":
        return flip_transformer(horizon)
    if kind is None and "axioms" in spec:
        return ColoringTransformer.from_dict(spec)
    raise ScheduleError(f"unknown transformer spec {spec!r}")


def build_functional(spec: dict) -> OracleFunctional:
    return OracleFunctional.from_dict(spec)


def _initial_state(config: dict) -> StageState:
    reservoir = config.get("reservoir", [])
    if isinstance(reservoir, dict):
        reservoir = list(
            range(reservoir["start"], reservoir["start"] + reservoir["count"])
        )
    cond = EMPTY_CONDITION
    if "initial_condition" in config:
        cond = Condition.from_dict(config["initial_condition"])
        if validate_condition(cond):
            raise ScheduleError("invalid initial condition")
    return StageState(
        condition=cond,
        segments={},
        reservoir=tuple(reservoir),
        family=(),
        horizon=config.get("horizon", 24),
    )


def run_stages(config: dict) -> Tuple[StageState, List[dict]]:
    """Execute a schedule; the transcript carries one verifiable event
    per step and the run halts at the first blocked outcome."""
    state = _initial_state(config)
    horizon = state.horizon
    transformers = {
        name: build_transformer(spec, horizon)
        for name, spec in config.get("transformers", {}).items()
    }
    functionals = {
        name: build_functional(spec)
        for name, spec in config.get("functionals", {}).items()
    }
    transcript: List[dict] = []
    for idx, step in enumerate(config.get("steps", [])):
        tag = step["step"]
        before = state.snapshot()
        if tag == "q":
            phi = transformers[step["phi"]]
            state, outcome = segment_step(
                state, phi, step["phi"], step.get("mode", "SPT")
            )
        elif tag == "rA":
            phi = transformers[step["phi"]]
            gamma = functionals[step["gamma"]]
            state, outcome = diag_step_two_label(
                state,
                phi,
                gamma,
                step["phi"],
                theta=step.get("theta"),
                depth_cap=step.get("depth_cap", 4),
                variant=step.get("mode", "plain"),
            )
        elif tag == "rB":
            phi = transformers[step["phi"]]
            delta = functionals[step["delta"]]
            buttons = [ButtonTriple(x, a, b) for x, a, b in step["Q"]]
            state, outcome = diag_step_three_label(
                state,
                phi,
                delta,
                step["phi"],
                buttons,
                color=step.get("i", 1),
                theta=step.get("theta"),
                depth_cap=step.get("depth_cap", 4),
                variant=step.get("mode", "plain"),
            )
        elif tag == "p":
            outcome = StepOutcome(
                "noop", {}, "genericity stages are not simulated at desk scale"
            )
        else:
            raise ScheduleError(f"unknown step tag {tag!r}")
        event = {
            "stage": idx,
            "step": tag,
            "phi": step.get("phi"),
            "outcome": outcome.kind,
            "rationale": outcome.rationale,
            "payload": outcome.payload,
            "state_before": before,
            "state_after": state.snapshot(),
        }
        transcript.append(event)
        if outcome.kind == "blocked":
            break
    return state, transcript


def dump_transcript(transcript: List[dict], path):
    import json

    with open(path, "w") as fh:
        for event in transcript:
            fh.write(json.dumps(event) + "\n")


def load_transcript(path) -> List[dict]:
    import json

    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _not_all_equal(cond: Condition, a: int, b: int) -> bool:
    vals = (cond.sigma[(a, b)], cond.limit[a][0], cond.limit[b][0])
    return len(set(vals)) > 1


def verify_transcript(transcript: List[dict], config: dict) -> List[str]:
    """Independent replay checks; returns a list of problems, empty when
    every event's claims hold.

    Checks per event: diagonalized pairs are genuinely not-all-equal on
    the recorded final condition, every pressed button stays pressed in
    every later recorded condition of its stage, segments grow by one
    element per column and stay below the reservoir, forced-limit and
    forced-color claims of segment growth re-verify against the
    transformer, and the stage-final conditions form a chain under
    extension.
    """
    problems: List[str] = []
    horizon = config.get("horizon", 24)
    transformers = {
        name: build_transformer(spec, horizon)
        for name, spec in config.get("transformers", {}).items()
    }
    prev_final: Optional[Condition] = None
    for event in transcript:
        stage = event["stage"]
        kind = event["outcome"]
        payload = event["payload"]
        before = Condition.from_dict(event["state_before"]["condition"])
        after = Condition.from_dict(event["state_after"]["condition"])

        def bad(msg):
            problems.append(f"stage {stage} ({kind}): {msg}")

        if validate_condition(after):
            bad("final condition invalid")
            continue
        if prev_final is not None and not extends(before, prev_final):
            bad("stage-entry condition does not extend the previous final")
        if not extends(after, before):
            bad("stage-final condition does not extend the stage entry")
        prev_final = after

        walk = payload.get("events", [])
        conditions = [Condition.from_dict(e["condition"]) for e in walk]
        for i, e in enumerate(walk):
            if e["action"] in ("press", "press-diag"):
                x, a, b = e["button"]
                t = ButtonTriple(x, a, b)
                for later in conditions[i:] + [after]:
                    if not press_check(later, t):
                        bad(f"button {e['button']} not pressed in a later condition")
                        break
            if e["action"] in ("bootstrap-diag", "press-diag", "diag-descend"):
                a, b = e["pair"]
                c = conditions[i]
                if not _not_all_equal(c, a, b):
                    bad(f"diagonalized pair {e['pair']} is all-equal when made")
            if e["action"] == "rebase":
                # a rebase may leave the within-walk chain, but never the stage entry
                if not extends(conditions[i], before):
                    bad("rebased condition does not extend the stage entry")

        if kind == "diagonalized":
            a, b = payload["pair"]
            if not _not_all_equal(after, a, b):
                bad(f"diagonalized pair {payload['pair']} is all-equal in the final condition")
            vals = [after.sigma[(a, b)], after.limit[a][0], after.limit[b][0]]
            if vals != payload["pair_values"]:
                bad("recorded pair values disagree with the final condition")
            seg_key = payload["segment"]
            old_seg = set(event["state_before"]["segments"].get(seg_key, []))
            new_seg = set(payload["new_segment"])
            # the witness split may be empty, so equality is allowed here
            if not old_seg <= new_seg:
                bad("segment lost elements")
            if event["state_after"]["reservoir"] and new_seg:
                if max(new_seg) >= min(event["state_after"]["reservoir"]):
                    bad("segment not below the reservoir")
        elif kind == "extended-segments":
            phi = transformers[event["phi"]]
            picks = payload["picks"]
            mode = payload.get("mode", "SPT")
            for key in ("0", "1"):
                j = int(key)
                seg_key = f"{event['phi']}:{j}"
                old = set(event["state_before"]["segments"].get(seg_key, []))
                new = set(event["state_after"]["segments"][seg_key])
                old_left = {e for e in old if e % 2 == 0}
                new_left = {e for e in new if e % 2 == 0}
                old_right = old - old_left
                new_right = new - new_left
                if not (
                    len(new_left) == len(old_left) + 1
                    and len(new_right) == len(old_right) + 1
                ):
                    bad(f"segment {seg_key} did not grow one element per column")
                for u, v in _cross_pairs(frozenset(new), mode):
                    if forced_value(phi, after, u, v) != j:
                        bad(f"cross pair ({u},{v}) of segment {seg_key} not forced to {j}")
                        break
            for x_str, stab in payload["stabs"].items():
                x = int(x_str)
                j = 0 if x in picks[:2] else 1
                got = forces_limit(phi, after, x, j, horizon)
                if got != stab:
                    bad(f"limit of {x} not forced at the recorded point")
            res = event["state_after"]["reservoir"]
            allseg = [
                e
                for key in ("0", "1")
                for e in event["state_after"]["segments"][f"{event['phi']}:{key}"]
            ]
            if res and allseg and max(allseg) >= min(res):
                bad("segments not below the reservoir")
        elif kind == "reserved-set-added":
            fams_before = event["state_before"]["family"]
            fams_after = event["state_after"]["family"]
            if len(fams_after) != len(fams_before) + 1 or not fams_after[-1]:
                bad("family did not gain a nonempty set")
        elif kind == "path-reservoir":
            if event["state_after"]["reservoir"] != payload["path"]:
                bad("reservoir does not equal the surviving path")
            path = payload["path"]
            if any(a >= b for a, b in zip(path, path[1:])):
                bad("surviving path is not increasing")
    return problems

