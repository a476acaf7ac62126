"""Acceptance suite.

One test per criterion; each prints a PASS/FAIL line. The checks are
exact (discrete, tolerance-free) and every expected value is either
computed here by an independent definitional brute force or asserted
against frozen hand-checked instances.
"""

import copy
import random
import time
from itertools import combinations, product

import pytest

from conftest import random_condition
from schedules import CORPUS
from ramseylab.coloring import (
    JoinedSet,
    VACUOUS,
    check_homogeneity,
    encode_join,
    random_stable_coloring,
)
from ramseylab.forcing import (
    ButtonTriple,
    Condition,
    PressBlockedError,
    complete_condition,
    extend_pressing,
    extends,
    press_check,
    validate_condition,
)
from ramseylab.functionals import Axiom, OracleFunctional, check_consistency
from ramseylab.halting import (
    CEApproximation,
    build_coding_coloring,
    decode_membership,
    least_modulus,
    random_approximation,
)
from ramseylab.reductions import (
    forward_chain,
    ipt_to_homogeneous,
    limit_to_homogeneous,
)
from ramseylab.runner import run_stages, verify_transcript
from ramseylab.trees import (
    INF,
    TreeParams,
    UnlabelableError,
    build_tree,
    label_tree,
    labeled_subtree,
    transition_nodes,
)


def report(name, ok, detail=""):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# criterion 1: homogeneity oracle equivalence


def _oracle_homog(colors, elements):
    elements = sorted(elements)
    if len(elements) < 2:
        return VACUOUS
    seen = set()
    for i, x in enumerate(elements):
        for y in elements[i + 1 :]:
            seen.add(colors[x][y])
    return None if len(seen) > 1 else seen.pop()


def _oracle_cross(colors, left, right, increasing):
    seen = set()
    for x in left:
        for y in right:
            if x == y or (increasing and not x < y):
                continue
            seen.add(colors[x][y] if x < y else colors[y][x])
    if not seen:
        return VACUOUS
    return None if len(seen) > 1 else seen.pop()


def _oracle_limit(limits, elements):
    if not elements:
        return VACUOUS
    seen = {limits[x][0] for x in elements}
    return None if len(seen) > 1 else seen.pop()


def test_acceptance_homogeneity_oracle_equivalence():
    t0 = time.time()
    subsets = [list(c) for r in range(9) for c in combinations(range(8), r)]
    joined_raw = [
        frozenset(c) for r in range(7) for c in combinations(range(16), r)
    ]
    joined = [(JoinedSet(s), sorted(JoinedSet(s).left), sorted(JoinedSet(s).right))
              for s in joined_raw]
    mismatches = 0
    for seed in range(100):
        f = random_stable_coloring(seed, 8, min(3, 7))
        colors = [[None] * 8 for _ in range(8)]
        for (x, y), c in f.table.items():
            colors[x][y] = c
        for s in subsets:
            if check_homogeneity(f, s, "homog") != _oracle_homog(colors, s):
                mismatches += 1
            if check_homogeneity(f, s, "limit-homog") != _oracle_limit(f.limits, s):
                mismatches += 1
        for z, left, right in joined:
            if check_homogeneity(f, z, "p-homog") != _oracle_cross(
                colors, left, right, False
            ):
                mismatches += 1
            if check_homogeneity(f, z, "incr-p-homog") != _oracle_cross(
                colors, left, right, True
            ):
                mismatches += 1
    dt = time.time() - t0
    report(
        "homogeneity-oracle-equivalence",
        mismatches == 0 and dt < 60,
        f"{mismatches} mismatches, {dt:.1f}s",
    )


# ---------------------------------------------------------------------------
# criterion 2: translation soundness on randomized stable colorings


def test_acceptance_translation_soundness():
    t0 = time.time()
    rng = random.Random(20_26)
    failures = 0
    checked = {"limit": 0, "ipt": 0, "chain": 0}
    for seed in range(500):
        horizon = rng.randint(12, 40)
        stab = rng.randint(1, min(10, horizon - 1))
        f = random_stable_coloring(seed, horizon, stab)
        classes = {c: [x for x in range(horizon) if f.limits[x][0] == c] for c in (0, 1)}

        color = rng.choice([c for c in (0, 1) if classes[c]] or [0])
        pool = classes[color]
        if pool:
            ell = sorted(rng.sample(pool, min(len(pool), rng.randint(1, 8))))
            got = limit_to_homogeneous(f, ell, color)
            checked["limit"] += 1
            verdict = check_homogeneity(f, got, "homog")
            if not (set(got) <= set(ell)) or verdict not in (color, VACUOUS):
                failures += 1

        if len(pool) >= 1:
            hl = sorted(rng.sample(pool, min(len(pool), rng.randint(1, 3))))
            floor = max([f.limits[x][1] for x in hl] + [max(hl) + 1])
            tail = list(range(floor, horizon))
            if tail:
                hr = sorted(rng.sample(tail, min(len(tail), rng.randint(1, 3))))
                z = encode_join(hl, hr)
                assert check_homogeneity(f, z, "incr-p-homog") == color
                got = ipt_to_homogeneous(f, z)
                checked["ipt"] += 1
                verdict = check_homogeneity(f, got, "homog")
                if verdict not in (color, VACUOUS) or not set(got) <= set(hl):
                    failures += 1

                left = forward_chain("SIPT", "D", z)
                if check_homogeneity(f, left, "limit-homog") != color:
                    failures += 1
                h = limit_to_homogeneous(f, ell, color)
                if len(h) >= 2:
                    hv = check_homogeneity(f, h, "homog")
                    zz = forward_chain("SRT", "SPT", h)
                    if check_homogeneity(f, zz, "p-homog") != hv:
                        failures += 1
                    z2 = forward_chain("SPT", "SIPT", zz)
                    if check_homogeneity(f, z2, "incr-p-homog") != hv:
                        failures += 1
                    checked["chain"] += 1
    dt = time.time() - t0
    enough = checked["limit"] >= 400 and checked["ipt"] >= 400 and checked["chain"] >= 200
    report(
        "translation-soundness",
        failures == 0 and enough and dt < 120,
        f"{failures} failures over {checked}, {dt:.1f}s",
    )


# ---------------------------------------------------------------------------
# criterion 3: coding round trip


def test_acceptance_coding_round_trip():
    t0 = time.time()
    rng = random.Random(7)
    failures = 0
    total_samples = 0
    for trial in range(50):
        domain = rng.randint(2, 20)
        stage_count = rng.randint(1, 30)
        approx = random_approximation(trial, domain, stage_count)
        horizon = 60
        f = build_coding_coloring(approx, horizon)
        for x in range(horizon):
            if f.limits[x][0] != 1:
                failures += 1
        thresholds = {}
        for x in range(horizon):
            bound = min(x, domain - 1)
            thresholds[x] = max(least_modulus(approx, z) for z in range(bound + 1))
        samples = 0
        attempts = 0
        while samples < 200 and attempts < 4000:
            attempts += 1
            x1 = rng.randint(domain - 1, horizon - 10) if domain - 1 <= horizon - 10 else domain - 1
            left = {x1}
            if rng.random() < 0.4 and x1 > 0:
                left.add(rng.randrange(x1))
            right = set()
            ok = True
            for x in left:
                y = x + thresholds[x] + 1 + rng.randint(0, 3)
                if y >= horizon:
                    ok = False
                    break
                right.add(y)
            if not ok:
                continue
            z_set = encode_join(left, right)
            if check_homogeneity(f, z_set, "incr-p-homog") != 1:
                continue
            if not all(
                any(x >= z and any(y > x for y in right) for x in left)
                for z in range(domain)
            ):
                continue
            samples += 1
            for z in range(domain):
                if decode_membership(approx, z_set, z) != (z in approx.final):
                    failures += 1
        total_samples += samples
        if samples < 200:
            failures += 1
    dt = time.time() - t0
    report(
        "coding-round-trip",
        failures == 0 and dt < 180,
        f"{failures} failures, {total_samples} solutions decoded, {dt:.1f}s",
    )


# ---------------------------------------------------------------------------
# criteria 4 and 5: tree corpus against an independent brute force


def _tree_corpus():
    """Functional/reservoir pairs: at most 4 axioms, all values below 12,
    reservoirs of size at most 6. The crafted heads give fully
    terminating trees for every arity/variant combination."""
    corpus = [
        # the running two-axiom head
        (OracleFunctional([Axiom(0, pos={2}), Axiom(1, pos={5})]), (1, 2, 3, 4, 5, 6)),
        (OracleFunctional([]), (1, 2, 3, 4, 5, 6)),
        # both singletons terminate with the same pair
        (OracleFunctional([Axiom(0, pos={2}), Axiom(1, pos={2}),
                           Axiom(0, pos={4}), Axiom(1, pos={4})]), (1, 2)),
        # distinct pairs per singleton
        (OracleFunctional([Axiom(0, pos={2}), Axiom(1, pos={2}),
                           Axiom(2, pos={4}), Axiom(3, pos={4})]), (1, 2)),
        # shared second entry, conflicting firsts
        (OracleFunctional([Axiom(0, pos={2}), Axiom(5, pos={2}),
                           Axiom(1, pos={4}), Axiom(5, pos={4})]), (1, 2)),
        # triple fires on the top element only: depth-two terminals
        (OracleFunctional([Axiom(0, pos={4}), Axiom(1, pos={4}), Axiom(2, pos={4})]), (1, 2)),
        # shifted pair shape: odd input 1 (a=0), even input 4 (b=2)
        (OracleFunctional([Axiom(1, pos={2}), Axiom(4, pos={2}),
                           Axiom(1, pos={4}), Axiom(4, pos={4})]), (1, 2)),
        # shifted triple shape: inputs 1, 4, 7 decode to values 0, 2, 3
        (OracleFunctional([Axiom(1, pos={4}), Axiom(4, pos={4}), Axiom(7, pos={4})]), (1, 2)),
        (OracleFunctional([Axiom(1, pos={2}), Axiom(4, pos={2}), Axiom(7, pos={2})]), (1,)),
        (OracleFunctional(
            [Axiom(3, pos={2, 4}), Axiom(5, pos={2}), Axiom(7, pos={4}, neg={9})]
        ), (1, 2, 3, 4, 5, 6)),
    ]
    rng = random.Random(99)
    while len(corpus) < 26:
        axioms = []
        for _ in range(rng.randint(1, 4)):
            n = rng.randrange(12)
            pos = set(rng.sample(range(12), rng.randint(0, 3)))
            neg = set(rng.sample(range(12), rng.randint(0, 2))) - pos
            axioms.append(Axiom(n, pos=pos, neg=neg, out=1))
        g = OracleFunctional(axioms)
        if not check_consistency(g):
            corpus.append((g, (1, 2, 3, 4, 5, 6)))
    return corpus


def _brute_value(gamma, oracle, n):
    outs = {
        ax.out
        for ax in gamma.axioms
        if ax.n == n and set(ax.pos) <= oracle and not (set(ax.neg) & oracle)
    }
    assert len(outs) <= 1
    return outs.pop() if outs else None


def _tuples_from_ones(ones, k, arity, variant):
    """Witnessing value tuples readable off the set of inputs that
    converge to 1 on a fixed oracle."""
    if variant == "plain":
        pools = [sorted(v for v in ones if v >= k)] * arity
    else:
        odd = sorted((n - 1) // 2 for n in ones if n % 2 == 1 if (n - 1) // 2 >= k)
        even = sorted(n // 2 for n in ones if n % 2 == 0 if n // 2 >= k)
        pools = [odd, even] if arity == 2 else [odd, even, odd]
    out = set()

    def rec(pos, prev, acc):
        if pos == arity:
            out.add(tuple(acc))
            return
        for v in pools[pos]:
            if prev is None or v > prev:
                rec(pos + 1, v, acc + [v])

    rec(0, None, [])
    return out


def _brute_witnesses(gamma, ground, k, arity, variant, cache):
    """All witnessing value tuples over splits of the ground set: for
    each split, collect the inputs firing to 1, then read tuples off."""
    key = (frozenset(ground), arity, variant)
    if key in cache:
        return cache[key]
    found = set()
    ground = sorted(ground)
    inputs = {ax.n for ax in gamma.axioms}
    subsets = [c for r in range(len(ground) + 1) for c in combinations(ground, r)]
    for fl in subsets:
        for fr in subsets:
            oracle = {2 * x for x in fl} | {2 * y + 1 for y in fr}
            ones = {n for n in inputs if _brute_value(gamma, oracle, n) == 1}
            found |= _tuples_from_ones(ones, k, arity, variant)
    cache[key] = found
    return found


def test_acceptance_tree_oracle_equivalence():
    t0 = time.time()
    corpus = _tree_corpus()
    mism = 0
    labeled_per_combo = {}
    for gamma, reservoir in corpus:
        cache = {}
        for arity, variant in product((2, 3), ("plain", "shifted")):
            params = TreeParams(
                k=0,
                gamma=gamma,
                segment=frozenset(),
                reservoir=reservoir,
                arity=arity,
                variant=variant,
                depth_cap=4,
            )
            tree = build_tree(params)

            # membership: terminal status is witness-over-own-range, and a
            # child survives exactly when its parent has no witness
            brute_nodes = set()
            stack = [()]
            while stack:
                alpha = stack.pop()
                witnesses = _brute_witnesses(gamma, alpha, 0, arity, variant, cache)
                brute_nodes.add(alpha)
                if witnesses or len(alpha) >= 4:
                    continue
                floor = alpha[-1] if alpha else -1
                stack.extend(alpha + (x,) for x in reservoir if x > floor)
            if brute_nodes != set(tree.nodes):
                mism += 1
                continue
            for alpha in brute_nodes:
                witnesses = _brute_witnesses(gamma, alpha, 0, arity, variant, cache)
                is_term = tree.nodes[alpha].kind == "witness-terminal"
                if is_term != bool(witnesses):
                    mism += 1
                elif witnesses and tree.nodes[alpha].label != min(witnesses):
                    mism += 1

            try:
                labeled = label_tree(tree)
            except UnlabelableError:
                continue
            labeled_per_combo[(arity, variant)] = (
                labeled_per_combo.get((arity, variant), 0) + 1
            )
            for node, info in labeled.nodes.items():
                lab = info.label
                finite = [e for e in lab if e != INF]
                if not all(a < b for a, b in zip(finite, finite[1:])):
                    mism += 1
                inf_positions = [i for i, e in enumerate(lab) if e == INF]
                if inf_positions and inf_positions != list(
                    range(min(inf_positions), arity)
                ):
                    mism += 1
                if any(e < 0 for e in finite):
                    mism += 1
    dt = time.time() - t0
    combos_ok = len(labeled_per_combo) == 4 and min(labeled_per_combo.values()) >= 2
    report(
        "tree-oracle-equivalence",
        mism == 0 and combos_ok and dt < 300,
        f"{mism} mismatches, labeled per combo {labeled_per_combo}, {dt:.1f}s",
    )


def test_acceptance_subtree_and_transition_properties():
    t0 = time.time()
    corpus = _tree_corpus()
    mism = 0
    checked = 0
    for gamma, reservoir in corpus:
        for arity, variant in product((2, 3), ("plain", "shifted")):
            params = TreeParams(
                k=0,
                gamma=gamma,
                segment=frozenset(),
                reservoir=reservoir,
                arity=arity,
                variant=variant,
                depth_cap=4,
            )
            tree = build_tree(params)
            try:
                labeled = label_tree(tree)
            except UnlabelableError:
                continue
            checked += 1
            sub = labeled_subtree(labeled)
            for node, info in sub.nodes.items():
                if node not in labeled.nodes:
                    mism += 1
                elif labeled.nodes[node].label != info.label:
                    mism += 1
                if labeled.nodes[node].kind == "witness-terminal":
                    if info.kind != "witness-terminal":
                        mism += 1
            if not transition_nodes(sub, revised=True) <= transition_nodes(sub):
                mism += 1
    dt = time.time() - t0
    report(
        "subtree-and-transition-properties",
        mism == 0 and checked >= 8,
        f"{mism} violations over {checked} labeled trees, {dt:.1f}s",
    )


# ---------------------------------------------------------------------------
# criterion 6: forcing algebra


def _press_possible_brute(q, t, target):
    new_pairs = [(x, y) for y in range(q.length, target) for x in range(y)]
    new_rows = list(range(q.length, target))
    for svals in product((0, 1), repeat=len(new_pairs)):
        sigma = dict(q.sigma)
        sigma.update(zip(new_pairs, svals))

        def rows(idx, lim):
            if idx == len(new_rows):
                cond = Condition(target, sigma, lim)
                return press_check(cond, t) and not validate_condition(cond)
            x = new_rows[idx]
            for i in (0, 1):
                for z in range(target + 1):
                    if all(sigma[(x, y)] == i for y in range(max(z, x + 1), target)):
                        lim2 = dict(lim)
                        lim2[x] = (i, z)
                        if rows(idx + 1, lim2):
                            return True
            return False

        if rows(0, dict(q.limit)):
            return True
    return False


def test_acceptance_forcing_algebra():
    t0 = time.time()
    rng = random.Random(6)
    failures = 0
    blocked_confirmed = 0
    press_checked = 0
    for trial in range(1000):
        n = rng.randint(0, 12)
        p = random_condition(trial, n)
        q = complete_condition(p, min(12, n + rng.randint(0, 3)))
        r = complete_condition(q, min(12, q.length + rng.randint(0, 3)))
        if not (extends(p, p) and extends(q, p) and extends(r, q) and extends(r, p)):
            failures += 1
        if extends(p, q) and not (p.sigma == q.sigma and p.limit == q.limit):
            failures += 1
        m = rng.randint(0, p.length)
        if validate_condition(p.restrict(m)):
            failures += 1
        if p.length >= 2:
            a = rng.randrange(p.length - 1)
            b = rng.randint(a + 1, p.length - 1)
            t = ButtonTriple(trial, a, b)
            if press_check(p, t) and not press_check(r, t):
                failures += 1

        # press extensions and blocked confirmation at small scale
        if trial < 120:
            n_small = rng.randint(2, 4)
            q_small = random_condition(trial + 10_000, n_small)
            a = rng.randrange(n_small - 1)
            b = rng.randint(a + 1, n_small - 1)
            t = ButtonTriple(trial, a, b)
            target = min(6, n_small + rng.randint(0, 2))
            if target <= b:
                continue
            press_checked += 1
            try:
                out = extend_pressing(q_small, t, target)
                if out.length != target or not press_check(out, t):
                    failures += 1
                if not extends(out, q_small) or validate_condition(out):
                    failures += 1
                if out != extend_pressing(q_small, t, target):
                    failures += 1
                if not _press_possible_brute(q_small, t, target):
                    failures += 1
            except PressBlockedError:
                blocked_confirmed += 1
                if _press_possible_brute(q_small, t, target):
                    failures += 1
    dt = time.time() - t0
    report(
        "forcing-algebra",
        failures == 0 and blocked_confirmed > 0 and press_checked >= 100,
        f"{failures} failures, {blocked_confirmed} blocked confirmed, {dt:.1f}s",
    )


# ---------------------------------------------------------------------------
# criterion 7: construction transcripts


def test_acceptance_construction_transcripts():
    t0 = time.time()
    failures = []
    outcomes_seen = set()
    assert len(CORPUS) >= 10
    for name, config, expected in CORPUS:
        state, transcript = run_stages(copy.deepcopy(config))
        outcomes = [e["outcome"] for e in transcript]
        if outcomes != expected:
            failures.append(f"{name}: outcomes {outcomes}")
            continue
        outcomes_seen.update(outcomes)
        problems = verify_transcript(transcript, config)
        if problems:
            failures.append(f"{name}: {problems[:2]}")
        _, rerun = run_stages(copy.deepcopy(config))
        if rerun != transcript:
            failures.append(f"{name}: rerun differs")
        for event in transcript:
            if event["outcome"] != "diagonalized":
                continue
            cond = Condition.from_dict(event["payload"]["condition"])
            a, b = event["payload"]["pair"]
            vals = {cond.sigma[(a, b)], cond.limit[a][0], cond.limit[b][0]}
            if len(vals) < 2:
                failures.append(f"{name}: diagonalized pair is constant")
    walk_actions = set()
    for name, config, expected in CORPUS:
        _, transcript = run_stages(copy.deepcopy(config))
        for event in transcript:
            for w in event["payload"].get("events", []):
                walk_actions.add(w["action"])
    needed = {"press", "press-diag", "rebase", "prune", "diag-descend", "descend"}
    missing = needed - walk_actions
    dt = time.time() - t0
    ok = not failures and not missing and {"extended-segments", "reserved-set-added",
                                           "path-reservoir", "diagonalized"} <= outcomes_seen
    report(
        "construction-transcripts",
        ok and dt < 120,
        f"failures={failures[:3]} missing-actions={missing} {dt:.1f}s",
    )
