import pytest

from ramseylab.coloring import (
    Coloring,
    JoinedSet,
    VACUOUS,
    check_homogeneity,
    encode_join,
    random_stable_coloring,
)
from ramseylab.reductions import (
    InsufficientWitnessError,
    NOTIONS,
    PRINCIPLES,
    PreconditionError,
    forward_chain,
    homogeneous_to_p,
    ipt_to_homogeneous,
    limit_to_homogeneous,
    relation_matrix,
)


def constant_coloring(n, c):
    return Coloring(n, {(x, y): c for x in range(n) for y in range(x + 1, n)},
                    {x: (c, 0) for x in range(n)})


def test_limit_to_homogeneous_constant():
    f = constant_coloring(8, 0)
    assert limit_to_homogeneous(f, {0, 2, 4, 6}, 0) == [0, 2, 4, 6]


def test_limit_to_homogeneous_skips_conflicts():
    n = 6
    table = {(x, y): 0 for x in range(n) for y in range(x + 1, n)}
    table[(2, 3)] = 1
    limits = {x: (0, 4) for x in range(n)}
    f = Coloring(n, table, limits)
    assert limit_to_homogeneous(f, {1, 2, 3, 4}, 0) == [1, 2, 4]


def test_limit_to_homogeneous_row_zero_special():
    n = 5
    table = {(x, y): (1 if x == 0 else 0) for x in range(n) for y in range(x + 1, n)}
    limits = {0: (1, 1)}
    limits.update({x: (0, 1) for x in range(1, n)})
    f = Coloring(n, table, limits)
    got = limit_to_homogeneous(f, {1, 2, 3}, 0)
    assert got == [1, 2, 3]
    assert check_homogeneity(f, got, "homog") == 0


def test_ipt_constant_one():
    f = constant_coloring(8, 1)
    z = encode_join({0, 2}, {1, 3})
    assert ipt_to_homogeneous(f, z) == [0, 2]


def test_ipt_gap_coloring():
    n = 16
    table = {(x, y): (0 if y - x <= 3 else 1) for x in range(n) for y in range(x + 1, n)}
    limits = {x: (1, x + 4) for x in range(n)}
    f = Coloring(n, table, limits)
    z = encode_join({0, 5}, {10, 14})
    got = ipt_to_homogeneous(f, z)
    assert got == [0, 5]
    assert check_homogeneity(f, got, "homog") == 1


def test_ipt_insufficient_witness():
    f = constant_coloring(6, 1)
    z = encode_join({1}, {0})  # no right element above the left minimum
    with pytest.raises(InsufficientWitnessError):
        ipt_to_homogeneous(f, z)


def test_ipt_precondition_error():
    n = 6
    table = {(x, y): 0 for x in range(n) for y in range(x + 1, n)}
    table[(0, 1)] = 1
    f = Coloring(n, table)
    z = encode_join({0, 2}, {1, 3})  # mixed colors on increasing cross pairs
    with pytest.raises(PreconditionError):
        ipt_to_homogeneous(f, z)


def test_homogeneous_to_p_examples():
    assert sorted(homogeneous_to_p({0, 2}).elements) == [0, 1, 4, 5]
    assert sorted(homogeneous_to_p(set()).elements) == []
    assert sorted(homogeneous_to_p({3}).elements) == [6, 7]


def test_forward_chain_examples():
    assert sorted(forward_chain("SRT", "SPT", {1, 4}).elements) == [2, 3, 8, 9]
    z = JoinedSet({0, 3})
    assert forward_chain("SPT", "SIPT", z) is z
    assert forward_chain("SIPT", "D", JoinedSet({0, 4, 3})) == {0, 2}
    with pytest.raises(ValueError):
        forward_chain("SRT", "D", {1})


def test_forward_chain_soundness_down_from_homogeneous():
    produced = 0
    for seed in range(40):
        f = random_stable_coloring(seed, 14, 4)
        for lo in range(10):
            cand = [lo, lo + 1, lo + 2]
            verdict = check_homogeneity(f, cand, "homog")
            if verdict is None or verdict is VACUOUS:
                continue
            produced += 1
            z = forward_chain("SRT", "SPT", cand)
            assert check_homogeneity(f, z, "p-homog") == verdict
            z2 = forward_chain("SPT", "SIPT", z)
            assert check_homogeneity(f, z2, "incr-p-homog") == verdict
            break
    assert produced >= 10


def test_forward_chain_left_column_is_limit_homogeneous():
    produced = 0
    for seed in range(40):
        f = random_stable_coloring(seed, 16, 4)
        for c in (0, 1):
            pool = [x for x in range(16) if f.limits[x][0] == c]
            if len(pool) < 2:
                continue
            hl = pool[:2]
            floor = max([f.limits[x][1] for x in hl] + [max(hl) + 1])
            hr = list(range(floor, 16))[:2]
            if not hr:
                continue
            z = encode_join(hl, hr)
            assert check_homogeneity(f, z, "incr-p-homog") == c
            left = forward_chain("SIPT", "D", z)
            assert check_homogeneity(f, left, "limit-homog") == c
            produced += 1
            break
    assert produced >= 10


def test_matrix_headline_entries():
    m = relation_matrix()
    assert not m.query("SRT", "SPT", "sc").holds
    assert m.query("D", "SIPT", "sW").holds
    w = m.query("SRT", "SIPT", "W")
    assert w.holds and w.derived
    assert not m.query("SPT", "SIPT", "sc").holds
    assert not m.query("SIPT", "D", "sc").holds
    assert not m.query("SRT", "D", "W").holds
    assert m.query("SRT", "D", "c").holds
    for p in PRINCIPLES:
        for n in NOTIONS:
            assert m.query(p, p, n).holds


def test_matrix_closure_under_implications():
    m = relation_matrix()
    for p in PRINCIPLES:
        for q in PRINCIPLES:
            sw = m.query(p, q, "sW").holds
            sc = m.query(p, q, "sc").holds
            w = m.query(p, q, "W").holds
            c = m.query(p, q, "c").holds
            if sw:
                assert sc and w
            if sc or w:
                assert c


def test_matrix_every_entry_has_a_citation():
    m = relation_matrix()
    assert len(m.entries) == 4 * 4 * 4
    assert all(e.citation for e in m.entries.values())


def test_matrix_chain_is_exactly_upward_for_strong_notions():
    m = relation_matrix()
    order = {p: i for i, p in enumerate(PRINCIPLES)}
    for p in PRINCIPLES:
        for q in PRINCIPLES:
            expected = order[p] <= order[q]
            assert m.query(p, q, "sW").holds == expected
            assert m.query(p, q, "sc").holds == expected
            assert m.query(p, q, "c").holds
            assert m.query(p, q, "W").holds == (q != "D" or p == "D")
