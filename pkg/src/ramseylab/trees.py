"""Labeled diagonalization trees over a finite reservoir.

A tree node is a strictly increasing string of reservoir elements. A
string belongs to the tree while no split of the ground set seen so far
(all but its last element) makes the functional converge to 1 on a full
increasing value tuple; a node is witness-terminal when its own range
supplies such a split, and the least witnessing tuple becomes its
label. Internal labels propagate upward entry by entry, rightmost
first, with the symbol for infinity standing in where no single value
recurs often enough among the successors.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from .coloring import encode_join
from .functionals import (
    InconsistentFunctionalError,
    OracleFunctional,
    check_consistency,
    evaluate,
)

INF = math.inf

ARITIES = (2, 3)
VARIANTS = ("plain", "shifted")


class UnlabelableError(ValueError):
    """The tree has a leaf that ran out of depth or reservoir without a
    witness, so recursive labeling cannot start there."""

    def __init__(self, leaf):
        self.leaf = leaf
        super().__init__(f"unlabelable leaf {leaf}")


@dataclass(frozen=True)
class TreeParams:
    k: int
    gamma: OracleFunctional
    segment: frozenset  # joined codes already committed to the oracle
    reservoir: tuple
    arity: int = 2
    variant: str = "plain"
    depth_cap: int = 4

    def __init__(self, k, gamma, segment, reservoir, arity=2, variant="plain", depth_cap=4):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "segment", frozenset(segment))
        object.__setattr__(self, "reservoir", tuple(reservoir))
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "depth_cap", depth_cap)
        if arity not in ARITIES:
            raise ValueError(f"arity must be 2 or 3, got {arity}")
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if depth_cap < 0:
            raise ValueError("negative depth cap")
        if any(a >= b for a, b in zip(self.reservoir, self.reservoir[1:])):
            raise ValueError("reservoir must be strictly increasing")
        if self.segment and self.reservoir and max(self.segment) >= min(self.reservoir):
            raise ValueError("segment must lie entirely below the reservoir")


@dataclass(frozen=True)
class NodeInfo:
    kind: str  # "internal" | "witness-terminal" | "depth-exhausted"
    label: Optional[tuple] = None
    witness: Optional[tuple] = None  # (left tuple, right tuple, value tuple)
    sort: Optional[frozenset] = None


@dataclass(frozen=True)
class LabeledTree:
    params: TreeParams
    nodes: dict  # path tuple -> NodeInfo
    children: dict  # path tuple -> tuple of child paths

    def info(self, node) -> NodeInfo:
        return self.nodes[node]

    def kids(self, node) -> tuple:
        return self.children.get(node, ())

    def label(self, node):
        return self.nodes[node].label

    def is_terminal(self, node) -> bool:
        return self.nodes[node].kind == "witness-terminal"

    def leaves(self) -> List[tuple]:
        return [n for n in self.nodes if not self.children.get(n)]

    def paths_by_depth(self) -> List[tuple]:
        return sorted(self.nodes, key=lambda n: (len(n), n))


def query_inputs(values: tuple, arity: int, variant: str) -> tuple:
    """Functional inputs asked for a value tuple: plain uses the values
    themselves, shifted alternates odd/even/odd codes."""
    if variant == "plain":
        return values
    if arity == 2:
        a, b = values
        return (2 * a + 1, 2 * b)
    a, b, c = values
    return (2 * a + 1, 2 * b, 2 * c + 1)


def _value_pools(gamma: OracleFunctional, k: int, arity: int, variant: str) -> List[List[int]]:
    ones = sorted({ax.n for ax in gamma.axioms if ax.out == 1})
    if variant == "plain":
        pool = [n for n in ones if n >= k]
        return [pool] * arity
    odd = [(n - 1) // 2 for n in ones if n % 2 == 1]
    even = [n // 2 for n in ones if n % 2 == 0]
    odd = sorted({v for v in odd if v >= k})
    even = sorted({v for v in even if v >= k})
    if arity == 2:
        return [odd, even]
    return [odd, even, odd]


def _subset_tuples(ground: tuple) -> List[tuple]:
    subs = []
    for r in range(len(ground) + 1):
        subs.extend(combinations(ground, r))
    return sorted(subs, key=lambda t: (len(t), t))


def least_witness(params: TreeParams, ground: Iterable[int]):
    """Least (value tuple, left, right) witnessing convergence to 1 on
    the segment joined with a split of the ground set, or None.

    Value tuples are ordered lexicographically, then splits by (left,
    right) as sorted tuples.
    """
    ground = tuple(sorted(ground))
    pools = _value_pools(params.gamma, params.k, params.arity, params.variant)
    subsets = _subset_tuples(ground)
    oracles = {}

    def oracle_for(fl, fr):
        key = (fl, fr)
        if key not in oracles:
            oracles[key] = frozenset(params.segment) | frozenset(
                encode_join(fl, fr).elements
            )
        return oracles[key]

    def tuples(pos, prev):
        if pos == params.arity:
            yield ()
            return
        for v in pools[pos]:
            if prev is not None and v <= prev:
                continue
            for rest in tuples(pos + 1, v):
                yield (v,) + rest

    for values in sorted(tuples(0, None)):
        queries = query_inputs(values, params.arity, params.variant)
        for fl in subsets:
            for fr in subsets:
                oracle = oracle_for(fl, fr)
                if all(evaluate(params.gamma, oracle, q) == 1 for q in queries):
                    return (values, fl, fr)
    return None


def build_tree(params: TreeParams) -> LabeledTree:
    """Unlabeled tree of all surviving increasing strings up to the
    depth cap.

    A node whose range carries a witness is witness-terminal (all its
    one-extensions leave the tree); a node cut off by the depth cap or
    an exhausted reservoir without a witness is depth-exhausted.
    """
    if check_consistency(params.gamma):
        raise InconsistentFunctionalError("functional has conflicting axioms")
    witness_cache: Dict[frozenset, object] = {}

    def witness(ground):
        key = frozenset(ground)
        if key not in witness_cache:
            witness_cache[key] = least_witness(params, ground)
        return witness_cache[key]

    nodes = {}
    children = {}
    queue = [()]
    while queue:
        node = queue.pop()
        w = witness(node)
        if w is not None:
            values, fl, fr = w
            nodes[node] = NodeInfo(
                kind="witness-terminal", label=tuple(values), witness=(fl, fr, tuple(values))
            )
            children[node] = ()
            continue
        if len(node) >= params.depth_cap:
            nodes[node] = NodeInfo(kind="depth-exhausted")
            children[node] = ()
            continue
        floor = node[-1] if node else -1
        kids = tuple(node + (x,) for x in params.reservoir if x > floor)
        if not kids:
            nodes[node] = NodeInfo(kind="depth-exhausted")
            children[node] = ()
            continue
        nodes[node] = NodeInfo(kind="internal")
        children[node] = kids
        queue.extend(kids)
    return LabeledTree(params=params, nodes=nodes, children=children)


def _inf_count(label: tuple) -> int:
    return sum(1 for e in label if e is INF or e == INF)


def _node_theta(theta: Optional[int], count: int) -> int:
    if theta is not None:
        return theta
    return count // 2 + 1


def _internal_label(child_labels: List[tuple], arity: int, theta: int) -> tuple:
    entries = [None] * arity
    for pos in range(arity - 1, -1, -1):
        finite_right = [
            (q, entries[q]) for q in range(pos + 1, arity) if entries[q] != INF
        ]
        pool = [
            lab
            for lab in child_labels
            if all(lab[q] == v for q, v in finite_right)
        ]
        counts = Counter(lab[pos] for lab in pool if lab[pos] != INF)
        choice = None
        for v in sorted(counts):
            if counts[v] >= theta:
                choice = v
                break
        if choice is not None:
            entries[pos] = choice
        elif not finite_right:
            entries[pos] = INF
        else:
            # the suffix pins a nonempty pool but nothing recurs often
            # enough; fall back to the least value present
            entries[pos] = min(counts)
    return tuple(entries)


def label_tree(tree: LabeledTree, theta: Optional[int] = None) -> LabeledTree:
    """Recursive labeling, terminals first.

    theta replaces "infinitely many" by "at least theta"; when omitted,
    each node uses a strict majority of its successor count. Refuses
    trees with depth-exhausted leaves.
    """
    if theta is not None and theta < 1:
        raise ValueError("theta must be at least 1")
    for node, info in tree.nodes.items():
        if info.kind == "depth-exhausted":
            raise UnlabelableError(node)
    new_nodes = dict(tree.nodes)
    for node in sorted(tree.nodes, key=len, reverse=True):
        info = tree.nodes[node]
        if info.kind == "witness-terminal":
            continue  # label already carries the least witness tuple
        child_labels = [new_nodes[c].label for c in tree.children[node]]
        th = _node_theta(theta, len(child_labels))
        label = _internal_label(child_labels, tree.params.arity, th)
        new_nodes[node] = replace(info, label=label)
    return LabeledTree(params=tree.params, nodes=new_nodes, children=tree.children)


def labeled_subtree(tree: LabeledTree, theta: Optional[int] = None) -> LabeledTree:
    """Label-coherent subtree: below a fully finite label only equal
    labels survive; below a label with infinities, either least
    representatives of the sharper label classes or the cofinite class
    of equal labels."""
    arity = tree.params.arity
    if any(info.label is None for info in tree.nodes.values()):
        raise ValueError("tree is not fully labeled")
    kept = {(): tree.nodes[()]}
    kept_children = {}
    stack = [()]
    while stack:
        node = stack.pop()
        info = tree.nodes[node]
        if info.kind != "internal":
            kept_children[node] = ()
            continue
        kids = tree.children[node]
        total = len(kids)
        th = _node_theta(theta, total)
        label = info.label
        t = _inf_count(label)
        keep: List[tuple] = []
        if t == 0:
            keep = [c for c in kids if tree.label(c) == label]
        else:
            prefix = label[: arity - t]
            chosen = False
            for s in range(t):
                cls = [
                    c
                    for c in kids
                    if _inf_count(tree.label(c)) == s
                    and tree.label(c)[: arity - t] == prefix
                ]
                big_enough = len(cls) >= th if s == 0 else len(cls) > total - th
                if cls and big_enough:
                    by_label = {}
                    for c in sorted(cls, key=lambda c: c[-1]):
                        by_label.setdefault(tree.label(c), c)
                    keep = sorted(by_label.values())
                    chosen = True
                    break
            if not chosen:
                same = [c for c in kids if tree.label(c) == label]
                keep = same if len(same) > total - th else []
        kept_children[node] = tuple(keep)
        for c in keep:
            kept[c] = tree.nodes[c]
            stack.append(c)
    return LabeledTree(params=tree.params, nodes=kept, children=kept_children)


def transition_nodes(tree: LabeledTree, revised: bool = False) -> set:
    """Nodes whose label carries infinity while every successor's label
    carries strictly fewer (revised: also at most one) infinities."""
    out = set()
    for node, info in tree.nodes.items():
        if info.label is None:
            raise ValueError("tree is not labeled")
        mine = _inf_count(info.label)
        if mine == 0:
            continue
        kids = tree.kids(node)
        if not kids:
            continue
        ok = True
        for c in kids:
            theirs = _inf_count(tree.label(c))
            if theirs >= mine or (revised and theirs > 1):
                ok = False
                break
        if ok:
            out.add(node)
    return out


def compute_sort(tree: LabeledTree, theta: Optional[int] = None) -> LabeledTree:
    """Attach the column-split record to every node of a three-label tree.

    A witness-terminal node records the join of its stored witness
    split; an internal node takes the union of the split records shared
    by at least theta of its kept successors.
    """
    if tree.params.arity != 3:
        raise ValueError("sort is only defined for three-label trees")
    new_nodes = dict(tree.nodes)
    for node in sorted(tree.nodes, key=len, reverse=True):
        info = tree.nodes[node]
        if info.kind == "witness-terminal":
            fl, fr, _ = info.witness
            sort = frozenset({frozenset(encode_join(fl, fr).elements)})
        else:
            counts = Counter(new_nodes[c].sort for c in tree.kids(node))
            th = _node_theta(theta, len(tree.kids(node)))
            members = set()
            for value, cnt in counts.items():
                if cnt >= th:
                    members |= set(value)
            sort = frozenset(members)
        new_nodes[node] = replace(info, sort=sort)
    return LabeledTree(params=tree.params, nodes=new_nodes, children=tree.children)


def _split(member: frozenset) -> Tuple[set, set]:
    return (
        {e // 2 for e in member if e % 2 == 0},
        {e // 2 for e in member if e % 2 == 1},
    )


def _require_sorted_node(tree: LabeledTree, node, x, y):
    info = tree.nodes[node]
    if info.sort is None:
        raise ValueError("sort has not been computed on this tree")
    if x not in node or y not in node:
        raise ValueError(f"{x} and {y} must both occur in the node")
    return info.sort


def share_column(tree: LabeledTree, node, x: int, y: int) -> bool:
    """True when some recorded split keeps x and y out of opposite
    columns: both left, both right, or one of them unplaced."""
    sort = _require_sorted_node(tree, node, x, y)
    for member in sort:
        left, right = _split(member)
        if x in left and y in left:
            return True
        if x in right and y in right:
            return True
        if x not in left | right or y not in left | right:
            return True
    return False


def configuration(tree: LabeledTree, node, x: int, y: int) -> set:
    """Which of the three column layouts some recorded split realizes
    for the ordered pair (x, y): I right/left, II shared or unplaced,
    III left/right."""
    sort = _require_sorted_node(tree, node, x, y)
    out = set()
    for member in sort:
        left, right = _split(member)
        placed = left | right
        if x in right and y in left:
            out.add("I")
        if (
            (x in left and y in left)
            or (x in right and y in right)
            or x not in placed
            or y not in placed
        ):
            out.add("II")
        if x in left and y in right:
            out.add("III")
    return out


def prune(tree: LabeledTree, node, predicate: Callable[[tuple], bool]) -> LabeledTree:
    """Drop every non-terminal proper extension of the node failing the
    predicate, together with everything above it."""
    if node not in tree.nodes:
        raise ValueError(f"{node} is not in the tree")
    dropped = set()
    keep_nodes = {}
    keep_children = {}
    for n in tree.paths_by_depth():
        parent = n[:-1] if n else None
        if n != () and parent in dropped:
            dropped.add(n)
            continue
        is_proper_ext = len(n) > len(node) and n[: len(node)] == node
        if (
            is_proper_ext
            and tree.nodes[n].kind != "witness-terminal"
            and not predicate(n)
        ):
            dropped.add(n)
            continue
        keep_nodes[n] = tree.nodes[n]
    for n in keep_nodes:
        keep_children[n] = tuple(c for c in tree.kids(n) if c not in dropped)
    return LabeledTree(params=tree.params, nodes=keep_nodes, children=keep_children)


def _label_text(label) -> str:
    if label is None:
        return ""
    inside = ",".join("inf" if e == INF else str(e) for e in label)
    return f"({inside})"


def to_dot(tree: LabeledTree) -> str:
    """Graphviz rendering: one node per string, pruned nodes absent."""
    ids = {n: f"n{i}" for i, n in enumerate(tree.paths_by_depth())}
    lines = ["digraph labeled_tree {"]
    for n in tree.paths_by_depth():
        info = tree.nodes[n]
        path = ",".join(str(e) for e in n) or "root"
        text = f"{path} | {_label_text(info.label)} | {info.kind}"
        lines.append(f'  {ids[n]} [label="{text}"];')
    for n in tree.paths_by_depth():
        for c in tree.kids(n):
            lines.append(f"  {ids[n]} -> {ids[c]};")
    lines.append("}")
    return "\n".join(lines)


def tree_to_dict(tree: LabeledTree) -> dict:
    def enc_label(label):
        if label is None:
            return None
        return ["inf" if e == INF else e for e in label]

    nodes = []
    for n in tree.paths_by_depth():
        info = tree.nodes[n]
        entry = {
            "path": list(n),
            "kind": info.kind,
            "label": enc_label(info.label),
        }
        if info.witness is not None:
            fl, fr, values = info.witness
            entry["witness"] = {
                "left": list(fl),
                "right": list(fr),
                "values": list(values),
            }
        if info.sort is not None:
            entry["sort"] = sorted(sorted(m) for m in info.sort)
        nodes.append(entry)
    return {
        "k": tree.params.k,
        "arity": tree.params.arity,
        "variant": tree.params.variant,
        "depth_cap": tree.params.depth_cap,
        "reservoir": list(tree.params.reservoir),
        "segment": sorted(tree.params.segment),
        "nodes": nodes,
    }
