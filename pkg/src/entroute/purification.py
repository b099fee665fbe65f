"""Single-hop purification scheduling.

A purification schedule is a binary tree: leaves are elementary pairs of a
common fidelity f_e, and each internal node purifies its two children into
one pair.  The scheduler builds a discretized candidate list of trees and
returns the one maximizing yield-per-input-pair subject to a fidelity
threshold; an exhaustive tree enumeration serves as the desk-scale oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .pair_algebra import purification_success_prob, purified_fidelity

# A tree is either the LEAF sentinel or a (left, right) tuple of trees.
LEAF = "L"

_BRUTE_FORCE_MAX_N = 10

# Grid-comparison slack: discretized values are multiples of delta computed in
# floating point, so equality checks need a hair of tolerance.
_GRID_TOL = 1e-12


def is_leaf(tree) -> bool:
    return tree == LEAF


def leaf_count(tree) -> int:
    if is_leaf(tree):
        return 1
    left, right = tree
    return leaf_count(left) + leaf_count(right)


def evaluate_tree(tree, f_e: float) -> tuple[float, float]:
    """Exact (fidelity, yield) of a schedule tree, no discretization.

    Yield of a leaf is 1; a merge multiplies the purification success
    probability by the smaller child yield.
    """
    if is_leaf(tree):
        return f_e, 1.0
    left, right = tree
    f1, x1 = evaluate_tree(left, f_e)
    f2, x2 = evaluate_tree(right, f_e)
    f = purified_fidelity(f1, f2)
    xi = purification_success_prob(f1, f2) * min(x1, x2)
    return f, xi


def tree_success_prob(tree, f_e: float) -> float:
    """Probability that every purification in a single run of the tree
    succeeds (one-shot semantics, no min-yield accounting)."""
    if is_leaf(tree):
        return 1.0
    left, right = tree
    f1, _ = evaluate_tree(left, f_e)
    f2, _ = evaluate_tree(right, f_e)
    return (
        purification_success_prob(f1, f2)
        * tree_success_prob(left, f_e)
        * tree_success_prob(right, f_e)
    )


def tree_to_text(tree) -> str:
    if is_leaf(tree):
        return "L"
    left, right = tree
    return f"({tree_to_text(left)},{tree_to_text(right)})"


def tree_from_text(s: str):
    """Parse the nested-parentheses form produced by tree_to_text."""
    pos = 0

    def parse():
        nonlocal pos
        if pos < len(s) and s[pos] == "L":
            pos += 1
            return LEAF
        if pos >= len(s) or s[pos] != "(":
            raise ValueError(f"bad tree text at offset {pos}: {s!r}")
        pos += 1
        left = parse()
        if pos >= len(s) or s[pos] != ",":
            raise ValueError(f"expected ',' at offset {pos}: {s!r}")
        pos += 1
        right = parse()
        if pos >= len(s) or s[pos] != ")":
            raise ValueError(f"expected ')' at offset {pos}: {s!r}")
        pos += 1
        return (left, right)

    tree = parse()
    if pos != len(s):
        raise ValueError(f"trailing characters in tree text: {s!r}")
    return tree


def tree_to_json(tree):
    """JSON-ready form: leaves are the string "L", merges are 2-element lists."""
    if is_leaf(tree):
        return "L"
    left, right = tree
    return [tree_to_json(left), tree_to_json(right)]


def tree_from_json(obj):
    if obj == "L":
        return LEAF
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return (tree_from_json(obj[0]), tree_from_json(obj[1]))
    raise ValueError(f"bad tree JSON: {obj!r}")


@dataclass
class SchedulerConfig:
    n: int
    f_e: float
    f_theta: float
    delta_f: float = 1e-4
    delta_xi: float = 1e-4

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.5 <= self.f_e <= 1.0 + _GRID_TOL:
            raise ValueError(f"f_e={self.f_e!r} outside [0.5, 1]")
        if not 0.25 < self.f_theta <= 1.0 + _GRID_TOL:
            raise ValueError(f"f_theta={self.f_theta!r} outside (0.25, 1]")
        if not (0.0 < self.delta_f < 1.0 and 0.0 < self.delta_xi < 1.0):
            raise ValueError("delta_f and delta_xi must lie in (0, 1)")


@dataclass
class ScheduleEntry:
    """Candidate-list quadruple: leaf count, discretized fidelity and yield,
    and the tree that realizes them."""

    b: int
    f_hat: float
    xi_hat: float
    tree: object

    def ratio(self) -> float:
        return self.xi_hat / self.b


def gamma_table(n: int, f_e: float) -> list[float]:
    """Best achievable fidelity per leaf budget; entry i (1-based) is the
    maximum over all trees with at most i leaves.  Index 0 is NaN padding."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.5 <= f_e <= 1.0 + _GRID_TOL:
        raise ValueError(f"f_e={f_e!r} outside [0.5, 1]")
    gamma = [math.nan] * (n + 1)
    gamma[1] = f_e
    for i in range(2, n + 1):
        best = f_e
        for k in range(1, i // 2 + 1):
            cand = purified_fidelity(gamma[k], gamma[i - k])
            if best < cand:
                best = cand
        gamma[i] = best
    return gamma


def max_fidelity_schedule(n: int, f_e: float) -> tuple[object, float]:
    """Tree attaining gamma_table(n, f_e)[n], i.e. the best fidelity with at
    most n pairs.  Merging fidelity-optimal subtrees is optimal because the
    merge map is increasing in both child fidelities."""
    gamma = gamma_table(n, f_e)
    trees: list = [None, LEAF]
    for i in range(2, n + 1):
        best, pick = f_e, LEAF
        for k in range(1, i // 2 + 1):
            cand = purified_fidelity(gamma[k], gamma[i - k])
            if best < cand:
                best = cand
                pick = (trees[k], trees[i - k])
        trees.append(pick)
    return trees[n], gamma[n]


def min_leaves(n: int, f_e: float, f_theta: float) -> Optional[int]:
    """Smallest leaf budget whose best fidelity reaches f_theta, or None."""
    gamma = gamma_table(n, f_e)
    for i in range(1, n + 1):
        if gamma[i] >= f_theta - _GRID_TOL:
            return i
    return None


def _ceil_to_grid(x: float, delta: float) -> float:
    # guard against x/delta landing epsilon above an integer
    return math.ceil(x / delta - 1e-9) * delta


def _dominates(a: ScheduleEntry, b: ScheduleEntry) -> bool:
    """a weakly dominates b: no more leaves, at least the fidelity and yield."""
    return (
        a.b <= b.b
        and a.f_hat >= b.f_hat - _GRID_TOL
        and a.xi_hat >= b.xi_hat - _GRID_TOL
    )


def _insert(entries: list[ScheduleEntry], cand: ScheduleEntry) -> bool:
    """Dominance-filtered insert; returns True if the candidate was kept."""
    for e in entries:
        if _dominates(e, cand):
            return False
    entries[:] = [e for e in entries if not _dominates(cand, e)]
    entries.append(cand)
    return True


def schedule(cfg: SchedulerConfig, trace: Optional[list] = None) -> Optional[ScheduleEntry]:
    """Discretized candidate-list search for the max yield-per-pair schedule.

    Returns the entry with discretized fidelity >= f_theta maximizing
    xi_hat/b (ties: smaller b, then higher f_hat), or None when the
    threshold is unreachable with n pairs.

    When trace is a list, every generated candidate is appended to it as
    (entry, kept) so tests can audit the dominance pruning.
    """
    nprime = min_leaves(cfg.n, cfg.f_e, cfg.f_theta)
    if nprime is None:
        return None
    bound = min(cfg.n, 2 * (nprime - 1)) if nprime > 1 else 1

    entries: list[ScheduleEntry] = [ScheduleEntry(1, cfg.f_e, 1.0, LEAF)]
    for _ in range(max(bound, 1)):
        snapshot = list(entries)
        changed = False
        for i1 in range(len(snapshot)):
            for i2 in range(i1, len(snapshot)):
                l1, l2 = snapshot[i1], snapshot[i2]
                b3 = l1.b + l2.b
                if b3 > bound:
                    continue
                f3 = _ceil_to_grid(purified_fidelity(l1.f_hat, l2.f_hat), cfg.delta_f)
                xi3 = _ceil_to_grid(
                    purification_success_prob(l1.f_hat, l2.f_hat) * min(l1.xi_hat, l2.xi_hat),
                    cfg.delta_xi,
                )
                cand = ScheduleEntry(b3, min(f3, 1.0), min(xi3, 1.0), (l1.tree, l2.tree))
                kept = _insert(entries, cand)
                if trace is not None:
                    trace.append((cand, kept))
                if kept:
                    changed = True
        if not changed:
            break
    if trace is not None:
        trace.append(("final", list(entries)))

    best: Optional[ScheduleEntry] = None
    for e in entries:
        if e.f_hat < cfg.f_theta - _GRID_TOL:
            continue
        if best is None:
            best = e
            continue
        if e.ratio() > best.ratio() + _GRID_TOL:
            best = e
        elif abs(e.ratio() - best.ratio()) <= _GRID_TOL:
            if e.b < best.b or (e.b == best.b and e.f_hat > best.f_hat + _GRID_TOL):
                best = e
    return best


def candidate_frontier(
    n: int, f_e: float, delta_f: float = 1e-4, delta_xi: float = 1e-4
) -> list[ScheduleEntry]:
    """Dominance-filtered candidate list over all trees with up to n leaves,
    independent of any fidelity threshold.

    Same merge loop as schedule() but with the leaf bound fixed at n, so one
    frontier serves queries at every threshold (sorted by f_hat ascending).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.5 <= f_e <= 1.0 + _GRID_TOL:
        raise ValueError(f"f_e={f_e!r} outside [0.5, 1]")
    entries: list[ScheduleEntry] = [ScheduleEntry(1, f_e, 1.0, LEAF)]
    for _ in range(n):
        snapshot = list(entries)
        changed = False
        for i1 in range(len(snapshot)):
            for i2 in range(i1, len(snapshot)):
                l1, l2 = snapshot[i1], snapshot[i2]
                b3 = l1.b + l2.b
                if b3 > n:
                    continue
                f3 = _ceil_to_grid(purified_fidelity(l1.f_hat, l2.f_hat), delta_f)
                xi3 = _ceil_to_grid(
                    purification_success_prob(l1.f_hat, l2.f_hat) * min(l1.xi_hat, l2.xi_hat),
                    delta_xi,
                )
                cand = ScheduleEntry(b3, min(f3, 1.0), min(xi3, 1.0), (l1.tree, l2.tree))
                if _insert(entries, cand):
                    changed = True
        if not changed:
            break
    entries.sort(key=lambda e: (e.f_hat, -e.xi_hat, e.b))
    return entries


def pumping_frontier(
    n: int, f_e: float, delta_f: float = 1e-4, delta_xi: float = 1e-4
) -> list[ScheduleEntry]:
    """Candidate list restricted to left-deep pumping chains: the accumulator
    always merges with one fresh pair.  Same rounding, dominance filter, and
    sort as candidate_frontier, so the two lists are interchangeable."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.5 <= f_e <= 1.0 + _GRID_TOL:
        raise ValueError(f"f_e={f_e!r} outside [0.5, 1]")
    cur = ScheduleEntry(1, f_e, 1.0, LEAF)
    entries: list[ScheduleEntry] = [cur]
    for b in range(2, n + 1):
        f3 = _ceil_to_grid(purified_fidelity(cur.f_hat, f_e), delta_f)
        xi3 = _ceil_to_grid(
            purification_success_prob(cur.f_hat, f_e) * min(cur.xi_hat, 1.0), delta_xi
        )
        cur = ScheduleEntry(b, min(f3, 1.0), min(xi3, 1.0), (cur.tree, LEAF))
        _insert(entries, cur)
    entries.sort(key=lambda e: (e.f_hat, -e.xi_hat, e.b))
    return entries


def deltas_for_epsilon(n: int, f_e: float, f_theta: float, eps: float) -> tuple[float, float]:
    """Step sizes meeting the epsilon-optimality condition, bootstrapped from
    the symmetric schedule (clamped to 1e-2 to keep the grid meaningful)."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    tree = None
    b0 = 1
    while b0 <= n:
        cand = symmetric_schedule(b0)
        f, _ = evaluate_tree(cand, f_e)
        if f >= f_theta - _GRID_TOL:
            tree = cand
            break
        b0 *= 2
    if tree is None:
        # threshold unreachable symmetrically; fall back to the finest grid
        return 1e-4, 1e-4
    f0, xi0 = evaluate_tree(tree, f_e)
    b0 = leaf_count(tree)
    return min(b0 * f0 * eps, 1e-2), min(b0 * xi0 * eps, 1e-2)


def symmetric_schedule(n: int):
    """Balanced tree over the largest power of two not exceeding n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    depth = int(math.floor(math.log2(n)))

    def build(d):
        if d == 0:
            return LEAF
        sub = build(d - 1)
        return (sub, sub)

    return build(depth)


def pumping_schedule(n: int):
    """Left-deep chain: repeatedly merge the accumulator with a fresh pair."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tree = LEAF
    for _ in range(n - 1):
        tree = (tree, LEAF)
    return tree


def _pareto_sets(bound: int, f_e: float) -> list[list[tuple[float, float, object]]]:
    """Exact Pareto fronts of (fidelity, yield, tree) per exact leaf count.

    Composition is monotone in both child coordinates, so pruning dominated
    partial trees cannot lose the optimum.
    """
    sets: list[list[tuple[float, float, object]]] = [[] for _ in range(bound + 1)]
    if bound >= 1:
        sets[1] = [(f_e, 1.0, LEAF)]
    for b in range(2, bound + 1):
        cands: list[tuple[float, float, object]] = []
        for b1 in range(1, b // 2 + 1):
            b2 = b - b1
            for f1, x1, t1 in sets[b1]:
                for f2, x2, t2 in sets[b2]:
                    f = purified_fidelity(f1, f2)
                    xi = purification_success_prob(f1, f2) * min(x1, x2)
                    cands.append((f, xi, (t1, t2)))
        front: list[tuple[float, float, object]] = []
        for f, xi, t in sorted(cands, key=lambda c: (-c[0], -c[1])):
            if any(ff >= f - 1e-15 and xx >= xi - 1e-15 for ff, xx, _ in front):
                continue
            front.append((f, xi, t))
        sets[b] = front
    return sets


def brute_force_optimal(n: int, f_e: float, f_theta: float):
    """Exhaustive oracle: the tree maximizing exact yield/leaves subject to
    exact fidelity >= f_theta, over all shapes within the leaf bound.

    Returns None when infeasible.  Raises on n beyond the desk-scale bound.
    """
    if n > _BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force bounded at n={_BRUTE_FORCE_MAX_N}, got {n}")
    nprime = min_leaves(n, f_e, f_theta)
    if nprime is None:
        return None
    bound = min(n, 2 * (nprime - 1)) if nprime > 1 else 1
    sets = _pareto_sets(bound, f_e)
    best = None  # (ratio, -b, f, tree)
    for b in range(1, bound + 1):
        for f, xi, tree in sets[b]:
            if f < f_theta - _GRID_TOL:
                continue
            key = (xi / b, -b, f)
            if best is None or key > best[0]:
                best = (key, tree)
    return best[1] if best else None
