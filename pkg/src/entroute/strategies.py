"""Joint purification/swapping strategies on a repeater chain.

Three strategies over a chain of hops, each hop holding one or more
elementary pairs:

- purify_and_swap: purify every hop down to one pair, then swap the chain.
- swap_and_purify: swap positional strands end to end, then purify them.
- swap_purify_swap(h): swap_and_purify within h contiguous portions, then
  stitch the h portion pairs; h=l and h=1 recover the two extremes.

Purification here consumes all pairs it is handed (the merge order is
optimized for final fidelity); success probabilities are one-shot products
of per-merge success and per-swap p_s.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import purification
from .pair_algebra import (
    _purification_success_raw,
    _purified_fidelity_raw,
    _swap2_raw,
    purification_success_prob,
    purified_fidelity,
    swap_fidelity,
)


@dataclass
class RepeaterChain:
    """Hop-indexed lists of elementary pair fidelities plus the per-swap
    success probability."""

    hops: list
    swap_success: float = 1.0

    def __post_init__(self):
        if not self.hops or any(len(h) < 1 for h in self.hops):
            raise ValueError("every hop needs at least one elementary pair")
        if not 0.0 < self.swap_success <= 1.0:
            raise ValueError("swap success probability must lie in (0, 1]")
        self.hops = [list(map(float, h)) for h in self.hops]

    @property
    def length(self) -> int:
        return len(self.hops)


@dataclass
class StrategyOutcome:
    fidelity: float
    success_prob: float


def _merge_all(fids: tuple) -> tuple[float, float]:
    """Maximal-fidelity purification of the multiset, allowing pairs to go
    unused (merging a weak pair into a strong one can only hurt, e.g.
    F(0.7, 1) < 1).  Returns (fidelity, product of per-merge success
    probabilities along the chosen plan); ties on fidelity resolve to the
    higher success probability."""
    memo: dict = {}

    def go(state: tuple) -> tuple[float, float]:
        hit = memo.get(state)
        if hit is not None:
            return hit
        # stopping now keeps the best pair and discards the rest
        best = (state[-1], 1.0)
        n = len(state)
        for i in range(n):
            for j in range(i + 1, n):
                merged = purified_fidelity(state[i], state[j])
                succ = purification_success_prob(state[i], state[j])
                rest = state[:i] + state[i + 1 : j] + state[j + 1 :]
                nxt = tuple(sorted(rest + (merged,)))
                f, s = go(nxt)
                cand = (f, s * succ)
                if cand > best:
                    best = cand
        memo[state] = best
        return best

    return go(tuple(sorted(fids)))


def purify_and_swap(chain: RepeaterChain, f_theta: Optional[float] = None) -> Optional[StrategyOutcome]:
    """Purify each hop down to one pair, then swap along the chain.

    Without f_theta each hop is purified for maximal fidelity.  With
    f_theta, each hop (which must be homogeneous) runs the scheduler at
    that threshold; returns None when any hop cannot reach it.
    """
    hop_fids = []
    success = 1.0
    for pairs in chain.hops:
        if f_theta is None:
            f, s = _merge_all(tuple(pairs))
        else:
            if len(set(pairs)) != 1:
                raise ValueError("threshold mode needs homogeneous pairs per hop")
            entry = purification.schedule(
                purification.SchedulerConfig(len(pairs), pairs[0], f_theta)
            )
            if entry is None:
                return None
            f, _ = purification.evaluate_tree(entry.tree, pairs[0])
            s = purification.tree_success_prob(entry.tree, pairs[0])
        hop_fids.append(f)
        success *= s
    fidelity = swap_fidelity(hop_fids)
    success *= chain.swap_success ** (chain.length - 1)
    return StrategyOutcome(fidelity, success)


def swap_and_purify(chain: RepeaterChain) -> StrategyOutcome:
    """Swap the i-th pair of every hop into strand i, then purify the
    strands into the final pair."""
    counts = {len(h) for h in chain.hops}
    if len(counts) != 1:
        raise ValueError("swap_and_purify needs equal pair counts on every hop")
    k = counts.pop()
    strands = [swap_fidelity([hop[i] for hop in chain.hops]) for i in range(k)]
    f, s = _merge_all(tuple(strands))
    swaps = k * (chain.length - 1)
    return StrategyOutcome(f, s * chain.swap_success**swaps)


def swap_purify_swap(chain: RepeaterChain, h: int) -> StrategyOutcome:
    """swap_and_purify within h contiguous portions, then stitch the portion
    pairs.  The l mod h longer portions come first."""
    l = chain.length
    if not 1 <= h <= l:
        raise ValueError(f"h must lie in [1, {l}], got {h}")
    small = l // h
    n_large = l % h
    portions = []
    pos = 0
    for idx in range(h):
        size = small + (1 if idx < n_large else 0)
        portions.append(chain.hops[pos : pos + size])
        pos += size
    fids = []
    success = 1.0
    for hops in portions:
        sub = RepeaterChain(hops, chain.swap_success)
        out = swap_and_purify(sub)
        fids.append(out.fidelity)
        success *= out.success_prob
    fidelity = swap_fidelity(fids)
    success *= chain.swap_success ** (h - 1)
    return StrategyOutcome(fidelity, success)


# ---------------------------------------------------------------------------
# purify-first advantage region scans (vectorized)

_VIOLATION_TOL = 1e-12
_CHUNK_LIMIT = 30_000_000


def lemma1_delta(a: float, b: float, c: float, d: float) -> float:
    """Fidelity advantage of purify-and-swap over swap-and-purify on the
    two-hop, two-pairs-per-hop instance (a,b | c,d)."""
    return swap_fidelity([purified_fidelity(a, b), purified_fidelity(c, d)]) - purified_fidelity(
        swap_fidelity([a, c]), swap_fidelity([b, d])
    )


def success_margin(a: float, b: float, c: float, d: float, p_s: float = 0.818) -> float:
    """purify-and-swap success minus swap-and-purify success, with one
    factor of p_s divided out."""
    return purification_success_prob(a, b) * purification_success_prob(
        c, d
    ) - p_s * purification_success_prob(swap_fidelity([a, c]), swap_fidelity([b, d]))


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def _delta_block(a, b, c, d):
    # a,b,c,d broadcast to a common 4-d block
    pas = _swap2_raw(_purified_fidelity_raw(a, b), _purified_fidelity_raw(c, d))
    sap = _purified_fidelity_raw(_swap2_raw(a, c), _swap2_raw(b, d))
    return pas - sap


def _margin_block(a, b, c, d, p_s):
    return _purification_success_raw(a, b) * _purification_success_raw(
        c, d
    ) - p_s * _purification_success_raw(_swap2_raw(a, c), _swap2_raw(b, d))


def _scan_region(a_grid, b_grid, c_grid, d_grid, block_fn):
    """Chunked 4-d scan; returns (points, nonpositive, violations, min)."""
    total = len(a_grid) * len(b_grid) * len(c_grid) * len(d_grid)
    per_a = total // len(a_grid) if len(a_grid) else 0
    if per_a == 0:
        return 0, 0, 0, float("inf")
    step = max(1, _CHUNK_LIMIT // per_a)
    b = b_grid[:, None, None]
    c = c_grid[None, :, None]
    d = d_grid[None, None, :]
    points = nonpos = viol = 0
    lo = float("inf")
    for start in range(0, len(a_grid), step):
        a = a_grid[start : start + step][:, None, None, None]
        vals = block_fn(a, b[None], c[None], d[None])
        points += vals.size
        nonpos += int(np.count_nonzero(vals <= 0.0))
        viol += int(np.count_nonzero(vals < -_VIOLATION_TOL))
        m = float(vals.min())
        if m < lo:
            lo = m
    return points, nonpos, viol, lo


def lemma1_scan(step: float, regions: Iterable[str] = ("lemma1", "low", "success"), p_s: float = 0.818) -> dict:
    """Grid scans of the purify-first advantage.

    - 'lemma1': a,b in [0.5,1], c,d in [0.7,1]; counts fidelity violations
      (delta below -1e-12; exact-zero boundary ties are not violations).
    - 'low': all four in [0.5,0.7]; counts strict purify-and-swap wins.
    - 'success': all four in [0.7,1]; success-probability margin at p_s.
    """
    if not 0.0 < step <= 0.1:
        raise ValueError("step must lie in (0, 0.1]")
    report: dict = {"step": step}
    if "lemma1" in regions:
        g1 = _grid(0.5, 1.0, step)
        g2 = _grid(0.7, 1.0, step)
        points, _, viol, lo = _scan_region(g1, g1, g2, g2, _delta_block)
        report["lemma1"] = {"points": points, "violations": viol, "min_delta": lo}
    if "low" in regions:
        g = _grid(0.5, 0.7, step)
        points, nonpos, _, lo = _scan_region(g, g, g, g, _delta_block)
        report["low"] = {
            "points": points,
            "wins": points - nonpos,
            "win_fraction": (points - nonpos) / points,
            "min_delta": lo,
        }
    if "success" in regions:
        g = _grid(0.7, 1.0, step)
        points, nonpos, _, lo = _scan_region(
            g, g, g, g, lambda a, b, c, d: _margin_block(a, b, c, d, p_s)
        )
        report["success"] = {
            "points": points,
            "nonpositive": nonpos,
            "min_margin": lo,
            "p_s": p_s,
        }
    return report


def scan_points(region: str, step: float):
    """Per-point rows (a, b, c, d, delta, winner) for CSV export."""
    if region == "lemma1":
        ab = _grid(0.5, 1.0, step)
        cd = _grid(0.7, 1.0, step)
    elif region == "low":
        ab = _grid(0.5, 0.7, step)
        cd = ab
    else:
        raise ValueError(f"unknown region {region!r}")
    for a in ab:
        for b in ab:
            for c in cd:
                for d in cd:
                    delta = lemma1_delta(float(a), float(b), float(c), float(d))
                    winner = "pas" if delta > 0 else ("sap" if delta < 0 else "tie")
                    yield float(a), float(b), float(c), float(d), delta, winner


# ---------------------------------------------------------------------------
# Exhaustive policy oracle

def optimal_policy_fidelity(chain: RepeaterChain) -> float:
    """Best final fidelity over ALL interleavings of purification (between
    pairs sharing a span) and swapping (of adjacent spans), allowing pairs
    to go unused.  Desk scale: at most 8 initial pairs."""
    n_pairs = sum(len(h) for h in chain.hops)
    if n_pairs > 8:
        raise ValueError("policy enumeration bounded at 8 initial pairs")
    l = chain.length
    init = []
    for hop_idx, pairs in enumerate(chain.hops):
        for f in pairs:
            init.append((hop_idx, hop_idx + 1, f))
    memo: dict = {}

    def value(state: tuple) -> float:
        hit = memo.get(state)
        if hit is not None:
            return hit
        best = -1.0
        for u, v, f in state:
            if u == 0 and v == l:
                if f > best:
                    best = f
        n = len(state)
        for i in range(n):
            ui, vi, fi = state[i]
            for j in range(i + 1, n):
                uj, vj, fj = state[j]
                if ui == uj and vi == vj:
                    merged = (ui, vi, purified_fidelity(fi, fj))
                elif vi == uj:
                    merged = (ui, vj, _swap2_raw(fi, fj))
                elif vj == ui:
                    merged = (uj, vi, _swap2_raw(fj, fi))
                else:
                    continue
                rest = state[:i] + state[i + 1 : j] + state[j + 1 :]
                nxt = tuple(sorted(rest + (merged,)))
                cand = value(nxt)
                if cand > best:
                    best = cand
        memo[state] = best
        return best

    return value(tuple(sorted(init)))
