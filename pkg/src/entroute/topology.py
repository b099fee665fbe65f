"""Seeded topology and flow-request generation for experiments.

Waxman graphs retry with incremented sub-seeds until connected; grids are
connected by construction.  Link fidelities are truncated-normal samples,
qubit budgets scale with node degree.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .multiflow import FlowRequest
from .network import EdgeSpec, NodeSpec, QuantumNetwork

_MAX_RETRIES = 64


@dataclass(frozen=True)
class TopologySpec:
    kind: str  # "waxman" | "grid"
    n: int = 0
    rows: int = 0
    cols: int = 0
    alpha: float = 0.4
    beta_w: float = 0.2
    domain_size: float = 1.0
    capacity: int = 10
    fidelity_mu: float = 0.9
    fidelity_sigma: float = 0.05
    fidelity_lo: float = 0.8
    fidelity_hi: float = 1.0
    qubit_allowance: Optional[int] = None  # pairs per neighbor; None = capacity
    swap_prob: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("waxman", "grid"):
            raise ValueError(f"unknown topology kind {self.kind!r}")
        if self.kind == "waxman" and self.n < 2:
            raise ValueError("waxman graphs need n >= 2")
        if self.kind == "grid" and self.rows * self.cols < 2:
            raise ValueError("grid needs at least 2 nodes")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not 0.8 <= self.fidelity_lo < self.fidelity_hi <= 1.0:
            # keep the sampled range inside what the experiments assume
            raise ValueError("fidelity range must sit within [0.8, 1.0]")


def spec_from_json(d: dict) -> TopologySpec:
    return TopologySpec(**d)


def _truncated_normal(rng, mu, sigma, lo, hi) -> float:
    if sigma <= 0:
        return min(max(mu, lo), hi)
    for _ in range(100_000):
        x = rng.normal(mu, sigma)
        if lo <= x <= hi:
            return float(x)
    raise RuntimeError("truncated-normal rejection sampling failed")


def _allowance(spec: TopologySpec) -> int:
    return spec.capacity if spec.qubit_allowance is None else spec.qubit_allowance


def _build(spec: TopologySpec, ids, pairs, rng) -> QuantumNetwork:
    degree: dict = {v: 0 for v in ids}
    edges = []
    for u, v in pairs:
        f = _truncated_normal(
            rng, spec.fidelity_mu, spec.fidelity_sigma, spec.fidelity_lo, spec.fidelity_hi
        )
        edges.append(EdgeSpec(u, v, spec.capacity, f))
        degree[u] += 1
        degree[v] += 1
    allowance = _allowance(spec)
    nodes = [
        NodeSpec(v, max(1, degree[v] * allowance), spec.swap_prob) for v in ids
    ]
    return QuantumNetwork(nodes, edges)


def _connected(ids, pairs) -> bool:
    adj: dict = {v: [] for v in ids}
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    seen = {ids[0]}
    frontier = [ids[0]]
    while frontier:
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return len(seen) == len(ids)


def generate(spec: TopologySpec) -> QuantumNetwork:
    """Deterministic per seed; Waxman retries disconnected draws with
    sub-seed increments up to a bounded count."""
    if spec.kind == "grid":
        return _grid(spec)
    return _waxman(spec)


def _grid(spec: TopologySpec) -> QuantumNetwork:
    rng = np.random.default_rng(spec.seed)
    r, c = spec.rows, spec.cols
    ids = list(range(r * c))
    pairs = []
    for i in range(r):
        for j in range(c):
            v = i * c + j
            if j + 1 < c:
                pairs.append((v, v + 1))
            if i + 1 < r:
                pairs.append((v, v + c))
    return _build(spec, ids, pairs, rng)


def _waxman(spec: TopologySpec) -> QuantumNetwork:
    for attempt in range(_MAX_RETRIES):
        rng = np.random.default_rng(spec.seed + attempt)
        pos = rng.uniform(0.0, spec.domain_size, size=(spec.n, 2))
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        scale = float(dist.max())
        if scale <= 0:
            continue
        ids = list(range(spec.n))
        pairs = []
        for i in range(spec.n):
            for j in range(i + 1, spec.n):
                p = spec.alpha * math.exp(-dist[i, j] / (spec.beta_w * scale))
                if rng.random() < p:
                    pairs.append((i, j))
        if _connected(ids, pairs):
            return _build(spec, ids, pairs, rng)
    raise RuntimeError(
        f"no connected draw within {_MAX_RETRIES} sub-seeds of {spec.seed}"
    )


def sample_flows(
    net: QuantumNetwork,
    count: int,
    seed: int,
    *,
    f0: float = 0.8,
    weight: float = 1.0,
    r_k: int = 3,
) -> list:
    """Distinct node pairs, uniform without replacement; the graph is
    undirected so pairs are canonically oriented."""
    if count < 1:
        raise ValueError("count must be >= 1")
    ids = sorted(net.nodes, key=str)
    pairs = list(itertools.combinations(ids, 2))
    if count > len(pairs):
        raise ValueError(f"only {len(pairs)} node pairs available")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pairs), size=count, replace=False)
    return [
        FlowRequest(f"flow{n}", pairs[i][0], pairs[i][1], f0, weight, r_k)
        for n, i in enumerate(picks)
    ]


def chain_network(
    hop_fidelities, pairs_per_hop: int, *, swap_prob: float = 1.0
) -> QuantumNetwork:
    """Line topology for repeater-chain experiments: one node per repeater,
    every hop with the given elementary fidelity and capacity."""
    l = len(hop_fidelities)
    if l < 1:
        raise ValueError("need at least one hop")
    nodes = [
        NodeSpec(i, max(1, 2 * pairs_per_hop), swap_prob) for i in range(l + 1)
    ]
    edges = [
        EdgeSpec(i, i + 1, pairs_per_hop, f) for i, f in enumerate(hop_fidelities)
    ]
    return QuantumNetwork(nodes, edges)


def perturbed(spec: TopologySpec, trial: int) -> TopologySpec:
    """Same spec, shifted seed: trial substreams for repeated generation."""
    return replace(spec, seed=spec.seed + 1000 * (trial + 1))
