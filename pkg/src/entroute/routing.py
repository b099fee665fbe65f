"""Fidelity- and throughput-constrained min-cost entanglement paths.

Label-setting search over the auxiliary graph.  A label carries the path
cost, a discretized pseudo-fidelity budget, the bottleneck edge
log-throughput, and a discretized path log-throughput; per-edge
purification options come from throughput tables precomputed per
(pair budget, elementary fidelity).

Budget accounting: an edge expanded at split index k demands per-edge
pseudo-fidelity -k*delta_phi but is charged only (k-1)*delta_phi against
the label's budget.  The round-down credit keeps every mirror of an exactly
feasible path alive (so cost never exceeds the true optimum) while retained
labels still certify phi_hat >= phi0 - |path|*delta_phi.
"""

from __future__ import annotations

import heapq
import itertools
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .auxgraph import VIRTUAL_SINK, VIRTUAL_SOURCE, AuxiliaryGraph, build_aux_graph
from .network import QuantumNetwork
from .pair_algebra import inverse_pseudo_fidelity, pseudo_fidelity, swap_fidelity
from .purification import (
    _GRID_TOL,
    ScheduleEntry,
    _ceil_to_grid,
    _pareto_sets,
    candidate_frontier,
    evaluate_tree,
    pumping_frontier,
)

_TOL = 1e-12
_INF = math.inf


@lru_cache(maxsize=None)
def _frontier(pair_budget: int, f_e: float, delta_f: float, delta_xi: float, mode: str = "optimal"):
    if mode == "pumping":
        return tuple(pumping_frontier(pair_budget, f_e, delta_f, delta_xi))
    if mode != "optimal":
        raise ValueError(f"unknown schedule mode {mode!r}")
    return tuple(candidate_frontier(pair_budget, f_e, delta_f, delta_xi))


class EdgeThroughputTable:
    """Threshold-indexed best purification schedules for one (pair budget,
    elementary fidelity) pair.

    psi(k) is the log of expected delivered pairs when the edge must reach
    pseudo-fidelity -k*delta_phi: ln((xi_hat/b) * budget).  Built once and
    then queried read-only by searches sharing the cache.
    """

    def __init__(
        self,
        pair_budget: int,
        f_e: float,
        delta_phi: float,
        delta_f: float = 1e-4,
        delta_xi: float = 1e-4,
        mode: str = "optimal",
    ):
        if pair_budget < 1:
            raise ValueError("pair_budget must be >= 1")
        if delta_phi <= 0:
            raise ValueError("delta_phi must be positive")
        self.pair_budget = pair_budget
        self.f_e = f_e
        self.delta_phi = delta_phi
        self.frontier = _frontier(pair_budget, f_e, delta_f, delta_xi, mode)
        self._leaf = next(e for e in self.frontier if e.b == 1)
        self._entries: dict[int, Optional[ScheduleEntry]] = {}
        self._breaks: list[int] = []
        self._scanned_to = 0
        self._saturated = False
        # tables are shared via the factory cache; searches on worker threads
        # fill the lazy state under this lock
        self._lock = threading.RLock()

    def threshold(self, k: int) -> float:
        return inverse_pseudo_fidelity(-k * self.delta_phi)

    def entry_at(self, f_theta: float) -> Optional[ScheduleEntry]:
        """Best yield-per-pair entry meeting the threshold; ties prefer fewer
        leaves, then higher fidelity (same rules as the scheduler)."""
        best = None
        for e in self.frontier:
            if e.f_hat < f_theta - _GRID_TOL:
                continue
            if best is None or e.ratio() > best.ratio() + _GRID_TOL:
                best = e
            elif abs(e.ratio() - best.ratio()) <= _GRID_TOL:
                if e.b < best.b or (e.b == best.b and e.f_hat > best.f_hat + _GRID_TOL):
                    best = e
        return best

    def entry(self, k: int) -> Optional[ScheduleEntry]:
        with self._lock:
            if k not in self._entries:
                f_theta = self.threshold(k)
                if f_theta <= self.f_e + _GRID_TOL:
                    # raw pairs already qualify; nothing beats yield 1 per pair
                    self._entries[k] = self._leaf
                else:
                    self._entries[k] = self.entry_at(f_theta)
            return self._entries[k]

    def psi(self, k: int) -> Optional[float]:
        e = self.entry(k)
        if e is None:
            return None
        return math.log(e.ratio() * self.pair_budget)

    def breakpoints(self, kmax: int) -> list[int]:
        """Split indices worth expanding: the first feasible k and each k
        whose best ratio strictly improves.  Labels at skipped k are
        dominated by the preceding breakpoint (same cost and throughput,
        more fidelity budget left)."""
        with self._lock:
            while self._scanned_to < kmax and not self._saturated:
                k = self._scanned_to + 1
                self._scanned_to = k
                e = self.entry(k)
                if e is None:
                    continue
                if (
                    not self._breaks
                    or e.ratio() > self._entries[self._breaks[-1]].ratio() + _GRID_TOL
                ):
                    self._breaks.append(k)
                if e.b == 1:
                    self._saturated = True
            return [k for k in self._breaks if k <= kmax]


@lru_cache(maxsize=None)
def edge_throughput_table(
    pair_budget: int,
    f_e: float,
    delta_phi: float,
    delta_f: float = 1e-4,
    delta_xi: float = 1e-4,
    mode: str = "optimal",
) -> EdgeThroughputTable:
    return EdgeThroughputTable(pair_budget, f_e, delta_phi, delta_f, delta_xi, mode)


@dataclass
class RoutePlan:
    """A path with per-edge pair allocations and purification schedules,
    reported with exact (undiscretized) end-to-end metrics."""

    nodes: list
    pair_counts: list
    trees: list
    edge_fidelities: list
    edge_throughputs: list
    fidelity: float
    throughput: float
    cost: float
    phi_hat: float
    psi_hat: float

    def to_json(self) -> dict:
        from .purification import tree_to_json

        return {
            "nodes": list(self.nodes),
            "pair_counts": list(self.pair_counts),
            "trees": [tree_to_json(t) for t in self.trees],
            "edge_fidelities": list(self.edge_fidelities),
            "edge_throughputs": list(self.edge_throughputs),
            "fidelity": self.fidelity,
            "throughput": self.throughput,
            "cost": self.cost,
            "phi_hat": self.phi_hat,
            "psi_hat": self.psi_hat,
        }


class _Label:
    __slots__ = (
        "cost",
        "phi_credit",
        "psi_b",
        "psi_hat",
        "path",
        "vertex",
        "parent",
        "arc",
        "alive",
        "sig",
    )

    def __init__(self, cost, phi_credit, psi_b, psi_hat, path, vertex, parent, arc):
        self.cost = cost
        self.phi_credit = phi_credit
        self.psi_b = psi_b
        self.psi_hat = psi_hat
        self.path = path
        self.vertex = vertex
        self.parent = parent
        self.arc = arc  # (m, k, edge, schedule entry) of the arc into vertex
        self.alive = True
        self.sig = None


def _dominates(a: _Label, b: _Label) -> bool:
    return (
        a.cost <= b.cost + _TOL
        and a.phi_credit >= b.phi_credit - _TOL
        and a.psi_hat >= b.psi_hat - _TOL
    )


def _copy_index(lab: _Label):
    return lab.vertex[1] if lab.vertex[0] != "__virtual__" else 0


def _plan_signature(lab: _Label):
    """Physical content of a label's plan; mirrors of one plan reaching the
    sink through different interchangeable copies hash equal."""
    sig = []
    cur = lab
    while cur is not None:
        if cur.arc is not None:
            m, _, _, entry = cur.arc
            sig.append((m, entry.tree))
        cur = cur.parent
    return lab.path, tuple(sig)


def _sig_of(lab: _Label):
    if lab.sig is None:
        lab.sig = _plan_signature(lab)
    return lab.sig


def _try_insert(pool: list, lab: _Label, R: int) -> bool:
    """Relaxed-dominance insert into the pool of one original node.

    A label is admitted unless >= R alive labels at the same or a higher
    remaining-qubit copy dominate it (a higher copy reaches every arc a
    lower one does, at identical terms).  Mirrors of one physical plan are
    collapsed first so they can never stack up as fake dominators.
    """
    j = _copy_index(lab)
    sig = _sig_of(lab)
    for e in pool:
        if e.alive and _sig_of(e) == sig:
            if _copy_index(e) >= j:
                return False
            e.alive = False
    dominators = 0
    for e in pool:
        if e.alive and _copy_index(e) >= j and _dominates(e, lab):
            dominators += 1
            if dominators >= R:
                return False
    pool[:] = [e for e in pool if e.alive]
    pool.append(lab)
    if R == 1:
        for e in pool[:-1]:
            if _copy_index(e) <= j and _dominates(lab, e):
                e.alive = False
    else:
        for e in pool[:-1]:
            cnt = 0
            je = _copy_index(e)
            for other in pool:
                if other is not e and other.alive and _copy_index(other) >= je:
                    if _dominates(other, e):
                        cnt += 1
                        if cnt >= R:
                            e.alive = False
                            break
    return True


def _search(
    aux: AuxiliaryGraph,
    phi0: float,
    psi0: float,
    delta_phi: float,
    delta_psi: float,
    R: int,
    delta_f: float,
    delta_xi: float,
    stats: Optional[dict],
    mode: str = "optimal",
) -> list[_Label]:
    if phi0 > _TOL:
        raise ValueError("phi0 must be <= 0")
    if delta_phi <= 0 or delta_psi <= 0:
        raise ValueError("step sizes must be positive")
    if R < 1:
        raise ValueError("R must be >= 1")
    net = aux.net
    pools: dict = {}
    counter = itertools.count()
    heap: list = []
    pushed = 0
    expanded = 0

    def push(lab: _Label):
        nonlocal pushed
        key = lab.vertex[0] if lab.vertex[0] != "__virtual__" else lab.vertex
        if _try_insert(pools.setdefault(key, []), lab, R):
            heapq.heappush(
                heap,
                (lab.cost, len(lab.path) - 1, tuple(map(str, lab.path)), next(counter), lab),
            )
            pushed += 1

    root = _Label(0.0, 0.0, _INF, _INF, (aux.s,), VIRTUAL_SOURCE, None, None)
    pools[VIRTUAL_SOURCE] = [root]
    heapq.heappush(heap, (0.0, 0, (str(aux.s),), next(counter), root))

    results: list[_Label] = []
    seen_plans: set = set()
    while heap:
        _, _, _, _, lab = heapq.heappop(heap)
        if not lab.alive:
            continue
        if lab.vertex == VIRTUAL_SINK:
            sig = _plan_signature(lab)
            if sig not in seen_plans:
                seen_plans.add(sig)
                results.append(lab)
                if len(results) >= R:
                    break
            continue
        expanded += 1
        for head, m, edge in aux.out_arcs(lab.vertex):
            if edge is None:
                # zero-cost virtual hop: source fan-out or sink collect
                push(
                    _Label(
                        lab.cost,
                        lab.phi_credit,
                        lab.psi_b,
                        lab.psi_hat,
                        lab.path,
                        head,
                        lab,
                        None,
                    )
                )
                continue
            v, _ = head
            if v in lab.path:
                continue
            kmax = int(math.floor((lab.phi_credit - phi0) / delta_phi + 1e-9)) + 1
            if kmax < 1:
                continue
            table = edge_throughput_table(m, edge.fidelity, delta_phi, delta_f, delta_xi, mode)
            psi_v = 0.0 if v == aux.t else math.log(net.node(v).swap_prob)
            for k in table.breakpoints(kmax):
                entry = table.entry(k)
                psi_e = math.log(entry.ratio() * m)
                if lab.psi_b == _INF:
                    psi_hat2 = _ceil_to_grid(psi_v + psi_e, delta_psi)
                elif psi_e <= lab.psi_b:
                    psi_hat2 = _ceil_to_grid(
                        psi_v + lab.psi_hat + psi_e - lab.psi_b, delta_psi
                    )
                else:
                    psi_hat2 = _ceil_to_grid(psi_v + lab.psi_hat, delta_psi)
                if psi_hat2 < psi0 - _TOL:
                    continue
                phi_credit2 = lab.phi_credit - (k - 1) * delta_phi
                if phi_credit2 < phi0 - 1e-9:
                    continue
                push(
                    _Label(
                        lab.cost + edge.cost_of(m),
                        phi_credit2,
                        min(psi_e, lab.psi_b),
                        psi_hat2,
                        lab.path + (v,),
                        head,
                        lab,
                        (m, k, edge, entry),
                    )
                )

    if stats is not None:
        per_vertex: dict = {}
        for key, pool in pools.items():
            for e in pool:
                if e.alive:
                    per_vertex.setdefault(e.vertex, []).append(e)
        stats["pushed"] = pushed
        stats["expanded"] = expanded
        stats["alive_per_vertex"] = {v: len(ls) for v, ls in per_vertex.items()}
        stats["labels"] = {
            v: [(e.cost, e.phi_credit, e.psi_b, e.psi_hat, e.path) for e in ls]
            for v, ls in per_vertex.items()
        }
    return results


def _plan_from_label(aux: AuxiliaryGraph, lab: _Label, delta_phi: float) -> RoutePlan:
    arcs = []
    cur = lab
    while cur is not None:
        if cur.arc is not None:
            arcs.append(cur.arc)
        cur = cur.parent
    arcs.reverse()
    nodes = list(lab.path)
    pair_counts, trees, fids, lams = [], [], [], []
    for m, _, edge, entry in arcs:
        f_exact, xi_exact = evaluate_tree(entry.tree, edge.fidelity)
        pair_counts.append(m)
        trees.append(entry.tree)
        fids.append(f_exact)
        lams.append(xi_exact / entry.b * m)
    p_prod = 1.0
    for v in nodes[1:-1]:
        p_prod *= aux.net.node(v).swap_prob
    return RoutePlan(
        nodes=nodes,
        pair_counts=pair_counts,
        trees=trees,
        edge_fidelities=fids,
        edge_throughputs=lams,
        fidelity=swap_fidelity(fids),
        throughput=min(lams) * p_prod,
        cost=lab.cost,
        phi_hat=lab.phi_credit - len(arcs) * delta_phi,
        psi_hat=lab.psi_hat,
    )


def min_cost_path(
    aux: AuxiliaryGraph,
    phi0: float,
    psi0: float,
    delta_phi: float,
    delta_psi: float,
    *,
    delta_f: float = 1e-4,
    delta_xi: float = 1e-4,
    stats: Optional[dict] = None,
    mode: str = "optimal",
) -> Optional[RoutePlan]:
    """Cheapest path meeting the discretized fidelity and throughput
    constraints, or None when no label reaches the sink.

    mode picks the per-edge schedule family: "optimal" (full candidate
    frontier) or "pumping" (left-deep chains only, the step-wise baseline).
    """
    found = _search(aux, phi0, psi0, delta_phi, delta_psi, 1, delta_f, delta_xi, stats, mode)
    if not found:
        return None
    return _plan_from_label(aux, found[0], delta_phi)


def k_paths(
    aux: AuxiliaryGraph,
    phi0: float,
    psi0: float,
    deltas: tuple,
    R: int,
    *,
    delta_f: float = 1e-4,
    delta_xi: float = 1e-4,
    stats: Optional[dict] = None,
) -> list[RoutePlan]:
    """Up to R cheapest feasible plans under relaxed dominance (labels
    dominated by fewer than R entries are retained)."""
    delta_phi, delta_psi = deltas
    found = _search(aux, phi0, psi0, delta_phi, delta_psi, R, delta_f, delta_xi, stats)
    return [_plan_from_label(aux, lab, delta_phi) for lab in found]


def discretization_steps(aux: AuxiliaryGraph, phi0: float, psi0: float, eps: float):
    """Step sizes for an eps-optimal search: delta_phi = eps|phi0|/|V| and
    delta_psi = eps * (psi value range) / |V|.

    The range substitutes for |psi0| because the throughput threshold is
    commonly 1 (psi0 = 0), which would make the literal rule vacuous."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    n_nodes = len(aux.net.nodes)
    delta_phi = max(eps * abs(phi0) / n_nodes, 1e-12)
    psi_max = 0.0
    for e in aux.net.edges:
        m = _max_allocation(aux, e)
        if m >= 1:
            psi_max = max(psi_max, math.log(m))
    psi_range = max(psi_max - psi0, 1e-6)
    delta_psi = max(eps * psi_range / n_nodes, 1e-12)
    return delta_phi, delta_psi


def _max_allocation(aux: AuxiliaryGraph, edge) -> int:
    """Largest pair count any auxiliary arc realizes over this edge."""
    best = 0
    for tail, head in ((edge.u, edge.v), (edge.v, edge.u)):
        if head == aux.s or tail == aux.t:
            continue
        tail_idx = aux.copy_indices(tail)
        head_idx = aux.copy_indices(head)
        if not tail_idx or not head_idx:
            continue
        q_head = aux.net.node(head).qubits
        cap = min(max(tail_idx), edge.capacity)
        for j in head_idx:
            m = q_head - j
            if 1 <= m <= cap:
                best = max(best, m)
    return best


# ---------------------------------------------------------------------------
# exhaustive oracle


@lru_cache(maxsize=None)
def _fronts(m: int, f_e: float):
    return _pareto_sets(m, f_e)


def _simple_paths(net: QuantumNetwork, s, t):
    """All simple s-t paths, deterministic order."""
    path = [s]
    seen = {s}

    def walk(u):
        if u == t:
            yield list(path)
            return
        for w in sorted(net.neighbors(u), key=str):
            if w in seen:
                continue
            seen.add(w)
            path.append(w)
            yield from walk(w)
            path.pop()
            seen.remove(w)

    yield from walk(s)


def brute_force_route(
    net: QuantumNetwork, s, t, f0: float, q0: float
) -> Optional[RoutePlan]:
    """Exact minimum: enumerate simple paths and pair-count assignments,
    evaluating edges against their exact schedule Pareto fronts.

    The throughput constraint is per-edge once the swap losses are factored
    out, so each edge independently contributes its best pseudo-fidelity
    among qualifying schedules."""
    if len(net.nodes) > 8 or any(n.qubits > 4 for n in net.nodes.values()):
        raise ValueError("oracle bounded to |V| <= 8 and Q_v <= 4")
    if s == t or s not in net.nodes or t not in net.nodes:
        raise ValueError("bad endpoints")
    phi0 = pseudo_fidelity(f0)
    best = None
    best_key = None
    for nodes in _simple_paths(net, s, t):
        edges = [net.edge(u, v) for u, v in zip(nodes, nodes[1:])]
        p_prod = 1.0
        for v in nodes[1:-1]:
            p_prod *= net.node(v).swap_prob
        need_lambda = q0 / p_prod
        q_s = net.node(nodes[0]).qubits
        q_t = net.node(nodes[-1]).qubits
        for ms in itertools.product(*(range(1, e.capacity + 1) for e in edges)):
            if ms[0] > q_s or ms[-1] > q_t:
                continue
            if any(
                a + b > net.node(v).qubits
                for v, a, b in zip(nodes[1:-1], ms, ms[1:])
            ):
                continue
            cost = sum(e.cost_of(m) for e, m in zip(edges, ms))
            key = (cost, len(nodes), tuple(map(str, nodes)), ms)
            if best_key is not None and key >= best_key:
                continue
            choice = _best_edge_choices(edges, ms, need_lambda)
            if choice is None:
                continue
            phis, picks = choice
            if sum(phis) < phi0 - _TOL:
                continue
            fids = [f for f, _, _ in picks]
            lams = [lam for _, lam, _ in picks]
            best = RoutePlan(
                nodes=list(nodes),
                pair_counts=list(ms),
                trees=[tree for _, _, tree in picks],
                edge_fidelities=fids,
                edge_throughputs=lams,
                fidelity=swap_fidelity(fids),
                throughput=min(lams) * p_prod,
                cost=cost,
                phi_hat=sum(phis),
                psi_hat=math.log(min(lams)) + math.log(p_prod),
            )
            best_key = key
    return best


def _best_edge_choices(edges, ms, need_lambda):
    """Per edge: the max-pseudo-fidelity exact schedule delivering at least
    need_lambda expected pairs, or None if some edge cannot."""
    phis = []
    picks = []
    for e, m in zip(edges, ms):
        sets = _fronts(m, e.fidelity)
        best_f, best_lam, best_tree = -1.0, 0.0, None
        for b in range(1, m + 1):
            for f, xi, tree in sets[b]:
                lam = xi / b * m
                if lam >= need_lambda - _TOL and f > best_f:
                    best_f, best_lam, best_tree = f, lam, tree
        if best_tree is None:
            return None
        phis.append(pseudo_fidelity(best_f))
        picks.append((best_f, best_lam, best_tree))
    return phis, picks
