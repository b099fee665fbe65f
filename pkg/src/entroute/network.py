"""Network model: nodes with qubit budgets, edges with pair capacities and
elementary fidelities, and per-edge allocation cost functions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

# cost tags: ("unit",) | ("weighted", w) | ("table", (c_1, ..., c_cap))
UNIT_COST = ("unit",)


@dataclass(frozen=True)
class NodeSpec:
    id: object
    qubits: int
    swap_prob: float = 1.0

    def __post_init__(self):
        if self.qubits < 1:
            raise ValueError(f"node {self.id!r}: qubits must be >= 1")
        if not 0.0 < self.swap_prob <= 1.0:
            raise ValueError(f"node {self.id!r}: swap_prob outside (0, 1]")


@dataclass(frozen=True)
class EdgeSpec:
    u: object
    v: object
    capacity: int
    fidelity: float
    cost: tuple = UNIT_COST

    def __post_init__(self):
        if self.u == self.v:
            raise ValueError(f"self-loop at {self.u!r}")
        if self.capacity < 1:
            raise ValueError(f"edge ({self.u!r},{self.v!r}): capacity must be >= 1")
        if not 0.5 < self.fidelity <= 1.0:
            raise ValueError(f"edge ({self.u!r},{self.v!r}): fidelity outside (0.5, 1]")
        tag = self.cost[0]
        if tag == "unit":
            pass
        elif tag == "weighted":
            if len(self.cost) != 2 or self.cost[1] < 0:
                raise ValueError("weighted cost needs a nonnegative weight")
        elif tag == "table":
            # one entry per allocation size, must be nonnegative and nondecreasing
            table = self.cost[1]
            if len(self.cost) != 2 or len(table) != self.capacity:
                raise ValueError("cost table must have one entry per pair count")
            if any(c < 0 for c in table) or any(
                a > b for a, b in zip(table, table[1:])
            ):
                raise ValueError("cost table must be nonnegative and nondecreasing")
        else:
            raise ValueError(f"unknown cost tag {tag!r}")

    def cost_of(self, m: int) -> float:
        """Cost of allocating m elementary pairs on this edge."""
        if not 1 <= m <= self.capacity:
            raise ValueError(f"pair count {m} outside [1, {self.capacity}]")
        tag = self.cost[0]
        if tag == "unit":
            return float(m)
        if tag == "weighted":
            return self.cost[1] * m
        return float(self.cost[1][m - 1])


class QuantumNetwork:
    """Undirected simple graph of quantum repeaters."""

    def __init__(self, nodes: Iterable[NodeSpec], edges: Iterable[EdgeSpec]):
        self.nodes: dict = {}
        for n in nodes:
            if n.id in self.nodes:
                raise ValueError(f"duplicate node {n.id!r}")
            self.nodes[n.id] = n
        self.edges: list[EdgeSpec] = []
        self._adj: dict = {v: {} for v in self.nodes}
        for e in edges:
            if e.u not in self.nodes or e.v not in self.nodes:
                raise ValueError(f"edge ({e.u!r},{e.v!r}) references unknown node")
            if e.v in self._adj[e.u]:
                raise ValueError(f"duplicate edge ({e.u!r},{e.v!r})")
            self.edges.append(e)
            self._adj[e.u][e.v] = e
            self._adj[e.v][e.u] = e

    def node(self, v) -> NodeSpec:
        return self.nodes[v]

    def edge(self, u, v) -> EdgeSpec:
        return self._adj[u][v]

    def has_edge(self, u, v) -> bool:
        return u in self._adj and v in self._adj[u]

    def neighbors(self, v) -> list:
        return list(self._adj[v])

    def degree(self, v) -> int:
        return len(self._adj[v])

    def to_json(self) -> dict:
        nodes = [
            {"id": n.id, "qubits": n.qubits, "swap_prob": n.swap_prob}
            for n in self.nodes.values()
        ]
        edges = []
        for e in self.edges:
            row = {"u": e.u, "v": e.v, "capacity": e.capacity, "fidelity": e.fidelity}
            if e.cost[0] == "weighted":
                row["weight"] = e.cost[1]
            elif e.cost[0] == "table":
                row["cost_table"] = list(e.cost[1])
            edges.append(row)
        return {"nodes": nodes, "edges": edges}

    @classmethod
    def from_json(cls, obj: dict) -> "QuantumNetwork":
        nodes = [
            NodeSpec(n["id"], n["qubits"], n.get("swap_prob", 1.0))
            for n in obj["nodes"]
        ]
        edges = []
        for row in obj["edges"]:
            if "cost_table" in row:
                cost = ("table", tuple(row["cost_table"]))
            elif "weight" in row:
                cost = ("weighted", row["weight"])
            else:
                cost = UNIT_COST
            edges.append(
                EdgeSpec(row["u"], row["v"], row["capacity"], row["fidelity"], cost)
            )
        return cls(nodes, edges)

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "QuantumNetwork":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
