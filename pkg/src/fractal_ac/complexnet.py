"""Complex-impedance circuit graphs and the Kirchhoff (Dirichlet) solver.

The solver here is deliberately independent of every closed form in the
package: it only knows how to assemble a weighted Laplacian from edge
admittances and eliminate it.  Everything else is checked against it.
"""
from __future__ import annotations

import cmath
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateTransform,
    InfiniteImpedance,
    SingularSystem,
    TopologyError,
)

PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    z: complex


@dataclass(frozen=True)
class CircuitGraph:
    """Undirected multigraph with complex edge impedances.

    ``cells`` is builder metadata (address word -> corner node ids) and is
    not part of the JSON netlist.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    terminals: tuple[str, ...]
    cells: Mapping[str, tuple[str, ...]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "terminals", tuple(self.terminals))
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise TopologyError("duplicate node ids")
        for e in self.edges:
            if e.a not in known or e.b not in known:
                raise TopologyError(f"edge {e.a}-{e.b} has an undeclared endpoint")
            if e.a == e.b:
                raise TopologyError(f"self-loop at {e.a}")
            if e.z == 0:
                raise TopologyError(f"zero-impedance edge {e.a}-{e.b}; contract the nodes instead")
            if not cmath.isfinite(e.z):
                raise TopologyError(f"non-finite impedance on edge {e.a}-{e.b}")
        missing = [t for t in self.terminals if t not in known]
        if missing:
            raise TopologyError(f"terminals not in graph: {missing}")
        if len(set(self.terminals)) != len(self.terminals):
            raise TopologyError("duplicate terminals")

    @property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def with_terminals(self, terminals: Sequence[str]) -> "CircuitGraph":
        return CircuitGraph(self.nodes, self.edges, tuple(terminals), self.cells)

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for e in self.edges:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
        seen = {self.nodes[0]}
        queue = deque(seen)
        while queue:
            for nb in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        return len(seen) == len(self.nodes)

    def laplacian(self) -> np.ndarray:
        """Dense complex admittance Laplacian; parallel edges add."""
        idx = self.index
        Y = np.zeros((len(self.nodes), len(self.nodes)), dtype=complex)
        for e in self.edges:
            i, j, y = idx[e.a], idx[e.b], 1.0 / e.z
            Y[i, i] += y
            Y[j, j] += y
            Y[i, j] -= y
            Y[j, i] -= y
        return Y

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "terminals": list(self.terminals),
            "edges": [{"a": e.a, "b": e.b, "re": e.z.real, "im": e.z.imag} for e in self.edges],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "CircuitGraph":
        edges = [Edge(d["a"], d["b"], complex(d["re"], d["im"])) for d in data["edges"]]
        return cls(tuple(data["nodes"]), tuple(edges), tuple(data["terminals"]))

    @classmethod
    def from_json(cls, text: str) -> "CircuitGraph":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DirichletSolution:
    potentials: dict[str, complex]
    edge_currents: tuple[complex, ...]
    boundary_currents: dict[str, complex]
    kcl_residual: float

    def voltages(self, ids: Iterable[str]) -> np.ndarray:
        return np.array([self.potentials[i] for i in ids], dtype=complex)


def gauss_solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve ``A X = B`` by Gaussian elimination with partial pivoting.

    Raises SingularSystem when a pivot falls below ``PIVOT_RTOL`` times the
    largest absolute row sum of ``A``.
    """
    A = np.array(A, dtype=complex)
    B = np.array(B, dtype=complex)
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    n = A.shape[0]
    if n == 0:
        return B[:, 0] if vector else B
    scale = float(np.max(np.sum(np.abs(A), axis=1)))
    threshold = PIVOT_RTOL * scale
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        pivot = abs(A[p, k])
        if not pivot > threshold:
            raise SingularSystem(
                f"pivot {pivot:.3e} at column {k} below threshold {threshold:.3e}", pivot=pivot
            )
        if p != k:
            A[[k, p]] = A[[p, k]]
            B[[k, p]] = B[[p, k]]
        f = A[k + 1:, k] / A[k, k]
        A[k + 1:, k:] -= np.outer(f, A[k, k:])
        B[k + 1:] -= np.outer(f, B[k])
    X = np.empty_like(B)
    for k in range(n - 1, -1, -1):
        X[k] = (B[k] - A[k, k + 1:] @ X[k + 1:]) / A[k, k]
    if not np.all(np.isfinite(X)):
        raise SingularSystem("non-finite solution")
    return X[:, 0] if vector else X


def solve_dirichlet(graph: CircuitGraph, boundary: Mapping[str, complex]) -> DirichletSolution:
    """Potentials, edge currents and terminal currents for given terminal voltages.

    ``boundary_currents[t]`` is the current driven *into* the network at t.
    """
    if set(boundary) != set(graph.terminals):
        raise TopologyError("boundary data must assign every terminal and nothing else")
    if not graph.is_connected():
        raise TopologyError("graph is not connected")
    idx = graph.index
    Y = graph.laplacian()
    term = [idx[t] for t in graph.terminals]
    tset = set(term)
    inner = [i for i in range(len(graph.nodes)) if i not in tset]
    V = np.zeros(len(graph.nodes), dtype=complex)
    V[term] = [complex(boundary[t]) for t in graph.terminals]
    if inner:
        rhs = -Y[np.ix_(inner, term)] @ V[term]
        V[inner] = gauss_solve(Y[np.ix_(inner, inner)], rhs)
    injected = Y @ V
    residual = 0.0
    if inner:
        flow = np.abs(Y[np.ix_(inner, range(len(V)))]) @ np.abs(V)
        residual = float(np.max(np.abs(injected[inner])) / max(float(np.max(flow)), 1e-300))
    currents = tuple((V[idx[e.a]] - V[idx[e.b]]) / e.z for e in graph.edges)
    return DirichletSolution(
        potentials={n: complex(V[i]) for n, i in idx.items()},
        edge_currents=tuple(complex(c) for c in currents),
        boundary_currents={t: complex(injected[idx[t]]) for t in graph.terminals},
        kcl_residual=residual,
    )


def effective_impedance(graph: CircuitGraph, a: str, b: str) -> complex:
    """Impedance seen between ``a`` and ``b`` with every other node floating."""
    if a == b:
        raise TopologyError("effective impedance needs two distinct nodes")
    sol = solve_dirichlet(graph.with_terminals((a, b)), {a: 1.0, b: 0.0})
    current = sol.boundary_currents[a]
    if abs(current) == 0.0 or not cmath.isfinite(1.0 / current):
        raise InfiniteImpedance(f"no current flows between {a} and {b}")
    return 1.0 / current


def delta_to_y(zs: Sequence[complex]) -> tuple[complex, complex, complex]:
    """Delta edges to star arms.

    Edge ``i`` of the delta is the one opposite corner ``i``; arm ``i`` of the
    star hangs off corner ``i``.
    """
    z = [complex(v) for v in zs]
    if any(v == 0 for v in z):
        raise DegenerateTransform("zero impedance in delta")
    total = z[0] + z[1] + z[2]
    if abs(total) <= 1e-300:
        raise DegenerateTransform("delta impedances sum to zero")
    return (z[1] * z[2] / total, z[0] * z[2] / total, z[0] * z[1] / total)


def y_to_delta(zs: Sequence[complex]) -> tuple[complex, complex, complex]:
    z = [complex(v) for v in zs]
    if any(v == 0 for v in z):
        raise DegenerateTransform("zero impedance in star")
    s = z[0] * z[1] + z[1] * z[2] + z[2] * z[0]
    return (s / z[0], s / z[1], s / z[2])


def y_delta(mode: str, zs: Sequence[complex]) -> tuple[complex, complex, complex]:
    if mode == "toY":
        return delta_to_y(zs)
    if mode == "toDelta":
        return y_to_delta(zs)
    raise ValueError(f"mode must be 'toY' or 'toDelta', got {mode!r}")


def power_dissipation(graph: CircuitGraph, sol: DirichletSolution) -> float:
    """Real power burned in the edges, sum of Re(Z)|I|^2 (RMS phasors)."""
    return math.fsum(e.z.real * abs(i) ** 2 for e, i in zip(graph.edges, sol.edge_currents))


def boundary_input_power(sol: DirichletSolution) -> float:
    """Real power delivered through the terminals, Re(sum V conj(I))."""
    total = sum(sol.potentials[t] * i.conjugate() for t, i in sol.boundary_currents.items())
    return complex(total).real


def edge(a: str, b: str, z: complex) -> Edge:
    return Edge(a, b, complex(z))


def node_id(prefix: str, label: str) -> str:
    return f"{prefix}/{label}" if prefix else label
