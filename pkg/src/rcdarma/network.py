"""Communication graphs and doubly stochastic consensus weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import sparse

from .errors import AssumptionViolation, GraphGenerationError

STOCHASTIC_TOL = 1e-12
MAX_RESAMPLES = 100


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _components(n, edges):
    parent = list(range(n))
    count = n
    for i, j in edges:
        ri, rj = _find(parent, i), _find(parent, j)
        if ri != rj:
            parent[ri] = rj
            count -= 1
    return count


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``; edges stored as sorted pairs."""

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one node")
        cleaned = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside 0..{self.n - 1}")
            cleaned.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(cleaned)))

    @property
    def is_connected(self) -> bool:
        return _components(self.n, self.edges) == 1

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def laplacian(self) -> np.ndarray:
        lap = np.diag(self.degrees().astype(float))
        for i, j in self.edges:
            lap[i, j] = lap[j, i] = -1.0
        return lap

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, obj) -> "Graph":
        return cls(int(obj["n"]), tuple(tuple(e) for e in obj["edges"]))


def complete_graph(n):
    return Graph(n, tuple(combinations(range(n), 2)))


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def ring_graph(n):
    edges = [(i, (i + 1) % n) for i in range(n)] if n > 2 else path_graph(n).edges
    return Graph(n, tuple(edges))


def star_graph(n):
    return Graph(n, tuple((0, i) for i in range(1, n)))


def erdos_renyi(n: int, p: float, rng_seed: int, max_tries: int = MAX_RESAMPLES) -> Graph:
    """G(n, p) conditioned on connectivity, by rejection."""
    if n < 1 or not 0.0 <= p <= 1.0:
        raise ValueError(f"need n >= 1 and 0 <= p <= 1, got n={n}, p={p}")
    rng = np.random.default_rng(rng_seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_tries):
        keep = rng.random(iu.size) < p
        g = Graph(n, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))
        if g.is_connected:
            return g
    raise GraphGenerationError(
        f"no connected G({n}, {p}) sample in {max_tries} draws; try a larger p "
        f"(connectivity threshold is about log(n)/n = {math.log(max(n, 2)) / n:.3g})"
    )


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Symmetric doubly stochastic matrix conforming to a connected graph.

    ``spectrum`` is sorted by decreasing modulus, ``consensus_gap`` is the largest
    modulus among the non-Perron eigenvalues. Construction validates everything.
    """

    entries: np.ndarray
    spectrum: np.ndarray
    consensus_gap: float

    @classmethod
    def from_entries(cls, entries, graph: Graph | None = None) -> "WeightMatrix":
        w = np.array(entries, dtype=float)
        n = w.shape[0]
        if w.shape != (n, n):
            raise ValueError("weight matrix must be square")
        if not np.allclose(w, w.T, atol=STOCHASTIC_TOL, rtol=0):
            raise AssumptionViolation("weight_spectrum", "weight matrix is not symmetric")
        ones = np.ones(n)
        if np.abs(w @ ones - ones).max() > STOCHASTIC_TOL or np.abs(ones @ w - ones).max() > STOCHASTIC_TOL:
            raise AssumptionViolation("weight_spectrum", "weight matrix is not doubly stochastic")
        if graph is not None:
            if graph.n != n:
                raise ValueError("graph and weight matrix sizes differ")
            adj = np.zeros((n, n), dtype=bool)
            for i, j in graph.edges:
                adj[i, j] = adj[j, i] = True
            off = ~np.eye(n, dtype=bool)
            if np.any((w != 0) & off & ~adj) or np.any((w == 0) & adj):
                raise AssumptionViolation("weight_spectrum", "weight matrix does not match the graph sparsity")
        eig = np.linalg.eigvalsh(w)
        spectrum = eig[np.argsort(-np.abs(eig), kind="stable")]
        gap = float(np.abs(np.linalg.eigvalsh(w - np.full((n, n), 1.0 / n))).max()) if n > 1 else 0.0
        if gap >= 1.0:
            raise AssumptionViolation(
                "weight_spectrum", f"non-Perron eigenvalue of modulus {gap:.6g} >= 1; consensus fails"
            )
        w.setflags(write=False)
        spectrum.setflags(write=False)
        return cls(w, spectrum, gap)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def csr(self) -> sparse.csr_array:
        return sparse.csr_array(self.entries)

    def to_json(self) -> dict:
        return {"rows": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj, graph: Graph | None = None) -> "WeightMatrix":
        return cls.from_entries(obj["rows"], graph)


def _require_connected(g: Graph):
    if not g.is_connected:
        raise AssumptionViolation("disconnected", f"graph with {g.n} nodes is not connected")


def laplacian_weights(g: Graph) -> WeightMatrix:
    """``I - L / (lambda_2 + lambda_n)`` with L the graph Laplacian."""
    _require_connected(g)
    if g.n == 1:
        return WeightMatrix.from_entries(np.eye(1), g)
    lam = np.linalg.eigvalsh(g.laplacian())
    if lam[1] < 1e-10:
        raise AssumptionViolation("disconnected", "algebraic connectivity is zero")
    w = np.eye(g.n) - g.laplacian() / (lam[1] + lam[-1])
    # symmetrize away rounding so the stochasticity checks see exact row sums
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return WeightMatrix.from_entries(w, g)


def metropolis_weights(g: Graph) -> WeightMatrix:
    """``W_ij = 1 / (1 + max(deg_i, deg_j))`` on edges, diagonal fills the row to one."""
    _require_connected(g)
    deg = g.degrees()
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    np.fill_diagonal(w, 1.0 - w.sum(axis=1))
    return WeightMatrix.from_entries(w, g)


WEIGHT_RULES = {"laplacian": laplacian_weights, "metropolis": metropolis_weights}
