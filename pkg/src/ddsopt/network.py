"""
Communication graphs and mixing matrices.

Agents are indexed ``0, ..., m-1``. A stacked iterate is stored as an
``(m, n)`` array whose row ``i`` is the local copy held by agent ``i``; flat
vectors of length ``m * n`` are accepted and returned in the same shape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

MAX_GRAPH_DRAWS = 1024
STOCHASTIC_TOL = 1e-12
EIGEN_TOL = 1e-10


class GraphSamplingError(RuntimeError):
    pass


class MixingMatrixError(ValueError):
    """Raised when a weight matrix fails one of the mixing requirements."""

    def __init__(self, check, detail=""):
        self.check = check
        super().__init__(f"mixing matrix check failed: {check}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph on ``m`` agents."""

    m: int
    edges: frozenset
    neighbors: tuple = field(init=False)

    def __post_init__(self):
        nbrs = [[] for _ in range(self.m)]
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on agent {i}")
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise ValueError(f"edge ({i}, {j}) out of range for m={self.m}")
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "neighbors", tuple(tuple(sorted(v)) for v in nbrs))
        if not self.is_connected():
            raise ValueError("graph is not connected")

    @classmethod
    def from_edges(cls, m, edges):
        return cls(m, frozenset((min(i, j), max(i, j)) for i, j in edges))

    @property
    def degrees(self):
        return np.array([len(v) for v in self.neighbors])

    def to_networkx(self):
        g = nx.Graph()
        g.add_nodes_from(range(self.m))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self):
        return self.m == 1 or nx.is_connected(self.to_networkx())


def generate_graph(m, p_c, seed):
    """
    Draw a connected Erdos-Renyi graph.

    Each unordered pair is linked independently with probability `p_c`.
    Disconnected draws are discarded; draw ``t`` uses the generator seeded
    with ``(seed, t)``, so the result depends only on ``(m, p_c, seed)``.
    """
    if m < 2:
        raise ValueError("need at least two agents")
    if not 0 < p_c <= 1:
        raise ValueError("edge probability must lie in (0, 1]")
    iu, ju = np.triu_indices(m, k=1)
    for attempt in range(MAX_GRAPH_DRAWS):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random(iu.size) < p_c
        edges = frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
        try:
            return Graph(m, edges)
        except ValueError:
            continue
    raise GraphSamplingError(
        f"could not sample connected graph (m={m}, p_c={p_c}) in {MAX_GRAPH_DRAWS} draws"
    )


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    zeta: float
    symmetric: bool
    nonnegative: bool
    support_matches: bool
    row_stochastic: bool
    column_stochastic: bool
    lambda1_is_one: bool
    lambda2_below_one: bool
    lambda_min_above_minus_one: bool
    lambda_min_nonpositive: bool

    @property
    def mixing_ok(self):
        # clause (iv) lambda_m <= 0 is reported only
        return (
            self.symmetric
            and self.nonnegative
            and self.support_matches
            and self.row_stochastic
            and self.column_stochastic
            and self.lambda1_is_one
            and self.lambda2_below_one
            and self.lambda_min_above_minus_one
        )

    def failures(self):
        names = [
            "symmetric",
            "nonnegative",
            "support_matches",
            "row_stochastic",
            "column_stochastic",
            "lambda1_is_one",
            "lambda2_below_one",
            "lambda_min_above_minus_one",
        ]
        return [name for name in names if not getattr(self, name)]


def _eigenvalues(W):
    return np.linalg.eigvalsh(W)[::-1].copy()


def spectral_report(W, graph=None):
    """
    Check the mixing-matrix requirements on `W` and return its spectrum.

    `W` may be a :class:`MixingMatrix` or any square array; nothing is
    enforced here. When `graph` is omitted the support check compares the
    off-diagonal pattern of `W` against itself and only verifies a positive
    diagonal.
    """
    if isinstance(W, MixingMatrix):
        graph = graph if graph is not None else W.graph
        W = W.W
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    symmetric = bool(np.array_equal(W, W.T))
    lam = _eigenvalues((W + W.T) / 2)
    ones = np.ones(m)
    if graph is not None:
        expected = np.eye(m, dtype=bool)
        for i, j in graph.edges:
            expected[i, j] = expected[j, i] = True
        support = bool(np.array_equal(W > 0, expected))
    else:
        support = bool(np.all(np.diag(W) > 0))
    zeta = float(max(abs(lam[1]), abs(lam[-1]))) if m > 1 else 0.0
    return SpectralReport(
        eigenvalues=lam,
        zeta=zeta,
        symmetric=symmetric,
        nonnegative=bool(np.all(W >= 0)),
        support_matches=support,
        row_stochastic=bool(np.max(np.abs(W @ ones - 1)) <= STOCHASTIC_TOL),
        column_stochastic=bool(np.max(np.abs(ones @ W - 1)) <= STOCHASTIC_TOL),
        lambda1_is_one=bool(abs(lam[0] - 1) <= EIGEN_TOL),
        lambda2_below_one=bool(m == 1 or lam[1] < 1 - EIGEN_TOL),
        lambda_min_above_minus_one=bool(lam[-1] > -1 + EIGEN_TOL),
        lambda_min_nonpositive=bool(lam[-1] <= EIGEN_TOL),
    )


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Validated symmetric doubly stochastic weights with cached spectrum."""

    W: np.ndarray
    eigenvalues: np.ndarray
    zeta: float
    graph: Graph | None = None

    @classmethod
    def from_array(cls, W, graph=None):
        W = np.array(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise MixingMatrixError("square", f"shape {W.shape}")
        report = spectral_report(W, graph)
        # a single agent trivially mixes
        bad = [c for c in report.failures() if not (W.shape[0] == 1 and c == "lambda2_below_one")]
        if bad:
            raise MixingMatrixError(bad[0], f"eigenvalues {report.eigenvalues}")
        W.setflags(write=False)
        lam = report.eigenvalues
        lam.setflags(write=False)
        return cls(W, lam, report.zeta, graph)

    @property
    def m(self):
        return self.W.shape[0]

    def neighbors(self, i):
        if self.graph is not None:
            return self.graph.neighbors[i]
        row = self.W[i]
        return tuple(j for j in range(self.m) if j != i and row[j] != 0)

    def to_csv(self, path):
        """Write the weights followed by the spectrum, 17 significant digits."""
        path = Path(path)
        report = spectral_report(self)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row"] + [f"w{j}" for j in range(self.m)])
            for i, row in enumerate(self.W):
                w.writerow([i] + [format(v, ".17g") for v in row])
            w.writerow(["eigenvalues"] + [format(v, ".17g") for v in report.eigenvalues])
            w.writerow(["zeta", format(report.zeta, ".17g")])
            w.writerow(["lambda_min_nonpositive", int(report.lambda_min_nonpositive)])
        return path


def build_mixing_matrix(g):
    """Metropolis weights ``1 / (1 + max(deg_i, deg_j))`` on the edges of `g`."""
    deg = g.degrees
    W = np.zeros((g.m, g.m))
    for i, j in g.edges:
        W[i, j] = W[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    for i in range(g.m):
        W[i, i] = 1.0 - sum(W[i, j] for j in g.neighbors[i])
    return MixingMatrix.from_array(W, g)


def _blocks(X, m):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        if X.shape[0] != m:
            raise ValueError(f"expected {m} blocks, got {X.shape[0]}")
        return X
    if X.ndim != 1 or X.size % m:
        raise ValueError(f"cannot split {X.shape} into {m} blocks")
    return X.reshape(m, -1)


def _weights(W):
    return W.W if isinstance(W, MixingMatrix) else np.asarray(W, dtype=float)


def mix(W, X):
    """Return ``(W kron I_n) X`` computed blockwise."""
    Wa = _weights(W)
    B = _blocks(X, Wa.shape[0])
    return (Wa @ B).reshape(np.shape(X))


def average_project(X, m=None):
    """Replace every block by the block mean."""
    X = np.asarray(X, dtype=float)
    if m is None:
        if X.ndim != 2:
            raise ValueError("flat input needs the agent count m")
        m = X.shape[0]
    B = _blocks(X, m)
    return np.broadcast_to(B.mean(axis=0), B.shape).reshape(X.shape).copy()
