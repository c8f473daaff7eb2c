"""Influence networks: construction, validation, random modular generation, JSON I/O."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AssumptionOneViolated, DimensionMismatch, ZeroRow
from .numerics import TOL


@dataclass(frozen=True, eq=False)
class InfluenceNetwork:
    """Row-stochastic influence matrix ``P`` with per-agent susceptibility.

    ``weights[v, w] > 0`` means agent ``w`` influences agent ``v``. Build with
    :func:`build_network`; instances are treated as immutable (arrays are
    flagged read-only).
    """

    weights: np.ndarray
    susceptibility: np.ndarray
    cluster_of: np.ndarray

    @property
    def n_agents(self):
        return self.weights.shape[0]

    @property
    def lam(self):
        return self.susceptibility

    @property
    def social(self):
        """The matrix ``diag(lambda) @ P`` that drives the averaging step."""
        return self.susceptibility[:, None] * self.weights

    @property
    def edges(self):
        return [tuple(map(int, e)) for e in np.argwhere(self.weights > 0)]

    def __eq__(self, other):
        if not isinstance(other, InfluenceNetwork):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.susceptibility, other.susceptibility)
            and np.array_equal(self.cluster_of, other.cluster_of)
        )

    __hash__ = None

    def with_susceptibility(self, lam):
        return build_network(self.weights, lam, self.cluster_of)

    def to_dict(self):
        return {
            "weights": self.weights.tolist(),
            "lambda": self.susceptibility.tolist(),
            "clusters": self.cluster_of.tolist(),
        }


@dataclass(frozen=True)
class NetworkRecipe:
    n_agents: int = 20
    n_clusters: int = 7
    p_link: float = 0.2
    p_cross: float = 0.7
    lambda_value: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n_agents < 1:
            raise ValueError("n_agents must be positive")
        if not 1 <= self.n_clusters <= self.n_agents:
            raise ValueError("n_clusters must lie in [1, n_agents]")
        for name in ("p_link", "p_cross", "lambda_value"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val}")


def unreachable_agents(weights, lam):
    """Agents with no directed path to an agent whose susceptibility is below one."""
    weights = np.asarray(weights)
    lam = np.asarray(lam)
    n = weights.shape[0]
    reached = lam < 1.0
    frontier = list(np.flatnonzero(reached))
    adj = weights > 0
    while frontier:
        w = frontier.pop()
        for v in np.flatnonzero(adj[:, w] & ~reached):
            reached[v] = True
            frontier.append(v)
    return [int(v) for v in range(n) if not reached[v]]


def build_network(raw_weights, susceptibility, clusters=None):
    """Normalize ``raw_weights`` row-wise and validate the result.

    Raises
    ------
    ZeroRow
        If some agent has no positive incoming weight.
    AssumptionOneViolated
        If some agent cannot reach an agent with ``lambda < 1``.
    """
    w = np.array(raw_weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionMismatch(f"weights must be square, got shape {w.shape}")
    n = w.shape[0]
    lam = np.array(susceptibility, dtype=np.float64).reshape(-1)
    if lam.shape[0] == 1 and n != 1:
        lam = np.full(n, lam[0])
    if lam.shape[0] != n:
        raise DimensionMismatch(f"susceptibility has length {lam.shape[0]}, expected {n}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and nonnegative")
    if np.any((lam < 0) | (lam > 1)) or not np.all(np.isfinite(lam)):
        raise ValueError("susceptibilities must lie in [0, 1]")
    sums = w.sum(axis=1)
    zero = np.flatnonzero(sums <= 0)
    if zero.size:
        raise ZeroRow(zero)
    # rows already stochastic are kept bit-for-bit so saved networks reload exactly
    keep = np.abs(sums - 1.0) <= TOL.row_sum
    p = np.where(keep[:, None], w, w / sums[:, None])
    if np.max(np.abs(p.sum(axis=1) - 1.0)) > TOL.row_sum:
        raise ValueError("row normalization lost precision; rescale the weights")
    bad = unreachable_agents(p, lam)
    if bad:
        raise AssumptionOneViolated(bad)
    if clusters is None:
        clusters = np.zeros(n, dtype=np.int64)
    clusters = np.array(clusters, dtype=np.int64).reshape(-1)
    if clusters.shape[0] != n:
        raise DimensionMismatch(f"clusters has length {clusters.shape[0]}, expected {n}")
    for arr in (p, lam, clusters):
        arr.setflags(write=False)
    return InfluenceNetwork(p, lam, clusters)


def generate_modular(recipe):
    """Random modular directed network.

    Agents are assigned to clusters round-robin. Each ordered pair of distinct
    agents becomes an edge with probability ``p_link`` inside a cluster and
    ``p_cross`` across clusters; every agent also gets a self-loop. Edges get
    uniform weight before row normalization and ``Lambda = lambda_value * I``.
    """
    n = recipe.n_agents
    rng = np.random.default_rng(recipe.seed)
    clusters = np.arange(n) % recipe.n_clusters
    same = clusters[:, None] == clusters[None, :]
    prob = np.where(same, recipe.p_link, recipe.p_cross)
    adj = rng.random((n, n)) < prob
    np.fill_diagonal(adj, True)
    return build_network(adj.astype(np.float64), np.full(n, recipe.lambda_value), clusters)


def network_from_dict(doc):
    if "weights" not in doc or "lambda" not in doc:
        raise ValueError("network document needs 'weights' and 'lambda'")
    return build_network(doc["weights"], doc["lambda"], doc.get("clusters"))


def load_network(path):
    return network_from_dict(json.loads(Path(path).read_text()))


def save_network(net, path):
    Path(path).write_text(json.dumps(net.to_dict(), indent=2) + "\n")
