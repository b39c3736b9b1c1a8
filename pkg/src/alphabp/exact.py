"""Ground truth by brute-force enumeration, and divergence measures.

Assignments are enumerated in mixed-radix order with variable 0 the most
significant digit, i.e. the order of ``itertools.product``.  "First" always
refers to this order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from alphabp.graph import FactorGraph, evaluate_joint

MAX_STATES = 2**20


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class JointTable:
    probabilities: np.ndarray  # (|A|^N,), mixed-radix order
    log_normalizer: float  # log of the sum of unnormalized values


def all_assignments(n_vars: int, n_states: int) -> np.ndarray:
    """``(n_states**n_vars, n_vars)`` index matrix in enumeration order."""
    if n_states**n_vars > MAX_STATES:
        raise EnumerationTooLarge(
            f"{n_states}^{n_vars} assignments exceeds the limit of {MAX_STATES}"
        )
    grids = np.indices((n_states,) * n_vars).reshape(n_vars, -1)
    return grids.T.copy()


def log_joint_table(log_singletons: np.ndarray, edges: np.ndarray,
                    log_pairwise: np.ndarray) -> np.ndarray:
    """Unnormalized log joint over all assignments.

    Accepts a leading batch axis on the table arguments; returns
    ``(..., |A|^N)``.
    """
    n_vars, n_states = log_singletons.shape[-2:]
    x = all_assignments(n_vars, n_states)
    total = np.zeros(log_singletons.shape[:-2] + (x.shape[0],))
    for i in range(n_vars):
        total += log_singletons[..., i, x[:, i]]
    for k, (i, j) in enumerate(edges):
        total += log_pairwise[..., k, x[:, i], x[:, j]]
    return total


def _graph_log_joint(graph: FactorGraph) -> np.ndarray:
    return log_joint_table(graph.log_singletons, graph.edges, graph.log_pairwise)


def joint_table(graph: FactorGraph) -> JointTable:
    logs = _graph_log_joint(graph)
    shift = logs.max()
    w = np.exp(logs - shift)
    z = math.fsum(w)
    return JointTable(w / z, shift + math.log(z))


def exact_map(graph: FactorGraph) -> tuple[np.ndarray, float]:
    """First maximizing assignment (alphabet indices) and its joint value."""
    logs = _graph_log_joint(graph)
    best = int(np.argmax(logs))
    x = all_assignments(graph.n_vars, graph.n_states)[best]
    return x, evaluate_joint(graph, x)


def exact_map_batch(log_singletons: np.ndarray, edges: np.ndarray,
                    log_pairwise: np.ndarray) -> np.ndarray:
    """Vectorized :func:`exact_map` over a leading batch axis (indices only)."""
    logs = log_joint_table(log_singletons, edges, log_pairwise)
    n_vars, n_states = log_singletons.shape[-2:]
    return all_assignments(n_vars, n_states)[np.argmax(logs, axis=-1)]


def exact_marginals(graph: FactorGraph) -> np.ndarray:
    """``(N, |A|)`` exact single-variable marginals."""
    p = joint_table(graph).probabilities
    cube = p.reshape((graph.n_states,) * graph.n_vars)
    out = np.empty((graph.n_vars, graph.n_states))
    for i in range(graph.n_vars):
        axes = tuple(a for a in range(graph.n_vars) if a != i)
        out[i] = cube.sum(axis=axes)
    return out / out.sum(axis=1, keepdims=True)


# -- divergences ------------------------------------------------------------------


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("negative entry")
    return p, q


def alpha_divergence(p, q, alpha: float) -> float:
    """alpha-divergence between unnormalized non-negative tables.

    ``alpha`` must avoid 0 and 1; use :func:`kl_divergence` for those limits.
    """
    p, q = _pair(p, q)
    if alpha == 0 or alpha == 1:
        raise ValueError("alpha must not be 0 or 1; use kl_divergence")
    # equal entries contribute exactly 0, which also covers the 0/0 convention
    same = p == q
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = p**alpha * q ** (1.0 - alpha)
    terms = np.where(same, 0.0, alpha * p + (1.0 - alpha) * q - cross)
    return float(math.fsum(terms.ravel()) / (alpha * (1.0 - alpha)))


def kl_divergence(p, q) -> float:
    """KL(p || q) with the mass-correction term for unnormalized tables."""
    p, q = _pair(p, q)
    if np.any((q == 0) & (p > 0)):
        raise ValueError("support violation: q is zero where p is positive")
    pos = p > 0
    log_terms = p[pos] * (np.log(p[pos]) - np.log(q[pos]))
    return float(math.fsum(log_terms) + math.fsum((q - p).ravel()))
