"""Seeded generators for the Ising and MIMO-detection model families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from alphabp.graph import FactorGraph, build_graph_from_logs

BINARY = np.array([-1.0, 1.0])


@dataclass(frozen=True)
class IsingModel:
    """``p(x) ∝ exp(-x^T J x - b^T x)`` over ``x ∈ {-1, +1}^N``."""

    J: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.b.shape[0]

    def log_density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return -np.einsum("...i,ij,...j->...", x, self.J, x) - x @ self.b


@dataclass(frozen=True)
class MimoInstance:
    """``y = H x_true + e`` with ``e ~ N(0, sigma_w^2 I)``."""

    H: np.ndarray
    x_true: np.ndarray
    y: np.ndarray
    sigma_w: float

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def snr_db(self) -> float:
        return snr_db(self.n, self.sigma_w)

    def log_posterior(self, x) -> np.ndarray:
        """Log posterior up to a constant, for a uniform prior on the alphabet."""
        r = np.asarray(x, dtype=float) @ self.H.T - self.y
        return -np.sum(r * r, axis=-1) / (2.0 * self.sigma_w**2)


def snr_db(n: int, sigma_w: float) -> float:
    """Receive SNR for unit-energy symbols and unit-variance channel taps."""
    return float(10.0 * np.log10(n / sigma_w**2))


def sigma_for_snr_db(n: int, snr: float) -> float:
    return float(np.sqrt(n / 10.0 ** (snr / 10.0)))


def sample_ising(n: int, edge_prob: float, seed) -> IsingModel:
    """Erdős–Rényi couplings ``J_ij ~ N(0, 1)`` and biases ``b_i ~ N(0, 1/16)``.

    All pair uniforms and all pair normals are drawn regardless of
    ``edge_prob``, so one seed gives nested edge sets across edge
    probabilities.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    keep = rng.random(iu[0].size) < edge_prob
    weights = rng.standard_normal(iu[0].size)
    b = 0.25 * rng.standard_normal(n)
    J = np.zeros((n, n))
    J[iu] = np.where(keep, weights, 0.0)
    J = J + J.T
    return IsingModel(J, b)


def ising_to_graph(model: IsingModel) -> FactorGraph:
    """Singletons ``exp(-J_ii - b_i x_i)`` and one factor ``exp(-2 J_ij x_i x_j)``
    per nonzero coupling."""
    J, b = model.J, model.b
    x = BINARY
    log_f = -np.diag(J)[:, None] - b[:, None] * x[None, :]
    outer = np.outer(x, x)
    specs = [
        (i, j, -2.0 * J[i, j] * outer)
        for i in range(model.n)
        for j in range(i + 1, model.n)
        if J[i, j] != 0.0
    ]
    return build_graph_from_logs(BINARY, log_f, specs)


def sample_mimo(n: int, m: int, sigma_w: float, seed) -> MimoInstance:
    """Gaussian channel, uniform ±1 symbols, white Gaussian noise.

    The standard-normal noise draw does not depend on ``sigma_w``, so one
    seed gives the same channel, symbols and noise shape at every noise level.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not (np.isfinite(sigma_w) and sigma_w > 0):
        raise ValueError(f"sigma_w must be positive, got {sigma_w}")
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((m, n))
    x = BINARY[rng.integers(0, 2, size=n)]
    z = rng.standard_normal(m)
    y = H @ x + sigma_w * z
    return MimoInstance(H, x, y, float(sigma_w))


def mimo_log_tables(H: np.ndarray, y: np.ndarray, sigma_w: float):
    """Log singleton ``(N, 2)`` and log pairwise ``(N, N, 2, 2)`` tables of the
    MIMO posterior; only the ``i < j`` blocks of the pairwise array are used."""
    S = H.T @ H
    s2 = sigma_w**2
    x = BINARY
    hy = H.T @ y
    log_f = -np.diag(S)[:, None] * (x**2)[None, :] / (2.0 * s2) + hy[:, None] * x[None, :] / s2
    log_t = -S[:, :, None, None] * np.outer(x, x)[None, None] / s2
    return S, log_f, log_t


def mimo_to_graph(instance: MimoInstance) -> FactorGraph:
    S, log_f, log_t = mimo_log_tables(instance.H, instance.y, instance.sigma_w)
    n = instance.n
    specs = [
        (i, j, log_t[i, j])
        for i in range(n)
        for j in range(i + 1, n)
        if S[i, j] != 0.0
    ]
    return build_graph_from_logs(BINARY, log_f, specs)
