"""Linear MMSE detection and the Gaussian prior beliefs it hands to alpha-BP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from alphabp.models import MimoInstance

COVARIANCE_SCALINGS = ("sigma", "sigma_squared")


@dataclass(frozen=True)
class MmsePosterior:
    mu: np.ndarray
    sigma: np.ndarray


def mmse_posterior(instance: MimoInstance, covariance_scaling: str = "sigma") -> MmsePosterior:
    """Gaussian posterior ``N(mu, Sigma)`` with ``A = H^T H + sigma_w^2 I``.

    ``mu`` solves ``A mu = H^T y`` through a Cholesky factorization.
    ``Sigma`` is ``sigma_w * A^{-1}`` by default; ``covariance_scaling=
    "sigma_squared"`` gives the textbook ``sigma_w^2 * A^{-1}``.
    """
    if covariance_scaling not in COVARIANCE_SCALINGS:
        raise ValueError(f"covariance_scaling must be one of {COVARIANCE_SCALINGS}")
    s = instance.sigma_w
    if not s > 0:
        raise ValueError("sigma_w must be > 0")
    H = instance.H
    n = H.shape[1]
    A = H.T @ H + s**2 * np.eye(n)
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=True)
    except linalg.LinAlgError as exc:
        raise linalg.LinAlgError(f"MMSE system is not positive definite: {exc}") from exc
    mu = linalg.cho_solve(factor, H.T @ instance.y)
    a_inv = linalg.cho_solve(factor, np.eye(n))
    a_inv = 0.5 * (a_inv + a_inv.T)
    scale = s if covariance_scaling == "sigma" else s**2
    return MmsePosterior(mu, scale * a_inv)


def mmse_decide(posterior: MmsePosterior, alphabet) -> np.ndarray:
    """Nearest alphabet point per component, as alphabet indices (ties go low)."""
    alphabet = np.asarray(alphabet, dtype=float)
    dist = np.abs(posterior.mu[:, None] - alphabet[None, :])
    return np.argmin(dist, axis=1)


def mmse_prior_factors(posterior: MmsePosterior, alphabet) -> np.ndarray:
    """``(N, |A|)`` normalized tables ``∝ exp(-(a - mu_i)^2 / (2 Sigma_ii))``."""
    return np.exp(mmse_log_prior_factors(posterior, alphabet))


def mmse_log_prior_factors(posterior: MmsePosterior, alphabet) -> np.ndarray:
    alphabet = np.asarray(alphabet, dtype=float)
    var = np.diag(posterior.sigma)
    if np.any(var <= 0):
        raise ValueError("posterior covariance has a non-positive diagonal entry")
    logs = -((alphabet[None, :] - posterior.mu[:, None]) ** 2) / (2.0 * var[:, None])
    logs -= logs.max(axis=1, keepdims=True)
    return logs - np.log(np.exp(logs).sum(axis=1, keepdims=True))
