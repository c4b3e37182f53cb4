"""Heat, entropy change and entropy production of one collision on populations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DetailedBalanceViolated
from .scatmap import PopulationMap, detailed_balance_residual

#: Largest detailed-balance residual for which the entropy-flow identification holds.
DB_THRESHOLD = 1e-4


@dataclass(frozen=True)
class ThermoRecord:
    step: int
    Q: float
    dS: float
    flow: float
    Sigma: float


def _as_matrix(W) -> np.ndarray:
    return W.W if isinstance(W, PopulationMap) else np.asarray(W, dtype=float)


def _as_probability(p, n: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (n,):
        raise ConfigError(f"population vector must have shape ({n},), got {p.shape}")
    if p.min() < 0 or abs(p.sum() - 1.0) > 1e-10:
        raise ConfigError("population vector must be nonnegative and sum to 1")
    return p


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def heat(W, p, energies) -> float:
    """``Q = sum_jk e_j (W_jk - delta_jk) p_k``."""
    W = _as_matrix(W)
    p = _as_probability(p, W.shape[0])
    e = np.asarray(energies, dtype=float)
    return float(e @ (W @ p - p))


def explicit_entropy_production(W, p) -> float:
    """``sum_jk W_jk p_k ln(W_jk p_k / (W_kj p'_j))`` with ``p' = W p``.

    Terms with ``W_jk p_k = 0`` vanish; a positive term against a zero
    reverse flux makes the result ``+inf``.
    """
    W = _as_matrix(W)
    p = np.asarray(p, dtype=float)
    new = W @ p
    fwd = W * p[None, :]
    rev = W.T * new[:, None]
    mask = fwd > 0
    if np.any(mask & (rev <= 0)):
        return float("inf")
    return float((fwd[mask] * np.log(fwd[mask] / rev[mask])).sum())


def entropy_production(
    W, p, beta: float, energies, step: int = 0, db_threshold: float = DB_THRESHOLD
) -> ThermoRecord:
    """Split ``dS`` into entropy flow ``beta Q`` and production ``Sigma = dS - beta Q``.

    Requires ``W`` to satisfy detailed balance at ``beta``; otherwise
    :class:`DetailedBalanceViolated` is raised.
    """
    Wm = _as_matrix(W)
    p = _as_probability(p, Wm.shape[0])
    resid = detailed_balance_residual(Wm, beta, energies)
    if resid > db_threshold:
        raise DetailedBalanceViolated(
            f"detailed-balance residual {resid:.3g} exceeds {db_threshold:g}", resid
        )
    q = heat(Wm, p, energies)
    ds = shannon_entropy(Wm @ p) - shannon_entropy(p)
    flow = beta * q
    sigma = ds - flow
    if np.isinf(explicit_entropy_production(Wm, p)):
        sigma = float("inf")
    return ThermoRecord(step, q, ds, flow, sigma)


def trajectory_records(W, populations, beta: float, energies) -> list[ThermoRecord]:
    """One record per population vector: the collision taking ``p_n`` to ``W p_n``."""
    return [entropy_production(W, p, beta, energies, step=n) for n, p in enumerate(populations)]
