"""Collision superoperators on the scatterer's density matrix.

A superoperator is stored as a dense ``N^2 x N^2`` matrix ``M`` with
``M[j' N + k', j N + k] = S^{jk}_{j'k'}``, so that
``vec(rho') = M @ vec(rho)`` with row-major ``vec``.

Builders:

* :func:`pure_packet_map` integrates the exact one-packet map over momentum.
* :func:`narrow_map` is its narrow-packet limit, evaluated at ``p0`` only.
* :func:`ensemble_map` mixes either of the above over a thermal ensemble.
* :func:`narrow_population_map` / :func:`broad_population_map` build only the
  population block, the latter from the closed-form broad-ensemble diagonal.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NotStochastic, QuadratureNotConverged
from .quadrature import QuadratureConfig, segmented_rule, with_breakpoints
from .scatterer import (
    SystemSpec,
    _check_threshold,
    flux_blocks,
    transition_probability_batch,
)
from .wavepacket import (
    EnsembleKind,
    GaussianPacket,
    MomentumEnsemble,
    amplitude,
    broad_ensemble_diagonal,
    broad_ensemble_temperature,
    channel_opening_momenta,
    gap_tolerance,
)


@dataclass(frozen=True, eq=False)
class Superoperator:
    matrix: np.ndarray
    error: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n2 = m.shape[0]
        n = round(np.sqrt(n2))
        if m.shape != (n2, n2) or n * n != n2:
            raise ValueError(f"superoperator must be N^2 x N^2, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return round(np.sqrt(self.matrix.shape[0]))

    @classmethod
    def identity(cls, dim: int) -> Superoperator:
        return cls(np.eye(dim * dim, dtype=complex))

    def tensor(self) -> np.ndarray:
        """View indexed ``[j', k', j, k]``."""
        n = self.dim
        return self.matrix.reshape(n, n, n, n)

    def entry(self, jp: int, kp: int, j: int, k: int) -> complex:
        return complex(self.tensor()[jp, kp, j, k])

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        n = self.dim
        return (self.matrix @ np.asarray(rho).reshape(n * n)).reshape(n, n)

    def trace_residual(self) -> float:
        """``max_jk |sum_j' S^{jk}_{j'j'} - delta_jk|``."""
        t = self.tensor()
        traced = np.einsum("aajk->jk", t)
        return float(np.abs(traced - np.eye(self.dim)).max())

    def hermiticity_residual(self) -> float:
        """``max |S^{jk}_{j'k'} - conj(S^{kj}_{k'j'})|``."""
        t = self.tensor()
        return float(np.abs(t - t.transpose(1, 0, 3, 2).conj()).max())

    def max_entry(self) -> float:
        return float(np.abs(self.matrix).max())

    def diagnostics(self) -> dict:
        return {
            "trace_residual": self.trace_residual(),
            "hermiticity_residual": self.hermiticity_residual(),
            "max_abs_entry": self.max_entry(),
            "choi_min_eigenvalue": choi_min_eigenvalue(self),
            "quadrature_error": float(self.error),
        }


@dataclass(frozen=True, eq=False)
class PopulationMap:
    """Column-stochastic ``W[j, k] = S^{kk}_{jj}`` acting on population vectors."""

    W: np.ndarray

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    def __call__(self, p):
        return self.W @ np.asarray(p, dtype=float)

    def stationary(self) -> np.ndarray:
        """Eigenvector of ``W`` for the eigenvalue closest to 1, normalised to sum 1."""
        vals, vecs = np.linalg.eig(self.W)
        v = np.real(vecs[:, np.argmin(np.abs(vals - 1.0))])
        return v / v.sum()


class Builder(str, enum.Enum):
    NARROW = "narrow"
    FULL = "full"


# ---------------------------------------------------------------------------
# pure packets


def _sector_window(packet: GaussianPacket, sector: int):
    lo, hi = packet.window
    if sector < 0:
        lo, hi = -hi, -lo
    return max(0.0, lo), hi


def _packet_matrix(spec: SystemSpec, packet: GaussianPacket, panels: int, nodes: int):
    """Quadrature of the one-packet map, summed over both momentum sectors.

    For incoming magnitude ``q`` the partner momentum is
    ``pi(q) = sqrt(q^2 - 2m (Delta_j'j - Delta_k'k))``; the integrand is
    ``phi(aq) phi*(a pi) sqrt(q/pi) [t t* + r r*]`` with the two blocks taken
    at total energies ``E_q + e_j`` and ``E_q - Delta_j'j + e_k'``.
    Left and right blocks coincide for the even potential, so both sectors
    use the same amplitudes.
    """
    n = spec.dim
    m = spec.mass
    e = spec.energies
    gaps = spec.gaps
    out = np.zeros((n, n, n, n), dtype=complex)
    for sector in (1, -1):
        lo, hi = _sector_window(packet, sector)
        if hi <= lo:
            continue
        for jp in range(n):
            for j in range(n):
                d1 = gaps[jp, j]
                for kp in range(n):
                    for k in range(n):
                        delta = d1 - gaps[kp, k]
                        a2 = max(lo * lo, 2 * m * max(0.0, d1, delta), lo * lo + 2 * m * delta)
                        b2 = min(hi * hi, hi * hi + 2 * m * delta)
                        if b2 <= a2:
                            continue
                        a, b = np.sqrt(a2), np.sqrt(b2)
                        breaks = np.concatenate((2 * m * (e - e[j]), 2 * m * (e + d1 - e[kp])))
                        breaks = np.sqrt(breaks[breaks > 0])
                        q, w = segmented_rule(with_breakpoints(a, b, breaks), panels, nodes)
                        q2 = q * q
                        pi = np.sqrt(np.maximum(q2 - 2 * m * delta, 0.0))
                        ekin = q2 / (2 * m)
                        t1, r1 = flux_blocks(spec, ekin + e[j])
                        t2, r2 = flux_blocks(spec, ekin - d1 + e[kp])
                        amp = (
                            amplitude(packet, sector * q, spec.hbar)
                            * np.conj(amplitude(packet, sector * pi, spec.hbar))
                            * np.sqrt(q / pi)
                        )
                        core = t1[:, jp, j] * np.conj(t2[:, kp, k]) + r1[:, jp, j] * np.conj(r2[:, kp, k])
                        out[jp, kp, j, k] += np.sum(w * amp * core)
    return out.reshape(n * n, n * n)


def pure_packet_map(
    spec: SystemSpec,
    packet: GaussianPacket,
    quad: QuadratureConfig | None = None,
    check: bool = True,
) -> Superoperator:
    """Collision map for one Gaussian packet, by composite Gauss-Legendre quadrature.

    The error estimate is the largest entrywise change when the panel count
    is halved. Raises :class:`QuadratureNotConverged` above ``quad.tol``
    unless ``check`` is false.
    """
    quad = quad or QuadratureConfig()
    fine = _packet_matrix(spec, packet, quad.panels, quad.nodes)
    coarse = _packet_matrix(spec, packet, quad.coarse_panels, quad.nodes)
    err = float(np.abs(fine - coarse).max())
    if check and err > quad.tol:
        raise QuadratureNotConverged(
            f"pure-packet map error estimate {err:.3g} exceeds tol {quad.tol:.3g}", err
        )
    return Superoperator(fine, error=err)


# ---------------------------------------------------------------------------
# narrow packets


def narrow_map(spec: SystemSpec, p0: float, side: str = "left") -> Superoperator:
    """Narrow-packet limit: blocks frozen at ``E_p0 + e_j``, gap-selection rule applied.

    ``S^{jk}_{j'k'} = t_j'j t*_k'k + r_j'j r*_k'k`` if ``Delta_j'j == Delta_k'k``
    (within the gap tolerance), else 0. Channels closed at that energy contribute 0.
    """
    if side not in ("left", "right"):
        raise ConfigError(f"side must be 'left' or 'right', got {side!r}")
    p0 = abs(float(p0))
    if p0 == 0:
        raise ConfigError("narrow_map needs a nonzero mean momentum")
    n = spec.dim
    energies = p0 * p0 / (2 * spec.mass) + spec.energies
    for E in energies:
        _check_threshold(spec, E)
    # blocks for incoming level j live at t_hat[j][:, j]
    t_hat, r_hat = flux_blocks(spec, energies)
    cols_t = t_hat[np.arange(n), :, np.arange(n)].T  # [j', j]
    cols_r = r_hat[np.arange(n), :, np.arange(n)].T
    # same_gap[j', j, k', k]: Delta_j'j == Delta_k'k
    same_gap = np.abs(spec.gaps[:, :, None, None] - spec.gaps[None, None, :, :]) <= gap_tolerance(spec)
    prod = np.einsum("aj,bk->abjk", cols_t, cols_t.conj()) + np.einsum("aj,bk->abjk", cols_r, cols_r.conj())
    mask = same_gap.transpose(0, 2, 1, 3)  # -> [j', k', j, k]
    return Superoperator(np.where(mask, prod, 0.0).reshape(n * n, n * n))


# ---------------------------------------------------------------------------
# ensembles


def ensemble_map(
    spec: SystemSpec,
    ensemble: MomentumEnsemble,
    builder="narrow",
    sigma: float | None = None,
    quad: QuadratureConfig | None = None,
    x0: float = 0.0,
) -> Superoperator:
    """Weighted mixture of member maps, half incident from each side.

    ``builder="narrow"`` uses :func:`narrow_map` per node; ``builder="full"``
    integrates a Gaussian packet of width ``sigma`` (default: the ensemble's)
    per node. The error estimate of the mixture is the weighted sum of the
    member estimates.
    """
    builder = Builder(builder)
    if ensemble.kind is not EnsembleKind.BROAD_EFFUSION_MIXTURE:
        spec.warn_if_not_thermalizing()
    n2 = spec.dim**2
    total = np.zeros((n2, n2), dtype=complex)
    err = 0.0
    weights = ensemble.member_weights
    if builder is Builder.NARROW:
        for p0, w in zip(ensemble.nodes, weights):
            left = narrow_map(spec, p0, "left").matrix
            right = narrow_map(spec, p0, "right").matrix
            total += w * 0.5 * (left + right)
        return Superoperator(total)

    sigma = sigma if sigma is not None else ensemble.sigma
    if not sigma or sigma <= 0:
        raise ConfigError("full-quadrature ensemble needs a packet width sigma")
    quad = quad or QuadratureConfig()
    for p0, w in zip(ensemble.nodes, weights):
        members = (
            GaussianPacket(p0, x0, sigma, two_sided=True),
            GaussianPacket(-p0, -x0, sigma, two_sided=True),
        )
        for packet in members:
            smap = pure_packet_map(spec, packet, quad, check=False)
            total += 0.5 * w * smap.matrix
            err += 0.5 * w * smap.error
    if err > quad.tol:
        raise QuadratureNotConverged(f"ensemble map error estimate {err:.3g} exceeds tol", err)
    return Superoperator(total, error=err)


def narrow_population_map(spec: SystemSpec, ensemble: MomentumEnsemble) -> PopulationMap:
    """Population block of the narrow ensemble map without building the full map."""
    n = spec.dim
    energies = (ensemble.nodes**2 / (2 * spec.mass))[:, None] + spec.energies  # [node, j]
    probs = transition_probability_batch(spec, energies)  # [node, j, j', j'']
    cols = np.stack([probs[:, j, :, j] for j in range(n)], axis=-1)  # [node, j', j]
    return PopulationMap(np.einsum("i,iab->ab", ensemble.member_weights, cols))


def broad_population_map(
    spec: SystemSpec,
    beta: float,
    sigma: float,
    n_nodes: int = 129,
    tail_tol: float = 1e-8,
    min_segment_nodes: int = 32,
) -> PopulationMap:
    """``W[j', j] = int_0^inf 2 rho_X(p, p) P_j'j(E_p + e_j) dp`` with the closed-form diagonal."""
    m = spec.mass
    _, beta_c = broad_ensemble_temperature(beta, m, sigma)
    span = float(spec.energies[-1] - spec.energies[0])
    lg = np.log(10.0 / tail_tol)
    p_cut = max(np.sqrt(2 * m * (span + lg / beta_c)), np.sqrt(2 * lg) * sigma)
    edges = with_breakpoints(0.0, p_cut, channel_opening_momenta(spec))
    pts, wts = [], []
    for a, b in itertools.pairwise(edges):
        k = max(min_segment_nodes, round(n_nodes * (b - a) / p_cut))
        p, w = segmented_rule([a, b], panels=1, nodes=k)
        pts.append(p)
        wts.append(w)
    p = np.concatenate(pts)
    w = np.concatenate(wts) * 2.0 * broad_ensemble_diagonal(beta, m, sigma, p)
    n = spec.dim
    energies = (p**2 / (2 * m))[:, None] + spec.energies
    probs = transition_probability_batch(spec, energies)
    cols = np.stack([probs[:, j, :, j] for j in range(n)], axis=-1)
    return PopulationMap(np.einsum("i,iab->ab", w, cols))


# ---------------------------------------------------------------------------
# diagnostics


def population_map(S: Superoperator, tol: float = 1e-6) -> PopulationMap:
    """Extract ``W[j, k] = Re S^{kk}_{jj}`` and check it is stochastic."""
    n = S.dim
    t = S.tensor()
    idx = np.arange(n)
    block = t[idx[:, None], idx[:, None], idx[None, :], idx[None, :]]
    imag = float(np.abs(block.imag).max())
    if imag > 1e-10:
        raise NotStochastic(f"population block has imaginary residue {imag:.3g}")
    W = block.real
    if W.min() < -1e-10:
        raise NotStochastic(f"negative transition probability {W.min():.3g}")
    dev = float(np.abs(W.sum(axis=0) - 1.0).max())
    if dev > tol:
        raise NotStochastic(f"column sums deviate from 1 by {dev:.3g}")
    return PopulationMap(W)


def detailed_balance_residual(W, beta: float, energies, eps: float = 1e-300) -> float:
    """``max_{j != j'} |W[j',j] e^{-b e_j} - W[j,j'] e^{-b e_j'}| / max(W[j',j] e^{-b e_j}, eps)``."""
    W = W.W if isinstance(W, PopulationMap) else np.asarray(W, dtype=float)
    e = np.asarray(energies, dtype=float)
    boltz = np.exp(-beta * (e - e.min()))
    flux = W * boltz[None, :]  # flux[j', j] = W[j', j] e^{-b e_j}
    num = np.abs(flux - flux.T)
    den = np.maximum(flux, eps)
    off = ~np.eye(len(e), dtype=bool)
    if not off.any():
        return 0.0
    return float((num / den)[off].max())


def choi_matrix(S: Superoperator) -> np.ndarray:
    """``C = sum_jk S(|j><k|) (x) |j><k|``, indexed ``[(j', j), (k', k)]``."""
    n = S.dim
    return S.tensor().transpose(0, 2, 1, 3).reshape(n * n, n * n)


def choi_min_eigenvalue(S: Superoperator) -> float:
    c = choi_matrix(S)
    return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min())
