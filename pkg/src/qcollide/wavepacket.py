"""Incident particle states and momentum distributions.

Gaussian packets live in the momentum representation. Thermal ensembles are
incoherent mixtures of packets whose mean momenta follow a distribution on
``[0, inf)``; each member is paired with its mirror image coming from the right.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import AllGapsDegenerate, ConfigError
from .quadrature import segmented_rule, with_breakpoints
from .scatterer import SystemSpec

#: Packets are truncated to ``p0 +/- WINDOW_SIGMAS * sigma``.
WINDOW_SIGMAS = 8.0
#: One-sided packets need ``|p0| >= ONE_SIDED_SIGMAS * sigma``.
ONE_SIDED_SIGMAS = 6.0


@dataclass(frozen=True)
class GaussianPacket:
    """Gaussian packet with mean momentum ``p0``, mean position ``x0`` and width ``sigma``.

    By default the packet must travel in one direction only (``|p0| >= 6 sigma``).
    Members of broad thermal ensembles have ``p0`` comparable to ``sigma``;
    they are built with ``two_sided=True`` and their wrong-sign tail is
    treated as incidence from the other side.
    """

    p0: float
    x0: float = 0.0
    sigma: float = 0.01
    two_sided: bool = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not self.two_sided and abs(self.p0) < ONE_SIDED_SIGMAS * self.sigma:
            raise ConfigError(
                f"|p0| = {abs(self.p0)} < {ONE_SIDED_SIGMAS:g} sigma = "
                f"{ONE_SIDED_SIGMAS * self.sigma}: packet is not one-sided"
            )

    @property
    def window(self) -> tuple[float, float]:
        half = WINDOW_SIGMAS * self.sigma
        return self.p0 - half, self.p0 + half


def amplitude(packet: GaussianPacket, p, hbar: float = 1.0):
    """Momentum-space amplitude ``phi(p)``."""
    p = np.asarray(p, dtype=float)
    s2 = packet.sigma**2
    return (2.0 * np.pi * s2) ** -0.25 * np.exp(
        -((p - packet.p0) ** 2) / (4.0 * s2) - 1j * p * packet.x0 / hbar
    )


def gap_tolerance(spec: SystemSpec, rel: float = 1e-9) -> float:
    """Absolute tolerance for deciding two Bohr gaps are equal."""
    return rel * max(1.0, float(np.abs(spec.gaps).max()))


def min_gap_difference(spec: SystemSpec, rel: float = 1e-9) -> float:
    """Smallest nonzero ``|Delta_j'j - Delta_k'k|`` over all quadruplets."""
    gaps = np.unique(spec.gaps.ravel())
    diffs = np.abs(gaps[:, None] - gaps[None, :]).ravel()
    diffs = diffs[diffs > gap_tolerance(spec, rel)]
    if diffs.size == 0:
        raise AllGapsDegenerate("every Bohr-gap difference vanishes")
    return float(diffs.min())


def narrowness_ratio(packet: GaussianPacket, spec: SystemSpec) -> float:
    """``sigma / (m delta_min / 2|p0|)``: well below 1 is narrow, 1 and above is broad."""
    delta = min_gap_difference(spec)
    return packet.sigma / (spec.mass * delta / (2.0 * abs(packet.p0)))


def effusion_pdf(beta: float, m: float, p):
    """Flux-weighted thermal momenta, ``beta (p/m) exp(-beta p^2 / 2m)`` on ``p >= 0``."""
    p = np.asarray(p, dtype=float)
    return np.where(p >= 0, beta * p / m * np.exp(-beta * p**2 / (2.0 * m)), 0.0)


def maxwell_boltzmann_pdf(beta: float, m: float, p):
    """Maxwell-Boltzmann momenta folded onto ``p >= 0`` (twice the full-line density)."""
    p = np.asarray(p, dtype=float)
    return np.where(p >= 0, 2.0 * np.sqrt(beta / (2.0 * np.pi * m)) * np.exp(-beta * p**2 / (2.0 * m)), 0.0)


def broad_ensemble_temperature(beta: float, m: float, sigma: float) -> tuple[float, float]:
    """``(r, beta_C)`` with ``r = 1 + beta sigma^2 / m`` and ``beta_C = beta / r``."""
    r = 1.0 + beta * sigma**2 / m
    return r, beta / r


def broad_ensemble_diagonal(beta: float, m: float, sigma: float, p):
    """Momentum density ``rho_X(p, p)`` of effusing Gaussian packets of width ``sigma``.

    Normalised over the whole real line; symmetric in ``p``.
    """
    p = np.asarray(p, dtype=float)
    r, beta_c = broad_ensemble_temperature(beta, m, sigma)
    gauss = sigma / np.sqrt(2.0 * np.pi) * np.exp(-(p**2) / (2.0 * sigma**2))
    tail = p / (2.0 * np.sqrt(r)) * erf(p / (np.sqrt(2.0 * r) * sigma)) * np.exp(-beta_c * p**2 / (2.0 * m))
    return beta_c / m * (gauss + tail)


class EnsembleKind(str, enum.Enum):
    EFFUSION = "effusion"
    MAXWELL_BOLTZMANN = "maxwell_boltzmann"
    BROAD_EFFUSION_MIXTURE = "broad_effusion_mixture"


@dataclass(frozen=True, eq=False)
class MomentumEnsemble:
    """Discretised distribution of mean momenta ``p0`` on ``(0, p_cut]``.

    ``nodes``/``weights`` form a quadrature rule; the member weight of node
    ``i`` is ``weights[i] * density(nodes[i])``.
    """

    kind: EnsembleKind
    beta: float
    mass: float
    nodes: np.ndarray
    weights: np.ndarray
    sigma: float | None = None

    def density(self, p):
        if self.kind is EnsembleKind.MAXWELL_BOLTZMANN:
            return maxwell_boltzmann_pdf(self.beta, self.mass, p)
        return effusion_pdf(self.beta, self.mass, p)

    @property
    def member_weights(self) -> np.ndarray:
        return self.weights * self.density(self.nodes)

    def total_mass(self) -> float:
        return float(self.member_weights.sum())

    @classmethod
    def build(
        cls,
        kind,
        beta: float,
        mass: float,
        sigma: float | None = None,
        n_nodes: int = 129,
        tail_tol: float = 1e-8,
        energy_span: float = 0.0,
        breakpoints=(),
        min_segment_nodes: int = 32,
    ) -> MomentumEnsemble:
        """Gauss-Legendre grid on ``(0, p_cut]``.

        ``p_cut`` leaves a tail mass below ``tail_tol`` *beyond kinetic energy
        ``energy_span``*, so transitions that only open at high energy are
        still resolved to relative accuracy. Breakpoints (channel-opening
        momenta) split the range into separately mapped segments.
        """
        kind = EnsembleKind(kind)
        if not beta > 0 or not mass > 0:
            raise ConfigError("beta and mass must be positive")
        if kind is EnsembleKind.BROAD_EFFUSION_MIXTURE and not (sigma and sigma > 0):
            raise ConfigError("broad_effusion_mixture needs a positive sigma")
        p_cut = np.sqrt(2.0 * mass * (energy_span + np.log(10.0 / tail_tol) / beta))
        edges = with_breakpoints(0.0, p_cut, breakpoints)
        lengths = np.diff(edges)
        pts, wts = [], []
        for a, b, ln in zip(edges[:-1], edges[1:], lengths):
            n = max(min_segment_nodes, round(n_nodes * ln / p_cut))
            p, w = segmented_rule([a, b], panels=1, nodes=n)
            pts.append(p)
            wts.append(w)
        raw = np.concatenate(pts)
        weights = np.concatenate(wts)
        nodes = _nudge_off_thresholds(raw, mass, edges)
        moved = nodes != raw
        if moved.any():
            # keep each member weight, so the mixture stays normalised exactly
            dens = cls(kind, beta, mass, raw, weights, sigma).density
            weights[moved] *= dens(raw[moved]) / dens(nodes[moved])
        nodes.setflags(write=False)
        weights.setflags(write=False)
        return cls(kind, float(beta), float(mass), nodes, weights, sigma)


def _nudge_off_thresholds(nodes, mass, edges, rel=1e-12):
    """Move nodes whose kinetic energy lies within ``rel * scale`` of an edge energy.

    Channel thresholds sit at the segment edges (and at ``p = 0`` for the
    incoming channel); evaluating exactly there is undefined, so such nodes
    are pushed ``rel * scale`` into the interior of their segment.
    """
    ekin = nodes**2 / (2.0 * mass)
    e_edges = np.asarray(edges) ** 2 / (2.0 * mass)
    shift = rel * max(1.0, float(e_edges[-1]))
    diff = ekin[:, None] - e_edges[None, :]
    near = np.abs(diff) < shift
    if not near.any():
        return nodes
    idx, which = np.nonzero(near)
    ekin = ekin.copy()
    side = np.where(diff[idx, which] >= 0, 1.0, -1.0)
    ekin[idx] = e_edges[which] + side * shift
    return np.sqrt(2.0 * mass * ekin)


def channel_opening_momenta(spec: SystemSpec) -> np.ndarray:
    """Mean momenta ``sqrt(2m (e_l - e_j))`` at which a column of the narrow map gains a channel."""
    gaps = spec.gaps[spec.gaps > 0]
    return np.unique(np.sqrt(2.0 * spec.mass * gaps))


def thermal_ensemble(
    kind,
    beta: float,
    spec: SystemSpec,
    sigma: float | None = None,
    n_nodes: int = 129,
    tail_tol: float = 1e-8,
) -> MomentumEnsemble:
    """Ensemble grid adapted to ``spec``: cut beyond the level span, split at channel openings."""
    kind = EnsembleKind(kind)
    span = float(spec.energies[-1] - spec.energies[0])
    breaks = channel_opening_momenta(spec) if kind is not EnsembleKind.BROAD_EFFUSION_MIXTURE else ()
    return MomentumEnsemble.build(
        kind,
        beta,
        spec.mass,
        sigma=sigma,
        n_nodes=n_nodes,
        tail_tol=tail_tol,
        energy_span=span,
        breakpoints=breaks,
    )
