"""Repeated collisions interleaved with free evolution of the scatterer."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionMismatch, PopulationUnderflow, TraceDrift
from .scatmap import Superoperator
from .scatterer import SystemSpec

TRACE_DRIFT_TOL = 1e-6
#: Populations below this make the corresponding B estimator undefined.
POPULATION_FLOOR = 1e-12


def validate_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-10, psd_tol=1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ConfigError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ConfigError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise ConfigError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(rho).min() < -psd_tol:
        raise ConfigError("density matrix is not positive semidefinite")
    return rho


def thermal_state(spec: SystemSpec, beta: float) -> np.ndarray:
    w = np.exp(-beta * (spec.energies - spec.energies[0]))
    return np.diag(w / w.sum()).astype(complex)


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def apply_map(S: Superoperator, rho) -> np.ndarray:
    """``rho' = S(rho)``, re-Hermitised and renormalised.

    Raises :class:`TraceDrift` when the trace moves by more than ``1e-6``.
    """
    return _apply_with_drift(S, rho)[0]


def _apply_with_drift(S: Superoperator, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (S.dim, S.dim):
        raise DimensionMismatch(f"map acts on {S.dim} levels, state has shape {rho.shape}")
    out = S(rho)
    out = 0.5 * (out + out.conj().T)
    tr = np.trace(out).real
    drift = abs(tr - 1.0)
    if drift > TRACE_DRIFT_TOL:
        raise TraceDrift(f"trace drifted to {tr:.12g}")
    return out / tr, drift


def free_evolution(rho, spec: SystemSpec, tau: float) -> np.ndarray:
    """Phase ``exp(-i Delta_jk tau / hbar)`` on each ``rho_jk``."""
    if tau < 0:
        raise ConfigError(f"free-evolution time must be >= 0, got {tau}")
    return np.asarray(rho, dtype=complex) * np.exp(-1j * spec.gaps * tau / spec.hbar)


class ScheduleKind(str, enum.Enum):
    ZERO = "zero"
    FIXED = "fixed"
    POISSON = "poisson"


@dataclass(frozen=True)
class CollisionSchedule:
    """Inter-collision times: all zero, all ``tau``, or exponential with mean ``tau``."""

    count: int
    kind: ScheduleKind = ScheduleKind.ZERO
    tau: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.count < 0:
            raise ConfigError("schedule count must be >= 0")
        if self.tau < 0:
            raise ConfigError("schedule tau must be >= 0")
        if self.kind is ScheduleKind.POISSON and self.seed is None:
            raise ConfigError("poisson schedule needs a seed")

    def times(self) -> np.ndarray:
        if self.kind is ScheduleKind.ZERO:
            return np.zeros(self.count)
        if self.kind is ScheduleKind.FIXED:
            return np.full(self.count, float(self.tau))
        return np.random.default_rng(self.seed).exponential(self.tau, size=self.count)


@dataclass
class Trajectory:
    """States after each collision; ``states[0]`` is the initial state."""

    states: list = field(default_factory=list)
    times: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    max_trace_drift: float = 0.0

    def __len__(self):
        return len(self.states)

    def populations(self) -> np.ndarray:
        return np.array([np.diag(r).real for r in self.states])


def run_collisions(
    rho0, S: Superoperator, schedule: CollisionSchedule, spec: SystemSpec, thin: int = 1
) -> Trajectory:
    """Apply ``S`` then free evolution for each scheduled interval.

    Every ``thin``-th state is stored, plus the last one.
    """
    if thin < 1:
        raise ConfigError("thin must be >= 1")
    rho = validate_density_matrix(rho0)
    if rho.shape[0] != spec.dim or S.dim != spec.dim:
        raise DimensionMismatch("state, map and system dimensions differ")
    traj = Trajectory([rho.copy()], [0.0], [0])
    t = 0.0
    taus = schedule.times()
    for n, tau in enumerate(taus, start=1):
        try:
            rho, drift = _apply_with_drift(S, rho)
        except TraceDrift as exc:
            raise TraceDrift(f"step {n}: {exc}", step=n) from exc
        traj.max_trace_drift = max(traj.max_trace_drift, drift)
        rho = free_evolution(rho, spec, tau)
        t += tau
        if n % thin == 0 or n == len(taus):
            traj.states.append(rho.copy())
            traj.times.append(t)
            traj.steps.append(n)
    return traj


def bloch_vector(rho) -> tuple[float, float, float]:
    """``(Px, Py, Pz)`` with ``rho = (I + P.sigma) / 2``."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise DimensionMismatch(f"Bloch vector needs a 2-level state, got shape {rho.shape}")
    c = rho[0, 1]
    return 2.0 * c.real, -2.0 * c.imag, float((rho[0, 0] - rho[1, 1]).real)


def inverse_temperature_estimators(
    rho, spec: SystemSpec, floor: float = POPULATION_FLOOR, strict: bool = False
) -> np.ndarray:
    """``B[j, k] = -ln(rho_jj / rho_kk) / (e_j - e_k)`` for ``j > k``; NaN elsewhere.

    Pairs touching a population below ``floor`` (or with ``e_j == e_k``) are
    NaN, or raise :class:`PopulationUnderflow` when ``strict``.
    """
    pops = np.diag(np.asarray(rho)).real
    n = spec.dim
    low = np.flatnonzero(pops < floor)
    if strict and low.size:
        raise PopulationUnderflow(f"populations {low.tolist()} are below the floor {floor:g}", low.tolist())
    out = np.full((n, n), np.nan)
    e = spec.energies
    for j in range(n):
        for k in range(j):
            if pops[j] < floor or pops[k] < floor or e[j] == e[k]:
                continue
            out[j, k] = -np.log(pops[j] / pops[k]) / (e[j] - e[k])
    return out
