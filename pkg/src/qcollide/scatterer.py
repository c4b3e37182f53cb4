"""N-level scatterer with a point interaction ``g * delta(x) * nu``.

The internal Hamiltonian is diagonal, ``H_Y = diag(e_1, ..., e_N)``, and the
particle couples through the real symmetric matrix ``V[k, j] = <k|nu|j>``.
At total energy ``E`` channel ``j`` carries momentum
``p_j = sqrt(2 m (E - e_j))``; closed channels use the evanescent branch
``p_j = i sqrt(2 m (e_j - E))``.

Amplitudes follow from continuity and the derivative jump at ``x = 0``::

    t = [I + (i m g / hbar^2) D^-1 V]^-1,    r = t - I,    D = diag(p / hbar)

and the flux-normalised blocks on the open channels are
``t_hat[j', j] = sqrt(p_j' / p_j) t[j', j]`` (likewise for ``r_hat``).
"""

from __future__ import annotations

import warnings
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    NoOpenChannel,
    SingularMatrix,
    ThresholdEnergy,
    UnitarityViolation,
)

#: Relative distance to a channel threshold treated as "exactly at" it.
THRESHOLD_RTOL = 1e-14
#: ``scattering_matrix`` refuses to return blocks whose unitarity residual exceeds this.
UNITARITY_HARD_TOL = 1e-8
_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """The fixed scatterer: level energies, coupling matrix and constants."""

    energies: np.ndarray
    coupling: np.ndarray
    g: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        e = np.array(self.energies, dtype=float).reshape(-1)
        v = np.array(self.coupling, dtype=float)
        if e.size < 1:
            raise ConfigError("energies: need at least one level")
        if np.any(np.diff(e) < 0):
            raise ConfigError("energies: must be sorted ascending")
        if v.shape != (e.size, e.size):
            raise ConfigError(f"coupling_matrix: expected shape {(e.size, e.size)}, got {v.shape}")
        if not np.allclose(v, v.T, rtol=0, atol=_SYMMETRY_TOL * max(1.0, np.abs(v).max())):
            raise ConfigError("coupling_matrix: must be symmetric")
        if not self.mass > 0:
            raise ConfigError("mass: must be positive")
        if not self.hbar > 0:
            raise ConfigError("hbar: must be positive")
        e.setflags(write=False)
        v = 0.5 * (v + v.T)
        v.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "coupling", v)
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "hbar", float(self.hbar))

    @classmethod
    def from_mapping(cls, data: Mapping) -> SystemSpec:
        """Build from a config block with keys ``energies, coupling_matrix, g, mass, hbar``."""
        known = {"energies", "coupling_matrix", "g", "mass", "hbar"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"system: unknown keys {sorted(unknown)}")
        missing = {"energies", "coupling_matrix"} - set(data)
        if missing:
            raise ConfigError(f"system: missing keys {sorted(missing)}")
        return cls(
            energies=data["energies"],
            coupling=data["coupling_matrix"],
            g=data.get("g", 1.0),
            mass=data.get("mass", 1.0),
            hbar=data.get("hbar", 1.0),
        )

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def gaps(self) -> np.ndarray:
        """Bohr gaps ``gaps[j, k] = e_j - e_k``."""
        return self.energies[:, None] - self.energies[None, :]

    def commutes_with_coupling(self) -> bool:
        """True when ``[H_Y, nu] = 0``, i.e. ``nu`` only links degenerate levels."""
        comm = self.coupling * self.gaps
        return bool(np.all(np.abs(comm) <= 1e-12 * max(1.0, np.abs(self.gaps).max())))

    def warn_if_not_thermalizing(self):
        if self.commutes_with_coupling():
            warnings.warn(
                "coupling commutes with H_Y: collisions cannot induce transitions "
                "between energy levels, so the system will not thermalize",
                stacklevel=2,
            )


@dataclass(frozen=True, eq=False)
class ScatteringMatrixAtE:
    """Open-channel blocks of the scattering matrix at one total energy."""

    E: float
    open: np.ndarray
    r_left: np.ndarray
    t_left: np.ndarray
    r_right: np.ndarray
    t_right: np.ndarray
    momenta: np.ndarray

    @property
    def n_open(self) -> int:
        return self.open.size

    @property
    def s(self) -> np.ndarray:
        """Assembled ``[[r_L, t_R], [t_L, r_R]]``."""
        return np.block([[self.r_left, self.t_right], [self.t_left, self.r_right]])

    def unitarity_residual(self) -> float:
        s = self.s
        eye = np.eye(s.shape[0])
        return max(
            np.linalg.norm(s.conj().T @ s - eye),
            np.linalg.norm(s @ s.conj().T - eye),
        )

    def symmetry_residual(self) -> float:
        s = self.s
        return float(np.abs(s - s.T).max())


def open_channels(spec: SystemSpec, E: float) -> np.ndarray:
    """Indices (0-based) of channels with ``e_j <= E``, in level order."""
    return np.flatnonzero(spec.energies <= E)


def channel_momenta(spec: SystemSpec, E) -> np.ndarray:
    """Complex channel momenta; the last axis runs over levels.

    Open channels get a real non-negative momentum, closed ones the
    evanescent branch with positive imaginary part.
    """
    kin = np.asarray(E, dtype=float)[..., None] - spec.energies
    root = np.sqrt(2.0 * spec.mass * np.abs(kin))
    return np.where(kin >= 0, root + 0j, 1j * root)


def t_matrix(spec: SystemSpec, E: float) -> np.ndarray:
    """Full ``N x N`` transmission amplitude matrix ``t`` (closed channels included)."""
    if E <= spec.energies[0]:
        raise NoOpenChannel(f"E={E} is not above the ground level e_1={spec.energies[0]}")
    k = channel_momenta(spec, E) / spec.hbar
    c = 1j * spec.mass * spec.g / spec.hbar**2
    # (I + c D^-1 V)^-1 == (D + c V)^-1 D; the right form stays finite when some k_j -> 0
    a = np.diag(k) + c * spec.coupling
    try:
        t = np.linalg.solve(a, np.diag(k))
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(a)
        raise SingularMatrix(f"t-matrix solve failed at E={E} (cond={cond:.3g})", cond) from exc
    if not np.all(np.isfinite(t)):
        cond = np.linalg.cond(a)
        raise SingularMatrix(f"t-matrix solve not finite at E={E} (cond={cond:.3g})", cond)
    return t


def reflection_matrix(spec: SystemSpec, E: float) -> np.ndarray:
    """Full ``r = t - I`` from continuity of the wavefunction at the origin."""
    return t_matrix(spec, E) - np.eye(spec.dim)


def flux_blocks(spec: SystemSpec, E) -> tuple[np.ndarray, np.ndarray]:
    """Batched ``(t_hat, r_hat)`` as ``(..., N, N)`` arrays over an energy array.

    Rows or columns belonging to closed channels are zero. Uses
    ``t_hat = sqrt(K) (K + cV)^-1 sqrt(K)`` restricted to open channels, which
    is symmetric by construction and involves no division by momenta.
    """
    E = np.asarray(E, dtype=float)
    k = channel_momenta(spec, E) / spec.hbar
    c = 1j * spec.mass * spec.g / spec.hbar**2
    n = spec.dim
    a = k[..., :, None] * np.eye(n) + c * spec.coupling
    green = np.linalg.inv(a)
    is_open = E[..., None] >= spec.energies
    root = np.where(is_open, np.sqrt(k.real.clip(min=0.0)), 0.0)
    t_hat = root[..., :, None] * green * root[..., None, :]
    r_hat = t_hat - np.eye(n) * is_open[..., None, :]
    return t_hat, r_hat


def _check_threshold(spec: SystemSpec, E: float):
    scale = max(1.0, abs(E))
    hit = np.flatnonzero(np.abs(spec.energies - E) <= THRESHOLD_RTOL * scale)
    if hit.size:
        raise ThresholdEnergy(
            f"E={E!r} sits on the threshold of channel(s) {hit.tolist()}; "
            "shift the evaluation point off the threshold"
        )


def scattering_matrix(spec: SystemSpec, E: float) -> ScatteringMatrixAtE:
    """Flux-normalised open-channel blocks at total energy ``E``.

    The delta potential is even, so left and right blocks coincide.
    """
    E = float(E)
    t_matrix(spec, E)  # surfaces NoOpenChannel / SingularMatrix with a clear message
    _check_threshold(spec, E)
    idx = open_channels(spec, E)
    t_hat, r_hat = flux_blocks(spec, E)
    t_o = t_hat[np.ix_(idx, idx)]
    r_o = r_hat[np.ix_(idx, idx)]
    smat = ScatteringMatrixAtE(
        E=E,
        open=idx,
        r_left=r_o,
        t_left=t_o,
        r_right=r_o.copy(),
        t_right=t_o.copy(),
        momenta=channel_momenta(spec, E)[idx].real,
    )
    resid = smat.unitarity_residual()
    if resid > UNITARITY_HARD_TOL:
        raise UnitarityViolation(f"||s^dag s - I|| = {resid:.3g} at E={E}")
    return smat


def transition_probabilities(smat: ScatteringMatrixAtE):
    """``(P_L, P_R, P)`` with ``P_L[j', j] = |t_L[j', j]|^2 + |r_L[j', j]|^2``."""
    p_left = np.abs(smat.t_left) ** 2 + np.abs(smat.r_left) ** 2
    p_right = np.abs(smat.t_right) ** 2 + np.abs(smat.r_right) ** 2
    return p_left, p_right, 0.5 * (p_left + p_right)


def transition_probability_batch(spec: SystemSpec, E) -> np.ndarray:
    """Side-averaged ``P[..., j', j]`` over an energy array, zero on closed channels."""
    t_hat, r_hat = flux_blocks(spec, E)
    return np.abs(t_hat) ** 2 + np.abs(r_hat) ** 2
