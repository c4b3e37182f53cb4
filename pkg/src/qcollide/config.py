"""Experiment configuration: YAML files validated with pydantic.

Bundled experiment files live in ``qcollide/configs`` and can be referred
to by name (``fig3_narrow`` or ``fig3_narrow.cfg``).
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SystemConfig(_Strict):
    energies: list[float] = Field(min_length=1)
    coupling_matrix: list[list[float]]
    g: float = 1.0
    mass: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _shape(self):
        n = len(self.energies)
        if len(self.coupling_matrix) != n or any(len(r) != n for r in self.coupling_matrix):
            raise ValueError(f"coupling_matrix must be {n}x{n}")
        if any(b < a for a, b in zip(self.energies, self.energies[1:])):
            raise ValueError("energies must be sorted ascending")
        return self


class PurePacketSource(_Strict):
    kind: Literal["pure_packet"]
    p0: float
    sigma: float = Field(gt=0)
    x0: float = 0.0
    builder: Literal["quadrature", "narrow"] = "quadrature"


class NarrowEnsembleSource(_Strict):
    kind: Literal["narrow_ensemble"]
    distribution: Literal["effusion", "maxwell_boltzmann"] = "effusion"
    beta: float = Field(gt=0)
    nodes: int = Field(129, ge=8)


class BroadEnsembleSource(_Strict):
    kind: Literal["broad_ensemble"]
    beta: float = Field(gt=0)
    sigma: float = Field(gt=0)
    x0: float = 0.0
    nodes: int = Field(65, ge=8)


Source = Annotated[
    PurePacketSource | NarrowEnsembleSource | BroadEnsembleSource,
    Field(discriminator="kind"),
]


class InitialState(_Strict):
    """Either ``thermal_beta`` or ``populations`` plus optional coherences.

    ``coherences`` entries are ``[j, k, re, im]`` with 1-based levels ``j < k``;
    the Hermitian partner is filled in automatically.
    """

    populations: list[float] | None = None
    coherences: list[tuple[int, int, float, float]] = []
    thermal_beta: float | None = None

    @model_validator(mode="after")
    def _one_form(self):
        if (self.populations is None) == (self.thermal_beta is None):
            raise ValueError("give exactly one of populations or thermal_beta")
        if self.thermal_beta is not None and self.coherences:
            raise ValueError("coherences cannot be combined with thermal_beta")
        return self


class ScheduleConfig(_Strict):
    kind: Literal["zero", "fixed", "poisson"] = "zero"
    tau: float = Field(1.0, ge=0)


class QuadratureOverrides(_Strict):
    panels: int = Field(64, ge=2)
    nodes: int = Field(16, ge=1)
    tol: float = Field(1e-8, gt=0)


class GridConfig(_Strict):
    start: float
    stop: float
    num: int = Field(ge=2)


class OutputConfig(_Strict):
    thin: int = Field(1, ge=1)
    smatrix_grid: GridConfig | None = None
    ensemble_grid: GridConfig | None = None


class ThermoConfig(_Strict):
    beta: float = Field(gt=0)


class ExperimentConfig(_Strict):
    system: SystemConfig
    source: Source
    initial_state: InitialState
    steps: int = Field(ge=0)
    schedule: ScheduleConfig = ScheduleConfig()
    seed: int = Field(0, ge=0, lt=2**64)
    quadrature: QuadratureOverrides = QuadratureOverrides()
    outputs: OutputConfig = OutputConfig()
    thermo: ThermoConfig | None = None

    @model_validator(mode="after")
    def _dims(self):
        n = len(self.system.energies)
        init = self.initial_state
        if init.populations is not None:
            if len(init.populations) != n:
                raise ValueError(f"initial_state.populations must have {n} entries")
            if min(init.populations) < 0 or abs(sum(init.populations) - 1) > 1e-10:
                raise ValueError("initial_state.populations must be nonnegative and sum to 1")
            for j, k, _, _ in init.coherences:
                if not (1 <= j < k <= n):
                    raise ValueError(f"coherence indices ({j}, {k}) must satisfy 1 <= j < k <= {n}")
        return self

    def thermo_beta(self) -> float | None:
        if self.thermo is not None:
            return self.thermo.beta
        return getattr(self.source, "beta", None)

    def initial_density(self) -> np.ndarray:
        init = self.initial_state
        e = np.asarray(self.system.energies, dtype=float)
        if init.thermal_beta is not None:
            w = np.exp(-init.thermal_beta * (e - e[0]))
            return np.diag(w / w.sum()).astype(complex)
        rho = np.diag(np.asarray(init.populations, dtype=float)).astype(complex)
        for j, k, re, im in init.coherences:
            rho[j - 1, k - 1] = re + 1j * im
            rho[k - 1, j - 1] = re - 1j * im
        return rho


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "invalid config:\n  " + "\n  ".join(lines)


def bundled_configs() -> list[str]:
    root = resources.files("qcollide") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_config_path(name_or_path: str) -> Path | object:
    path = Path(name_or_path)
    if path.exists():
        return path
    name = path.name if path.name.endswith(".cfg") else path.name + ".cfg"
    candidate = resources.files("qcollide") / "configs" / name
    if candidate.is_file():
        return candidate
    raise ConfigError(f"config {name_or_path!r} not found (bundled: {', '.join(bundled_configs())})")


def parse_config(data) -> ExperimentConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None


def load_config(name_or_path: str) -> ExperimentConfig:
    src = resolve_config_path(name_or_path)
    try:
        data = yaml.safe_load(src.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {name_or_path}: {exc}") from None
    return parse_config(data)
