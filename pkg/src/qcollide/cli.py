"""Command-line experiment runner.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, GridConfig, load_config
from .dynamics import CollisionSchedule, bloch_vector, inverse_temperature_estimators, run_collisions
from .errors import ConfigError, DetailedBalanceViolated, NumericError
from .quadrature import QuadratureConfig
from .scatmap import (
    PopulationMap,
    Superoperator,
    detailed_balance_residual,
    ensemble_map,
    narrow_map,
    population_map,
    pure_packet_map,
)
from .scatterer import SystemSpec, scattering_matrix
from .thermo import entropy_production, heat, shannon_entropy
from .wavepacket import (
    GaussianPacket,
    amplitude,
    broad_ensemble_diagonal,
    effusion_pdf,
    maxwell_boltzmann_pdf,
    thermal_ensemble,
)

CSV_SCHEMA = 1
DIAGNOSTICS_SCHEMA = 1


def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def _write_csv(path: Path, kind: str, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# qcollide {kind} csv schema {CSV_SCHEMA}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    return path


def _write_json(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# building blocks


class Experiment:
    """A validated config plus the objects derived from it, built lazily."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        s = cfg.system
        self.spec = SystemSpec(s.energies, s.coupling_matrix, g=s.g, mass=s.mass, hbar=s.hbar)
        q = cfg.quadrature
        self.quad = QuadratureConfig(panels=q.panels, nodes=q.nodes, tol=q.tol)
        self._map = None
        self._traj = None

    @property
    def beta(self):
        return self.cfg.thermo_beta()

    def ensemble(self):
        src = self.cfg.source
        if src.kind == "narrow_ensemble":
            return thermal_ensemble(src.distribution, src.beta, self.spec, n_nodes=src.nodes)
        if src.kind == "broad_ensemble":
            return thermal_ensemble(
                "broad_effusion_mixture", src.beta, self.spec, sigma=src.sigma, n_nodes=src.nodes
            )
        return None

    def superoperator(self) -> Superoperator:
        if self._map is None:
            src = self.cfg.source
            if src.kind == "pure_packet":
                if src.builder == "narrow":
                    side = "left" if src.p0 > 0 else "right"
                    self._map = narrow_map(self.spec, src.p0, side)
                else:
                    packet = GaussianPacket(src.p0, src.x0, src.sigma)
                    self._map = pure_packet_map(self.spec, packet, self.quad)
            elif src.kind == "narrow_ensemble":
                self._map = ensemble_map(self.spec, self.ensemble(), builder="narrow")
            else:
                self._map = ensemble_map(
                    self.spec, self.ensemble(), builder="full", quad=self.quad, x0=src.x0
                )
        return self._map

    def population_map(self) -> PopulationMap:
        return population_map(self.superoperator())

    def trajectory(self):
        if self._traj is None:
            cfg = self.cfg
            sched = CollisionSchedule(cfg.steps, cfg.schedule.kind, cfg.schedule.tau, cfg.seed)
            self._traj = run_collisions(
                cfg.initial_density(), self.superoperator(), sched, self.spec, thin=cfg.outputs.thin
            )
        return self._traj

    def max_kinetic_energy(self) -> float:
        src = self.cfg.source
        m = self.spec.mass
        if src.kind == "pure_packet":
            return (abs(src.p0) + 8.0 * src.sigma) ** 2 / (2 * m)
        span = float(self.spec.energies[-1] - self.spec.energies[0])
        return span + 20.0 / src.beta

    def unitarity_residual(self, num: int = 64) -> float:
        e = self.spec.energies
        grid = np.linspace(e[0], e[-1] + self.max_kinetic_energy(), num + 1)[1:]
        worst = 0.0
        for E in _off_threshold(grid, e):
            worst = max(worst, scattering_matrix(self.spec, E).unitarity_residual())
        return worst


def _off_threshold(grid, energies):
    """Shift grid points that sit on a channel threshold by ``1e-12 * scale`` upwards."""
    out = []
    for E in np.asarray(grid, dtype=float):
        scale = max(1.0, abs(E))
        if np.any(np.abs(energies - E) <= 1e-12 * scale):
            E = E + 1e-12 * scale
        out.append(E)
    return np.asarray(out)


def _grid(g: GridConfig | None, default):
    if g is None:
        return np.linspace(*default)
    return np.linspace(g.start, g.stop, g.num)


# ---------------------------------------------------------------------------
# subcommands


def cmd_smatrix(exp: Experiment, out: Path) -> list[Path]:
    e = exp.spec.energies
    default = (e[0], e[-1] + exp.max_kinetic_energy(), 101)
    grid = _off_threshold(_grid(exp.cfg.outputs.smatrix_grid, default), e)
    rows = []
    for E in grid:
        if E <= e[0]:
            continue
        sm = scattering_matrix(exp.spec, E)
        labels = sm.open + 1
        for name, block in (
            ("r_left", sm.r_left),
            ("t_left", sm.t_left),
            ("r_right", sm.r_right),
            ("t_right", sm.t_right),
        ):
            for a, row in enumerate(labels):
                for b, col in enumerate(labels):
                    z = block[a, b]
                    rows.append((E, name, str(row), str(col), z.real, z.imag))
    return [_write_csv(out / "smatrix.csv", "smatrix", ["E", "block", "row", "col", "re", "im"], rows)]


def cmd_ensemble(exp: Experiment, out: Path) -> list[Path]:
    src = exp.cfg.source
    m = exp.spec.mass
    g = exp.cfg.outputs.ensemble_grid
    if src.kind == "pure_packet":
        lo, hi = src.p0 - 8 * src.sigma, src.p0 + 8 * src.sigma
        p = _grid(g, (lo, hi, 201))
        packet = GaussianPacket(src.p0, src.x0, src.sigma)
        dens = np.abs(amplitude(packet, p, exp.spec.hbar)) ** 2
    else:
        pmax = math.sqrt(2 * m * 20.0 / src.beta)
        if src.kind == "narrow_ensemble":
            p = _grid(g, (0.0, pmax, 201))
            pdf = effusion_pdf if src.distribution == "effusion" else maxwell_boltzmann_pdf
            dens = pdf(src.beta, m, p)
        else:
            p = _grid(g, (-pmax, pmax, 401))
            dens = broad_ensemble_diagonal(src.beta, m, src.sigma, p)
    rows = zip(p, dens)
    return [_write_csv(out / "ensemble.csv", "ensemble", ["p", "density"], rows)]


def map_diagnostics(exp: Experiment) -> dict:
    S = exp.superoperator()
    diag = S.diagnostics()
    diag["unitarity_residual"] = exp.unitarity_residual()
    diag["dim"] = S.dim
    if exp.beta is not None:
        W = np.real(np.einsum("aajj->aj", S.tensor()))
        diag["detailed_balance_residual"] = detailed_balance_residual(W, exp.beta, exp.spec.energies)
        diag["detailed_balance_beta"] = exp.beta
    return diag


def cmd_map(exp: Experiment, out: Path) -> list[Path]:
    S = exp.superoperator()
    n2 = S.matrix.shape[0]
    rows = ((str(r), str(c), S.matrix[r, c].real, S.matrix[r, c].imag) for r in range(n2) for c in range(n2))
    paths = [_write_csv(out / "map.csv", "map", ["row", "col", "re", "im"], rows)]
    paths.append(_write_json(out / "map_diagnostics.json", _diag_doc("map", map_diagnostics(exp))))
    return paths


def _trajectory_rows(exp: Experiment):
    n = exp.spec.dim
    header = ["step", "time"]
    pairs = [(j, k) for j in range(n) for k in range(j, n)]
    for j, k in pairs:
        header += [f"rho_{j + 1}{k + 1}_re", f"rho_{j + 1}{k + 1}_im"]
    if n == 2:
        header += ["Px", "Py", "Pz"]
    bpairs = [(j, k) for j in range(n) for k in range(j)]
    header += [f"B_{j + 1}{k + 1}" for j, k in bpairs]
    traj = exp.trajectory()
    rows = []
    for step, t, rho in zip(traj.steps, traj.times, traj.states):
        row = [str(step), t]
        for j, k in pairs:
            row += [rho[j, k].real, rho[j, k].imag]
        if n == 2:
            row += list(bloch_vector(rho))
        B = inverse_temperature_estimators(rho, exp.spec)
        row += [B[j, k] for j, k in bpairs]
        rows.append(row)
    return header, rows


def cmd_evolve(exp: Experiment, out: Path) -> list[Path]:
    header, rows = _trajectory_rows(exp)
    return [_write_csv(out / "trajectory.csv", "trajectory", header, rows)]


def thermo_rows(exp: Experiment):
    """Per-step records; without detailed balance only ``Q`` and ``dS`` are filled."""
    beta = exp.beta
    if beta is None:
        raise ConfigError("thermo: needs an inverse temperature (source.beta or thermo.beta)")
    W = exp.population_map()
    e = exp.spec.energies
    traj = exp.trajectory()
    pops = traj.populations()
    rows = []
    balanced = True
    for step, p in zip(traj.steps, pops):
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        try:
            r = entropy_production(W, p, beta, e, step=step)
            rows.append((str(step), r.Q, r.dS, r.flow, r.Sigma))
        except DetailedBalanceViolated:
            balanced = False
            q = heat(W, p, e)
            ds = shannon_entropy(W(p)) - shannon_entropy(p)
            rows.append((str(step), q, ds, float("nan"), float("nan")))
    return rows, balanced


def cmd_thermo(exp: Experiment, out: Path) -> list[Path]:
    rows, _ = thermo_rows(exp)
    return [_write_csv(out / "thermo.csv", "thermo", ["step", "Q", "dS", "flow", "Sigma"], rows)]


def cmd_run(exp: Experiment, out: Path) -> list[Path]:
    paths = cmd_evolve(exp, out)
    diag = map_diagnostics(exp)
    diag["trace_drift_max"] = exp.trajectory().max_trace_drift
    diag["steps"] = exp.cfg.steps
    if exp.beta is not None:
        rows, balanced = thermo_rows(exp)
        paths.append(_write_csv(out / "thermo.csv", "thermo", ["step", "Q", "dS", "flow", "Sigma"], rows))
        diag["entropy_production_decomposed"] = balanced
    paths.append(_write_json(out / "diagnostics.json", _diag_doc("run", diag)))
    return paths


def _diag_doc(kind: str, diag: dict) -> dict:
    return {"schema": DIAGNOSTICS_SCHEMA, "kind": kind, "version": __version__, "diagnostics": diag}


COMMANDS = {
    "smatrix": (cmd_smatrix, "dump s(E) blocks over an energy grid"),
    "ensemble": (cmd_ensemble, "tabulate the incident momentum density"),
    "map": (cmd_map, "write the collision superoperator and its diagnostics"),
    "evolve": (cmd_evolve, "iterate collisions and write the trajectory"),
    "thermo": (cmd_thermo, "per-step heat and entropy bookkeeping"),
    "run": (cmd_run, "trajectory, thermo and diagnostics in one go"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcollide", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file or bundled config name")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--quad-panels", type=int, help="override quadrature panels")
        p.add_argument("--quad-nodes", type=int, help="override quadrature nodes per panel")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    data = cfg.model_dump()
    if args.seed is not None:
        data["seed"] = args.seed
    if args.quad_panels is not None:
        data["quadrature"]["panels"] = args.quad_panels
    if args.quad_nodes is not None:
        data["quadrature"]["nodes"] = args.quad_nodes
    from .config import parse_config

    return parse_config(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        exp = Experiment(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"qcollide: {exc}", file=sys.stderr)
        return 1
    try:
        paths = func(exp, Path(args.out))
    except ConfigError as exc:
        print(f"qcollide: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(
            f"qcollide: numeric failure in '{args.command}' ({type(exc).__name__}): {exc}",
            file=sys.stderr,
        )
        return 2
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
