"""Composite Gauss-Legendre rules split at breakpoints.

Integrands here have square-root kinks wherever a scattering channel opens,
and sometimes an inverse square-root at an endpoint. Each segment between
breakpoints is therefore mapped with the smoothstep substitution
``x = a + (b - a)(3s^2 - 2s^3)``: near either end ``x - a ~ s^2``, which turns
``sqrt(x - a)`` into a smooth function of ``s`` and restores fast convergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class QuadratureConfig:
    """Resolution for the momentum integrals of pure-packet maps."""

    panels: int = 64
    nodes: int = 16
    tol: float = 1e-8

    def __post_init__(self):
        if self.panels < 2 or self.nodes < 1:
            raise ValueError("need panels >= 2 and nodes >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def coarse_panels(self) -> int:
        """Half the panels; the difference to the full rule is the error estimate."""
        return self.panels // 2


@lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def smoothstep_rule(a: float, b: float, panels: int, nodes: int):
    """Nodes and weights for ``int_a^b f(x) dx`` with clustering at both ends."""
    x, w = _legendre(nodes)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * x).ravel()
    ws = (half[:, None] * w).ravel()
    length = b - a
    pts = a + length * s * s * (3.0 - 2.0 * s)
    jac = 6.0 * length * s * (1.0 - s)
    return pts, ws * jac


def segmented_rule(edges, panels: int, nodes: int, min_panels: int = 1):
    """Composite rule over consecutive segments ``edges[i]..edges[i+1]``.

    ``panels`` is the total budget, shared in proportion to segment length.
    """
    edges = np.asarray(edges, dtype=float)
    lengths = np.diff(edges)
    keep = lengths > 0
    if not np.any(keep):
        return np.empty(0), np.empty(0)
    total = lengths[keep].sum()
    pts, wts = [], []
    for a, b, ln in zip(edges[:-1][keep], edges[1:][keep], lengths[keep]):
        n_pan = max(min_panels, round(panels * ln / total))
        p, w = smoothstep_rule(a, b, n_pan, nodes)
        pts.append(p)
        wts.append(w)
    return np.concatenate(pts), np.concatenate(wts)


def with_breakpoints(a: float, b: float, breaks) -> np.ndarray:
    """Sorted edges ``[a, *breaks in (a, b), b]`` with near-duplicates merged."""
    breaks = np.asarray(list(breaks), dtype=float)
    scale = max(1.0, abs(a), abs(b))
    inner = np.sort(breaks[(breaks > a) & (breaks < b)])
    edges = np.concatenate(([a], inner, [b]))
    merged = [edges[0]]
    for x in edges[1:]:
        if x - merged[-1] > 1e-12 * scale:
            merged.append(x)
        else:
            merged[-1] = x
    merged[0] = a
    merged[-1] = b
    return np.asarray(merged)
