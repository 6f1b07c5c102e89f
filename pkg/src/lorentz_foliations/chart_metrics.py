"""Lorentzian metrics on coordinate boxes.

A chart point is a float array whose last axis has length ``dim``; leading
axes are batch axes, so every function here accepts one point or a stack of
points.  By convention the last coordinate is the time-like one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .errors import OutOfDomain, SignatureViolation
from .jets import Jet


@dataclass(frozen=True)
class MetricField:
    """Symmetric (dim x dim) metric given by a coordinate expression.

    ``expression`` maps a coordinate array (or :class:`Jet`) with trailing
    axis ``dim`` to a matrix with two trailing axes; it must be written with
    the functions of :mod:`lorentz_foliations.jets` so that it can be
    differentiated.  ``periodic`` maps axis index to period; those axes
    ignore the box bounds and are wrapped into ``[lower, lower + period)``.
    """

    name: str
    dim: int
    lower: tuple
    upper: tuple
    expression: Callable = field(repr=False, compare=False)
    periodic: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.lower) != self.dim or len(self.upper) != self.dim:
            raise ValueError("box bounds must have one entry per chart axis")
        for ax, period in self.periodic.items():
            if not (0 <= ax < self.dim and period > 0):
                raise ValueError(f"bad periodic axis {ax}: {period}")

    @property
    def n(self) -> int:
        """Leaf dimension (chart dimension minus one)."""
        return self.dim - 1

    def check_points(self, p) -> np.ndarray:
        """Validate chart points and wrap periodic axes; returns a float array."""
        p = np.array(p, dtype=float)
        if p.ndim == 0 or p.shape[-1] != self.dim:
            raise OutOfDomain(f"{self.name}: expected points with {self.dim} coordinates, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise OutOfDomain(f"{self.name}: non-finite coordinates")
        for ax in range(self.dim):
            lo, hi = self.lower[ax], self.upper[ax]
            if ax in self.periodic:
                p[..., ax] = lo + np.mod(p[..., ax] - lo, self.periodic[ax])
                continue
            col = p[..., ax]
            bad = (col <= lo) | (col >= hi)
            if np.any(bad):
                where = p[bad][0] if p.ndim > 1 else p
                raise OutOfDomain(f"{self.name}: point {where.tolist()} outside box on axis {ax} ({lo}, {hi})")
        return p

    def contains(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        ok = np.all(np.isfinite(p), axis=-1)
        for ax in range(self.dim):
            if ax in self.periodic:
                continue
            ok &= (p[..., ax] > self.lower[ax]) & (p[..., ax] < self.upper[ax])
        return ok

    def jet(self, p, order: int) -> Jet:
        """Metric components with partial derivatives up to ``order``."""
        p = self.check_points(p)
        return self.expression(Jet.variable(p, order))

    def __call__(self, p) -> np.ndarray:
        p = self.check_points(p)
        return np.asarray(jets.value_of(self.expression(p)), dtype=float)


def lorentz_signature_ok(g: np.ndarray) -> np.ndarray:
    """True where the symmetric matrices have exactly one negative eigenvalue and no zero ones."""
    w = np.linalg.eigvalsh(g)
    scale = np.max(np.abs(w), axis=-1)
    tiny = np.abs(w) <= 1e-12 * scale[..., None]
    return (np.sum(w < 0, axis=-1) == 1) & ~np.any(tiny, axis=-1)


def eval_metric(metric: MetricField, p, check_every: int = 1) -> np.ndarray:
    """Metric matrix at ``p``.

    The Lorentz-signature check runs on every ``check_every``-th point of a
    batch (0 disables it).
    """
    g = metric(p)
    asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)), initial=0.0)
    if asym > 1e-12 * max(1.0, np.max(np.abs(g))):
        raise SignatureViolation(f"{metric.name}: metric not symmetric (defect {asym:.3e})")
    if check_every:
        flat = g.reshape(-1, metric.dim, metric.dim)[::check_every]
        ok = lorentz_signature_ok(flat)
        if not np.all(ok):
            pts = np.asarray(p, dtype=float).reshape(-1, metric.dim)[::check_every]
            raise SignatureViolation(f"{metric.name}: signature is not (+...+-) at {pts[~ok][0].tolist()}")
    return g


def metric_partials(metric: MetricField, p) -> np.ndarray:
    """First partials of the metric, ``out[..., c, a, b] = d_c g_ab`` (exact, forward mode)."""
    d = metric.jet(p, 1).partials
    return np.moveaxis(d, -1, -3)


def metric_partials_fd(metric: MetricField, p, step: float = 1e-5) -> np.ndarray:
    """Central-difference counterpart of :func:`metric_partials` (test oracle)."""
    p = np.asarray(p, dtype=float)
    out = []
    for c in range(metric.dim):
        e = np.zeros(metric.dim)
        e[c] = step
        out.append((metric(p + e) - metric(p - e)) / (2 * step))
    return np.stack(out, axis=-3)
