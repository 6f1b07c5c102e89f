"""Levi-Civita connection and curvature.

Sign convention (used everywhere in the package)::

    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    R_ABCD   = g(R(e_A, e_B) e_C, e_D)
    Ric(X, Y) = sum_A eps_A g(R(e_A, X) Y, e_A)

With this convention a space of constant sectional curvature ``c`` has
``R(X, Y)Z = c (g(Y, Z) X - g(X, Z) Y)``, ``Ric = n c g`` and
``g(R(v, N)N, v) = -c`` for unit spacelike ``v`` orthogonal to a unit
timelike ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .chart_metrics import MetricField
from .errors import BadFrameVector, NotUnitTimelike, SingularMetric
from .jets import Jet


@dataclass(frozen=True)
class ConnectionCoeffs:
    """``gamma[..., a, b, c]`` is Gamma^a_bc in chart indices."""

    gamma: np.ndarray

    @property
    def torsion_defect(self) -> float:
        return float(np.max(np.abs(self.gamma - np.swapaxes(self.gamma, -1, -2)), initial=0.0))


@dataclass(frozen=True)
class CurvatureTensor:
    riemann_low: np.ndarray
    ricci_std: np.ndarray
    basis: str  # "coordinate" or "frame"


def _check_invertible(g: np.ndarray, name: str) -> None:
    det = np.linalg.det(g)
    scale = np.max(np.abs(g), axis=(-1, -2)) ** g.shape[-1]
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise SingularMetric(f"{name}: metric is singular")


def christoffel_jet(metric: MetricField, p, order: int = 0) -> Jet:
    """Christoffel symbols Gamma^a_bc with derivatives to ``order`` (needs the metric at order+1)."""
    g = metric.jet(p, order + 1)
    _check_invertible(g.value, metric.name)
    return christoffel_from_metric_jet(g)


def christoffel_from_metric_jet(g: Jet) -> Jet:
    """Gamma^a_bc from a metric jet; the result has one order less than ``g``."""
    order = g.order - 1
    dg = g.gradient()  # dg[a, b, c] = d_c g_ab
    ginv = jets.inv(g.truncate(order))
    low = 0.5 * (
        jets.einsum("...dcb->...dbc", dg)
        + dg
        - jets.einsum("...bcd->...dbc", dg)
    )  # low[d, b, c] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    return jets.einsum("...ad,...dbc->...abc", ginv, low)


def christoffel(metric: MetricField, p) -> ConnectionCoeffs:
    return ConnectionCoeffs(christoffel_jet(metric, p, 0).value)


def metric_compatibility_defect(metric: MetricField, p) -> float:
    """max |nabla_c g_ab| computed from the exact partials and the Christoffel symbols."""
    g = metric.jet(p, 1)
    gam = christoffel(metric, p).gamma
    dg = g.partials  # [a, b, c] = d_c g_ab
    cov = dg - np.einsum("...dca,...db->...abc", gam, g.value) - np.einsum("...dcb,...ad->...abc", gam, g.value)
    return float(np.max(np.abs(cov)))


def riemann_coordinate(metric: MetricField, p) -> tuple[np.ndarray, np.ndarray]:
    """(metric, R_low) in the coordinate basis, R_low[a,b,c,d] = g(R(d_a, d_b) d_c, d_d)."""
    gam_j = christoffel_jet(metric, p, 1)
    g = metric(p)
    return g, riemann_from_christoffel(gam_j, g)


def riemann_from_christoffel(gam_j: Jet, g: np.ndarray) -> np.ndarray:
    """Coordinate R_low from an order >= 1 Christoffel jet and the metric value."""
    gam = gam_j.value
    dgam = gam_j.partials  # [a, b, c, e] = d_e Gamma^a_bc
    # R(d_c, d_d) d_b = R^a_bcd d_a
    rup = (
        np.einsum("...adbc->...abcd", dgam)
        - np.einsum("...acbd->...abcd", dgam)
        + np.einsum("...ace,...edb->...abcd", gam, gam)
        - np.einsum("...ade,...ecb->...abcd", gam, gam)
    )
    # g(R(d_A, d_B) d_C, d_D) = g_De R^e_CAB
    return np.einsum("...de,...ecab->...abcd", g, rup)


def riemann(metric: MetricField, p, basis="coordinate") -> CurvatureTensor:
    """Riemann tensor with all indices lowered.

    ``basis`` is ``"coordinate"`` or an array of frame vectors ``[..., A, a]``
    (rows are vectors, e.g. an adapted frame).  In the frame case the Ricci
    contraction uses the frame's own signs eps_A = g(e_A, e_A).
    """
    g, low = riemann_coordinate(metric, p)
    if isinstance(basis, str):
        if basis != "coordinate":
            raise ValueError(f"unknown basis {basis!r}")
        ginv = np.linalg.inv(g)
        ric = np.einsum("...ad,...axyd->...xy", ginv, low)
        return CurvatureTensor(low, ric, "coordinate")
    e = np.asarray(basis, dtype=float)
    low_f = np.einsum("...Aa,...Bb,...Cc,...Dd,...abcd->...ABCD", e, e, e, e, low)
    eps = np.einsum("...Aa,...ab,...Ab->...A", e, g, e)
    eps = np.sign(eps)
    ric = np.einsum("...A,...AxyA->...xy", eps, low_f)
    return CurvatureTensor(low_f, ric, "frame")


def constant_curvature_tensor(g: np.ndarray, c) -> np.ndarray:
    """c (g_AD g_BC - g_AC g_BD): the R_low of a space of constant curvature c."""
    c = np.asarray(c, dtype=float)[..., None, None, None, None]
    return c * (np.einsum("...ad,...bc->...abcd", g, g) - np.einsum("...ac,...bd->...abcd", g, g))


def sectional_constant(metric: MetricField, p) -> np.ndarray:
    """Scalar curvature divided by n(n+1): the constant c if the space has constant curvature."""
    g, low = riemann_coordinate(metric, p)
    ginv = np.linalg.inv(g)
    ric = np.einsum("...ad,...axyd->...xy", ginv, low)
    scal = np.einsum("...xy,...xy->...", ginv, ric)
    n = metric.n
    return scal / (n * (n + 1))


def _orthonormal_rows(g: np.ndarray) -> np.ndarray:
    """Rows e_A with g(e_A, e_B) = diag(+-1), from the eigen-decomposition of g."""
    w, V = np.linalg.eigh(g)
    return np.swapaxes(V / np.sqrt(np.abs(w))[..., None, :], -1, -2)


def constant_curvature_defect(metric: MetricField, p, c=None) -> float:
    """max |R_ABCD - c (g_AD g_BC - g_AC g_BD)| over orthonormal-frame components.

    Frame components are chart independent; coordinate components scale with
    the metric (on the de Sitter chart they reach e^20), so a fixed absolute
    tolerance on them would mean different things at different points.
    ``c`` defaults to the pointwise estimate.
    """
    g, low = riemann_coordinate(metric, p)
    if c is None:
        c = sectional_constant(metric, p)
    e = _orthonormal_rows(g)
    diff = low - constant_curvature_tensor(g, c)
    diff = np.einsum("...Aa,...Bb,...Cc,...Dd,...abcd->...ABCD", e, e, e, e, diff)
    return float(np.max(np.abs(diff)))


def symmetry_defects(r: np.ndarray) -> dict:
    """Violations of the algebraic Riemann symmetries for R_low arrays."""
    return {
        "antisym_ab": float(np.max(np.abs(r + np.einsum("...abcd->...bacd", r)))),
        "antisym_cd": float(np.max(np.abs(r + np.einsum("...abcd->...abdc", r)))),
        "pair": float(np.max(np.abs(r - np.einsum("...abcd->...cdab", r)))),
        "bianchi": float(
            np.max(np.abs(r + np.einsum("...abcd->...acdb", r) + np.einsum("...abcd->...adbc", r)))
        ),
    }


def _inner(g, u, v):
    return np.einsum("...a,...ab,...b->...", u, g, v)


def ric_direction(metric: MetricField, p, N, tol: float = 1e-9) -> np.ndarray:
    """Normalized Ricci curvature in the unit timelike direction N: -(1/n) Ric(N, N)."""
    g, low = riemann_coordinate(metric, p)
    N = np.asarray(N, dtype=float)
    if np.any(np.abs(_inner(g, N, N) + 1) > tol):
        raise NotUnitTimelike(f"g(N, N) must be -1 within {tol}")
    ginv = np.linalg.inv(g)
    ric = np.einsum("...ad,...axyd,...x,...y->...", ginv, low, N, N)
    return -ric / metric.n


def radial_curvature(metric: MetricField, p, N, v, tol: float = 1e-9) -> np.ndarray:
    """kappa(v) = g(R(v, N)N, v) for unit spacelike v orthogonal to unit timelike N."""
    g, low = riemann_coordinate(metric, p)
    N = np.asarray(N, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(_inner(g, N, N) + 1) > tol):
        raise NotUnitTimelike(f"g(N, N) must be -1 within {tol}")
    if np.any(np.abs(_inner(g, v, v) - 1) > tol) or np.any(np.abs(_inner(g, v, N)) > tol):
        raise BadFrameVector("v must be unit spacelike and orthogonal to N")
    return np.einsum("...abcd,...a,...b,...c,...d->...", low, v, N, N, v)
