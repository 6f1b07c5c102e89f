"""Spacelike foliations given as level sets of a time function.

Sign ledger used throughout::

    N      = orientation * grad(tau) / |grad(tau)|,  g(N, N) = -1
    h_ij   = -g(nabla_{e_j} N, e_i)
    H      = -(1/n) tr h            (so that Div N = n H)
    A      = nabla_N N,  x_i = g(A, e_i)

Vector fields are callables ``field(p, order) -> Jet`` returning the chart
components (trailing axis ``dim``) with derivatives up to ``order``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .chart_metrics import MetricField
from .curvature import christoffel_from_metric_jet, christoffel_jet
from .errors import DegenerateFrame, LeftDomain, NotLeafTangent, NotSpacelikeLeaf, OutOfDomain
from .jets import Jet


@dataclass(frozen=True)
class Foliation:
    """Level sets of ``tau`` on ``metric``'s chart.

    ``sample_lower``/``sample_upper`` bound the box on which the foliation
    is known to be spacelike; audits sample there.
    """

    name: str
    metric: MetricField
    tau: Callable = field(repr=False, compare=False)
    orientation: int = -1
    sample_lower: tuple = ()
    sample_upper: tuple = ()

    @property
    def n(self) -> int:
        return self.metric.n

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def sample_box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.sample_lower, dtype=float), np.asarray(self.sample_upper, dtype=float)

    def __call__(self, p) -> np.ndarray:
        return jets.value_of(self.tau(self.metric.check_points(p)))

    def tau_jet(self, p, order: int) -> Jet:
        return self.tau(Jet.variable(self.metric.check_points(p), order))


@dataclass(frozen=True)
class AdaptedFrame:
    """Rows ``e[..., A, :]`` are e_1..e_n followed by N.  ``omega[..., A, B, C] = g(nabla_{e_C} e_A, e_B)``."""

    e: np.ndarray
    gram: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class ExtrinsicData:
    h: np.ndarray
    H: np.ndarray
    B_norm_sq: np.ndarray
    A: np.ndarray
    x: np.ndarray
    umb_dev: np.ndarray
    A_normal: np.ndarray  # g(A, N), zero up to round-off


@dataclass(frozen=True)
class NormalCurve:
    s: np.ndarray
    points: np.ndarray
    geodesic_flag: bool
    max_acceleration: float
    unit_speed_defect: float


# ---------------------------------------------------------------------------
# jet pipeline


def _ip(g, u, v):
    return jets.einsum("...a,...ab,...b->...", u, g, v)


def _normal_from(g, dtau, orientation: int, name: str):
    ginv = jets.inv(g)
    grad = jets.einsum("...ab,...b->...a", ginv, dtau)
    q = jets.einsum("...a,...a->...", dtau, grad)
    qv = jets.value_of(q)
    if not np.all(qv < 0):
        bad = qv[~(qv < 0)]
        raise NotSpacelikeLeaf(f"{name}: grad(tau) is not timelike (g(grad, grad) = {bad.flat[0]:.3e})")
    return grad * (orientation / jets.sqrt(-q))[..., None]


def _frame_from(g, N, n: int, name: str):
    """Gram-Schmidt of the coordinate axes 0..n-1 projected onto the leaf, then N appended."""
    dim = n + 1
    gN = jets.einsum("...ab,...b->...a", g, N)
    us = []
    for i in range(n):
        unit = np.zeros(dim)
        unit[i] = 1.0
        v = N * gN[..., i][..., None] + unit
        for u in us:
            v = v - u * _ip(g, v, u)[..., None]
        norm2 = _ip(g, v, v)
        if np.any(jets.value_of(norm2) <= 1e-12):
            raise DegenerateFrame(f"{name}: projected axis {i} degenerates on the leaf")
        us.append(v * (1.0 / jets.sqrt(norm2))[..., None])
    return jets.stack(us + [N], axis=-2)


def _covariant(V: Jet, gamma):
    """DV[..., a, b] = d_b V^a + Gamma^a_bc V^c (V one order above gamma)."""
    order = gamma.order if isinstance(gamma, Jet) else 0
    return V.gradient() + jets.einsum("...abc,...c->...ab", gamma, V.truncate(order))


@dataclass(frozen=True)
class LocalJets:
    """Jets of the basic fields at a batch of points.

    With ``order = k``: ``g``, ``N`` and ``frame`` carry derivatives to k+1,
    ``gamma`` and ``DN`` (DN[a, b] = nabla_b N^a) to k.
    """

    points: np.ndarray
    order: int
    g: Jet
    N: Jet
    frame: Jet
    gamma: Jet
    DN: Jet
    n: int

    def acceleration(self, order: int | None = None) -> Jet:
        k = self.order if order is None else order
        return jets.einsum("...ab,...b->...a", self.DN.truncate(k), self.N.truncate(k))

    def mean_curvature(self, order: int | None = None) -> Jet:
        k = self.order if order is None else order
        e = self.frame.truncate(k)[..., : self.n, :]
        return jets.einsum("...ia,...ab,...bc,...ic->...", e, self.g.truncate(k), self.DN.truncate(k), e) / self.n

    def second_fundamental_form(self, order: int | None = None) -> Jet:
        k = self.order if order is None else order
        e = self.frame.truncate(k)[..., : self.n, :]
        return -jets.einsum("...ia,...ab,...bc,...jc->...ij", e, self.g.truncate(k), self.DN.truncate(k), e)

    def omega(self) -> np.ndarray:
        """omega[A, B, C] = g(nabla_{e_C} e_A, e_B) at the points."""
        E = self.frame.value
        DE = self.frame.partials + np.einsum("...abc,...Ac->...Aab", self.gamma.value, E)  # [A, a, b] = nabla_b E_A^a
        nab = np.einsum("...Aab,...Cb->...CAa", DE, E)
        return np.einsum("...CAa,...ab,...Bb->...ABC", nab, self.g.value, E)


def local_jets(fol: Foliation, p, order: int = 0) -> LocalJets:
    p = fol.metric.check_points(p)
    tau = fol.tau(Jet.variable(p, order + 2))
    g = fol.metric.expression(Jet.variable(p, order + 1))
    N = _normal_from(g, tau.gradient(), fol.orientation, fol.name)
    gamma = christoffel_from_metric_jet(g)
    DN = _covariant(N, gamma)
    frame = _frame_from(g, N, fol.n, fol.name)
    return LocalJets(p, order, g, N, frame, gamma, DN, fol.n)


# ---------------------------------------------------------------------------
# vector fields


def expression_field(fn: Callable) -> Callable:
    """Turn a coordinate expression (array/jet -> components) into a field callable."""

    def fld(p, order):
        out = fn(Jet.variable(np.asarray(p, dtype=float), order))
        if not isinstance(out, Jet):
            out = Jet.constant(np.broadcast_to(out, np.shape(p)), np.shape(p)[-1], order)
        return out

    return fld


def normal_field(fol: Foliation) -> Callable:
    def fld(p, order):
        p = fol.metric.check_points(p)
        tau = fol.tau(Jet.variable(p, order + 1))
        g = fol.metric.expression(Jet.variable(p, order))
        return _normal_from(g, tau.gradient(), fol.orientation, fol.name)

    return fld


def acceleration_field(fol: Foliation) -> Callable:
    def fld(p, order):
        return local_jets(fol, p, order).acceleration()

    return fld


def mean_curvature_field(fol: Foliation) -> Callable:
    def fld(p, order):
        return local_jets(fol, p, order).mean_curvature()

    return fld


def tangent_projection(fol: Foliation, W: Callable) -> Callable:
    """Project a vector field onto the leaves: W + g(W, N) N."""

    def fld(p, order):
        N = normal_field(fol)(p, order)
        g = fol.metric.expression(Jet.variable(fol.metric.check_points(p), order))
        w = W(p, order)
        return w + N * _ip(g, w, N)[..., None]

    return fld


# ---------------------------------------------------------------------------
# operations


def unit_normal(fol: Foliation, p) -> np.ndarray:
    return normal_field(fol)(p, 0).value


def adapted_frame(fol: Foliation, p) -> AdaptedFrame:
    lj = local_jets(fol, p, 0)
    E = lj.frame.value
    gram = np.einsum("...Aa,...ab,...Bb->...AB", E, lj.g.value, E)
    return AdaptedFrame(E, gram, lj.omega())


def _extrinsic(lj: LocalJets) -> ExtrinsicData:
    n = lj.n
    h = lj.second_fundamental_form(0).value
    tr = np.trace(h, axis1=-2, axis2=-1)
    A = lj.acceleration(0).value
    g = lj.g.value
    E = lj.frame.value
    x = np.einsum("...a,...ab,...ib->...i", A, g, E[..., :n, :])
    dev = h - (tr / n)[..., None, None] * np.eye(n)
    return ExtrinsicData(
        h=h,
        H=-tr / n,
        B_norm_sq=np.sum(h * h, axis=(-2, -1)),
        A=A,
        x=x,
        umb_dev=np.sqrt(np.sum(dev * dev, axis=(-2, -1))),
        A_normal=np.einsum("...a,...ab,...b->...", A, g, lj.N.value),
    )


def shape_operator(fol: Foliation, p) -> ExtrinsicData:
    return _extrinsic(local_jets(fol, p, 0))


def acceleration(fol: Foliation, p) -> tuple[np.ndarray, np.ndarray]:
    ex = shape_operator(fol, p)
    return ex.A, ex.x


def normal_derivative_of_mean_curvature(fol: Foliation, p) -> np.ndarray:
    """N(H) by forward-mode differentiation of the H field along N."""
    lj = local_jets(fol, p, 1)
    H = lj.mean_curvature(1)
    return np.einsum("...a,...a->...", H.partials, lj.N.value)


def leaf_divergence(fol: Foliation, V: Callable, p, tangency_tol: float = 1e-8) -> np.ndarray:
    """div_L V = sum_i g(nabla_{e_i} V, e_i) for a leaf-tangent field V."""
    lj = local_jets(fol, p, 0)
    v = V(lj.points, 1)
    g = lj.g.value
    normal_part = np.einsum("...a,...ab,...b->...", v.value, g, lj.N.value)
    if np.any(np.abs(normal_part) > tangency_tol):
        raise NotLeafTangent(f"g(V, N) = {np.max(np.abs(normal_part)):.3e} exceeds {tangency_tol}")
    DV = _covariant(v, lj.gamma.truncate(0)).value
    e = lj.frame.value[..., : fol.n, :]
    return np.einsum("...ia,...ab,...bc,...ic->...", e, g, DV, e)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Lorentzian Gram-Schmidt of the coordinate axes, last (time) axis first.

    Returns rows e_A with the timelike vector in the last row.
    """
    dim = g.shape[-1]
    order = [dim - 1] + list(range(dim - 1))
    out, eps = [], []
    for ax in order:
        v = np.zeros(g.shape[:-1])
        v[..., ax] = 1.0
        for u, s in zip(out, eps):
            v = v - s * np.einsum("...a,...ab,...b->...", v, g, u)[..., None] * u
        q = np.einsum("...a,...ab,...b->...", v, g, v)
        if np.any(np.abs(q) < 1e-12):
            raise DegenerateFrame("null vector met while orthonormalizing")
        s = np.sign(q)
        out.append(v / np.sqrt(np.abs(q))[..., None])
        eps.append(s[..., None])
    return np.stack(out[1:] + out[:1], axis=-2)


def full_divergence(metric: MetricField, V: Callable, p, method: str = "frame") -> np.ndarray:
    """Div V, either as sum_A eps_A g(nabla_{e_A} V, e_A) or via (1/sqrt|g|) d_a (sqrt|g| V^a)."""
    p = metric.check_points(p)
    v = V(p, 1)
    if method == "frame":
        gamma = christoffel_jet(metric, p, 0)
        DV = _covariant(v, gamma).value
        g = metric(p)
        E = orthonormal_frame(g)
        eps = np.sign(np.einsum("...Aa,...ab,...Ab->...A", E, g, E))
        return np.einsum("...A,...Aa,...ab,...bc,...Ac->...", eps, E, g, DV, E)
    if method == "coordinate":
        gj = metric.jet(p, 1)
        ginv = np.linalg.inv(gj.value)
        dlog = 0.5 * np.einsum("...ab,...bac->...c", ginv, gj.partials)  # d_c ln sqrt|det g|
        return np.trace(v.partials, axis1=-2, axis2=-1) + np.einsum("...a,...a->...", v.value, dlog)
    raise ValueError(f"unknown method {method!r}")


def normal_curve(fol: Foliation, p0, s_max: float, ds: float = 1e-2, accel_tol: float = 1e-8) -> NormalCurve:
    """RK4 integral curve of N from ``p0`` (one point or a batch) up to parameter ``s_max``."""
    metric = fol.metric
    p = metric.check_points(p0)
    nsteps = max(1, int(np.ceil(s_max / ds - 1e-12)))
    h = s_max / nsteps
    ss, pts = [0.0], [p.copy()]

    def f(q):
        if not np.all(metric.contains(q)):
            raise LeftDomain(f"{fol.name}: normal curve left the chart", exit_point=q)
        try:
            return unit_normal(fol, q)
        except NotSpacelikeLeaf as exc:
            raise LeftDomain(f"{fol.name}: normal curve left the foliated region", exit_point=q) from exc

    try:
        for k in range(nsteps):
            k1 = f(p)
            k2 = f(p + 0.5 * h * k1)
            k3 = f(p + 0.5 * h * k2)
            k4 = f(p + h * k3)
            p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            ss.append((k + 1) * h)
            pts.append(metric.check_points(p) if np.all(metric.contains(p)) else p)
            if not np.all(metric.contains(p)):
                raise LeftDomain(f"{fol.name}: normal curve left the chart", exit_point=p)
    except LeftDomain as exc:
        exc.curve = NormalCurve(np.array(ss[: len(pts)]), np.array(pts), False, float("nan"), float("nan"))
        raise
    pts = np.array(pts)
    ex = shape_operator(fol, pts)
    g = metric(pts)
    acc = np.sqrt(np.abs(np.einsum("...a,...ab,...b->...", ex.A, g, ex.A)))
    N = unit_normal(fol, pts)
    speed = np.abs(np.einsum("...a,...ab,...b->...", N, g, N) + 1)
    return NormalCurve(
        s=np.array(ss),
        points=pts,
        geodesic_flag=bool(np.max(acc) < accel_tol),
        max_acceleration=float(np.max(acc)),
        unit_speed_defect=float(np.max(speed)),
    )


def leaf_points(fol: Foliation, level: float, spatial: np.ndarray, iters: int = 50, tol: float = 1e-13) -> np.ndarray:
    """Chart points on the leaf ``tau = level`` above the given spatial coordinates.

    The time coordinate is found by Newton iteration started at ``t = level``.
    """
    spatial = np.asarray(spatial, dtype=float)
    n = fol.n
    t = np.full(spatial.shape[:-1], float(level))
    for _ in range(iters):
        p = np.concatenate([spatial, t[..., None]], axis=-1)
        tj = fol.tau(Jet.variable(p, 1))
        step = (tj.value - level) / tj.partials[..., n]
        t = t - step
        if np.all(np.abs(step) < tol * np.maximum(1.0, np.abs(t))):
            break
    else:
        raise OutOfDomain(f"{fol.name}: could not locate leaf tau = {level}")
    return fol.metric.check_points(np.concatenate([spatial, t[..., None]], axis=-1))
