"""Scalar Riccati flow of principal curvatures along normal geodesics.

Here ``h`` is a principal curvature in the convention where it obeys

    dh/ds = -(h^2 + kappa),      kappa = g(R(v, N)N, v),

i.e. ``h`` is minus an eigenvalue of the shape operator returned by
:func:`~lorentz_foliations.foliation_geometry.shape_operator` (that matrix
itself evolves by ``dh/ds = h^2 + kappa``).  Blow-up of ``h`` at finite
``s`` is a focal point of the normal congruence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import constant_curvature_defect, riemann_coordinate, sectional_constant
from .errors import NotConstantCurvature, NotGeodesicNormal
from .foliation_geometry import Foliation, leaf_points, normal_curve, shape_operator, unit_normal
from .sampling import sample_box

KAPPA_ZERO = 1e-14
# below |w| = W_FLOOR (|h| above 1/W_FLOOR) accuracy is no longer tracked in h units
W_FLOOR = 1e-4


@dataclass(frozen=True)
class RiccatiParams:
    kappa: float
    h0: float

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and math.isfinite(self.h0)):
            raise ValueError("kappa and h0 must be finite")


@dataclass(frozen=True)
class RiccatiSolution:
    params: RiccatiParams
    branch: str  # tan | rational | tanh_interior | coth_exterior | equilibrium
    blow_up: float | None
    _phase: float = field(default=0.0, repr=False)

    def evaluate(self, s):
        return self._eval(np.asarray(s, dtype=float), derivative=False)

    def derivative(self, s):
        return self._eval(np.asarray(s, dtype=float), derivative=True)

    def _eval(self, s, derivative):
        k, h0 = self.params.kappa, self.params.h0
        with np.errstate(all="ignore"):
            if self.branch == "equilibrium":
                out = np.zeros_like(s) if derivative else np.full_like(s, h0)
            elif self.branch == "tan":
                # r tan(phase - r s) via the addition formula; stays accurate as kappa -> 0
                r = math.sqrt(k)
                T = np.tan(r * s)
                D = r + h0 * T
                out = -(r * r) * (1 + T * T) * (k + h0 * h0) / (D * D) if derivative else r * (h0 - r * T) / D
            elif self.branch == "rational":
                d = 1.0 + h0 * s
                out = -(h0 * h0) / (d * d) if derivative else h0 / d
            else:
                # tanh and coth branches share a tanh(phase + a s) / a coth(...) addition form
                a = math.sqrt(-k)
                T = np.tanh(a * s)
                D = a + h0 * T
                out = (a * a) * (1 - T * T) * (a * a - h0 * h0) / (D * D) if derivative else a * (h0 + a * T) / D
        if self.blow_up is not None:
            out = np.where(s < self.blow_up, out, np.nan)
        return out


def riccati_closed_form(params: RiccatiParams) -> RiccatiSolution:
    k, h0 = params.kappa, params.h0
    if k > KAPPA_ZERO:
        r = math.sqrt(k)
        ph = math.atan(h0 / r)
        # pi/2 + atan(h0/r) without cancellation for h0 << -r
        return RiccatiSolution(params, "tan", math.atan2(r, -h0) / r, ph)
    if k >= -KAPPA_ZERO:
        if h0 == 0.0:
            return RiccatiSolution(params, "equilibrium", None)
        blow = -1.0 / h0 if h0 < 0 else None
        # subnormal h0 overflows: the blow-up is beyond any representable parameter
        return RiccatiSolution(params, "rational", blow if blow is not None and math.isfinite(blow) else None)
    a = math.sqrt(-k)
    if abs(h0) == a:
        return RiccatiSolution(params, "equilibrium", None)
    if abs(h0) < a:
        return RiccatiSolution(params, "tanh_interior", None, math.atanh(h0 / a))
    ph = math.atanh(a / h0)  # arcoth(h0 / a)
    return RiccatiSolution(params, "coth_exterior", -ph / a if h0 < -a else None, ph)


# ---------------------------------------------------------------------------
# numerical integration


@dataclass
class RiccatiNumeric:
    s: np.ndarray
    h: np.ndarray  # NaN after blow-up
    blow_up: np.ndarray  # NaN where the solution survives to s_max
    steps: np.ndarray


def _rk4(f, u, dt, k):
    k1 = f(u, k)
    k2 = f(u + 0.5 * dt * k1, k)
    k3 = f(u + 0.5 * dt * k2, k)
    k4 = f(u + dt * k3, k)
    return u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _f_direct(h, k):
    return -(h * h + k)


def _f_recip(w, k):
    # w = 1/h
    return 1.0 + k * w * w


def riccati_integrate_batch(kappa, h0, s_eval, tol: float = 1e-15, h_max: float = 1e-2, max_steps: int = 2_000_000):
    """Integrate many (kappa, h0) cells at once with adaptive RK4 (step doubling).

    Near ``|h| > 2`` the reciprocal ``w = 1/h`` is integrated instead; a sign
    change of ``w`` marks the blow-up, located by Newton iteration on the last
    step.  ``s_eval`` must be increasing with ``s_eval[0] >= 0``; every cell
    lands exactly on each evaluation point.
    """
    kappa, h0 = np.broadcast_arrays(np.asarray(kappa, dtype=float), np.asarray(h0, dtype=float))
    shape = kappa.shape
    # extended precision: near a blow-up, h errors scale like h^2 times the
    # error in the blow-up parameter, so double rounding alone is not enough
    ld = np.longdouble
    kappa = kappa.ravel().astype(ld)
    u = h0.ravel().astype(ld)
    m = u.size
    s_eval = np.asarray(s_eval, dtype=float)
    s_eval_ld = s_eval.astype(ld)
    out = np.full((m, s_eval.size), np.nan)
    blow = np.full(m, np.nan)
    recip = np.zeros(m, dtype=bool)
    s = np.zeros(m, dtype=ld)
    dt = np.full(m, min(h_max, 1e-3), dtype=ld)
    idx = np.zeros(m, dtype=int)
    active = np.ones(m, dtype=bool)
    steps = np.zeros(m, dtype=int)

    def record(sel):
        # cells sitting on their next evaluation point
        while True:
            hit = sel & active & (idx < s_eval.size)
            hit &= np.abs(s - s_eval_ld[np.minimum(idx, s_eval.size - 1)]) <= 1e-14 * np.maximum(1.0, s)
            if not np.any(hit):
                return
            with np.errstate(divide="ignore"):
                vals = np.where(recip, 1.0 / u, u)
            out[hit, idx[hit]] = vals[hit]
            idx[hit] += 1
            active[hit & (idx >= s_eval.size)] = False

    record(np.ones(m, dtype=bool))
    total = 0
    while np.any(active):
        total += 1
        if total > max_steps:
            raise RuntimeError("Riccati integration did not finish")
        a = np.flatnonzero(active)
        target = s_eval_ld[idx[a]]
        step = np.minimum(dt[a], target - s[a])
        ua, ka, ra = u[a], kappa[a], recip[a]
        f = lambda v, k, r=ra: np.where(r, _f_recip(v, k), _f_direct(v, k))
        full = _rk4(f, ua, step, ka)
        half = _rk4(f, ua, 0.5 * step, ka)
        two = _rk4(f, half, 0.5 * step, ka)
        err = np.abs(two - full) / 15.0
        # error measured in h units: d h = d w / w^2 in reciprocal mode
        with np.errstate(all="ignore"):
            scale = np.where(ra, np.clip(two * two, W_FLOOR**2, 1.0), 1.0)
            err_h = err / scale
        ok = (err_h <= tol) | (step <= 1e-12)
        new = two + (two - full) / 15.0
        crossed = ok & ra & (np.sign(new) != np.sign(ua)) & (ua != 0.0)
        if np.any(crossed):
            for j in np.flatnonzero(crossed):
                cell = a[j]
                blow[cell] = float(s[cell] + _newton_zero(ua[j], ka[j], step[j]))
                active[cell] = False
            ok &= ~crossed
        acc = a[ok]
        u[acc] = new[ok]
        s[acc] = s[acc] + step[ok]
        steps[acc] += 1
        with np.errstate(divide="ignore", over="ignore"):
            fac = np.clip(0.9 * (tol / np.maximum(err_h, 1e-300)) ** 0.2, 0.2, 4.0)
        dt[a] = np.minimum(np.where(ok, np.maximum(dt[a], step) * fac, step * fac), h_max)
        # representation switches
        big = acc[~recip[acc] & (np.abs(u[acc]) > 2.0)]
        u[big] = 1.0 / u[big]
        recip[big] = True
        small = acc[recip[acc] & (np.abs(u[acc]) > 2.0)]
        u[small] = 1.0 / u[small]
        recip[small] = False
        # direct-mode runaway (should not happen, but never loop forever)
        runaway = acc[~recip[acc] & ~np.isfinite(u[acc])]
        blow[runaway] = s[runaway].astype(float)
        active[runaway] = False
        record(np.isin(np.arange(m), acc))
    return RiccatiNumeric(s_eval, out.reshape(shape + (s_eval.size,)), blow.reshape(shape), steps.reshape(shape))


def _newton_zero(w0, k, dt_max):
    """Parameter offset at which w = 1/h reaches zero, starting from w0."""
    t = -w0 / (1.0 + k * w0 * w0)
    for _ in range(50):
        w = _rk4(_f_recip, w0, t, k)
        dw = _f_recip(w, k)
        delta = w / dw
        t -= delta
        if abs(delta) < 1e-15:
            break
    return t


def riccati_integrate(params: RiccatiParams, s_max: float, tol: float = 1e-15, n_out: int = 201) -> RiccatiNumeric:
    if not s_max > 0:
        raise ValueError("s_max must be positive")
    s_eval = np.linspace(0.0, s_max, n_out)
    return riccati_integrate_batch(params.kappa, params.h0, s_eval, tol)


# ---------------------------------------------------------------------------
# propagation along normal geodesics


@dataclass
class PropagationReport:
    s: np.ndarray
    propagated: np.ndarray  # shape-operator eigenvalues predicted by the flow, (len(s), n)
    measured: np.ndarray
    kappa: np.ndarray  # radial curvature along each eigen-direction
    max_deviation: float
    spread: float  # max over s of (max - min) of the measured spectrum
    max_acceleration: float


def _radial_curvatures(fol, p, coeffs):
    """kappa along the frame directions sum_i coeffs[i, k] e_i at p, one per column k."""
    from .foliation_geometry import adapted_frame

    g, low = riemann_coordinate(fol.metric, p)
    E = adapted_frame(fol, p).e
    n = fol.n
    V = np.einsum("...ia,...ik->...ka", E[..., :n, :], coeffs)
    N = E[..., n, :]
    return np.einsum("...abcd,...ka,...b,...c,...kd->...k", low, V, N, N, V)


def propagate_spectrum(fol: Foliation, p0, s_max: float, ds: float = 1e-2, accel_tol: float = 1e-8) -> PropagationReport:
    """Propagate the principal curvatures at ``p0`` along the normal geodesic and compare with measurement."""
    p0 = fol.metric.check_points(p0)
    ex0 = shape_operator(fol, p0)
    if np.sqrt(abs(np.einsum("a,ab,b->", ex0.A, fol.metric(p0), ex0.A))) >= accel_tol:
        raise NotGeodesicNormal(f"{fol.name}: normal field is accelerated at the start point")
    lam, vecs = np.linalg.eigh(ex0.h)
    nsteps = max(1, int(math.ceil(s_max / ds - 1e-12)))
    dt = s_max / nsteps

    def rhs(state):
        p, y = state
        kap = _radial_curvatures(fol, p, vecs)
        return unit_normal(fol, p), -(y * y + kap), kap

    p, y = p0.copy(), -lam.copy()
    ss, ys, ks, pts = [0.0], [y.copy()], [], [p.copy()]
    for k in range(nsteps):
        k1p, k1y, kap = rhs((p, y))
        ks.append(kap)
        k2p, k2y, _ = rhs((p + 0.5 * dt * k1p, y + 0.5 * dt * k1y))
        k3p, k3y, _ = rhs((p + 0.5 * dt * k2p, y + 0.5 * dt * k2y))
        k4p, k4y, _ = rhs((p + dt * k3p, y + dt * k3y))
        p = fol.metric.check_points(p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p))
        y = y + dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        ss.append((k + 1) * dt)
        ys.append(y.copy())
        pts.append(p.copy())
    ks.append(_radial_curvatures(fol, p, vecs))
    pts = np.array(pts)
    ex = shape_operator(fol, pts)
    acc = np.sqrt(np.abs(np.einsum("...a,...ab,...b->...", ex.A, fol.metric(pts), ex.A)))
    if np.max(acc) >= accel_tol:
        raise NotGeodesicNormal(f"{fol.name}: normal field is accelerated along the curve ({np.max(acc):.2e})")
    measured = np.linalg.eigvalsh(ex.h)
    propagated = np.sort(-np.array(ys), axis=-1)
    return PropagationReport(
        s=np.array(ss),
        propagated=propagated,
        measured=measured,
        kappa=np.array(ks),
        max_deviation=float(np.max(np.abs(propagated - measured))),
        spread=float(np.max(measured[:, -1] - measured[:, 0])),
        max_acceleration=float(np.max(acc)),
    )


@dataclass
class UmbilicityReport:
    holds: bool
    initial_umb_dev: float
    max_umb_dev: float
    curvature_constant: float
    curvature_defect: float
    max_acceleration: float
    vacuous: bool


def check_constant_curvature(fol: Foliation, points, tol: float = 1e-8) -> tuple[float, float]:
    """(c, defect) with a common c estimated from the points; raises NotConstantCurvature."""
    points = np.asarray(points, dtype=float).reshape(-1, fol.dim)
    cs = sectional_constant(fol.metric, points)
    c = float(np.mean(cs))
    defect = constant_curvature_defect(fol.metric, points, c)
    if defect >= tol:
        raise NotConstantCurvature(f"{fol.name}: curvature deviates from a constant-curvature tensor by {defect:.3e}")
    return c, defect


def umbilicity_propagation_check(
    fol: Foliation, p0, s_max: float, tol: float = 1e-8, ds: float = 1e-2, domain_samples: int = 64, seed: int = 0
) -> UmbilicityReport:
    """Does umbilicity at ``p0`` persist along the normal geodesic?

    Preconditions: constant ambient curvature (checked on the curve and on
    ``domain_samples`` seeded points of the foliation's sample box) and a
    geodesic normal field along the curve.
    """
    curve = normal_curve(fol, p0, s_max, ds)
    check_pts = curve.points
    if domain_samples:
        check_pts = np.concatenate([check_pts, sample_box(*fol.sample_box, domain_samples, "uniform", seed)])
    c, defect = check_constant_curvature(fol, check_pts)
    if not curve.geodesic_flag:
        raise NotGeodesicNormal(f"{fol.name}: normal curve is accelerated ({curve.max_acceleration:.2e})")
    dev = shape_operator(fol, curve.points).umb_dev
    vacuous = bool(dev[0] >= tol)
    return UmbilicityReport(
        holds=bool(vacuous or np.all(dev < tol)),
        initial_umb_dev=float(dev[0]),
        max_umb_dev=float(np.max(dev)),
        curvature_constant=c,
        curvature_defect=defect,
        max_acceleration=curve.max_acceleration,
        vacuous=vacuous,
    )


@dataclass
class LeafScan:
    level: float
    max_umb_dev: float
    max_h_norm: float
    min_H: float
    max_H: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def spatial_grid(fol: Foliation, nodes: int) -> np.ndarray:
    lo, hi = fol.sample_box
    n = fol.n
    axes = []
    for ax in range(n):
        if ax in fol.metric.periodic:
            axes.append(lo[ax] + np.arange(nodes) * fol.metric.periodic[ax] / nodes)
        else:
            axes.append(np.linspace(lo[ax], hi[ax], nodes))
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


def umbilicity_scan(fol: Foliation, leaf_values, nodes: int = 16) -> list[LeafScan]:
    grid = spatial_grid(fol, nodes)
    out = []
    for level in leaf_values:
        pts = leaf_points(fol, float(level), grid)
        ex = shape_operator(fol, pts)
        out.append(
            LeafScan(
                level=float(level),
                max_umb_dev=float(np.max(ex.umb_dev)),
                max_h_norm=float(np.sqrt(np.max(ex.B_norm_sq))),
                min_H=float(np.min(ex.H)),
                max_H=float(np.max(ex.H)),
            )
        )
    return out


def focal_sweep(kappa: float, h0_values, s_max: float | None = None) -> dict:
    """Closed-form and numerical blow-up parameters for each initial value."""
    h0_values = np.asarray(h0_values, dtype=float)
    closed = np.array([riccati_closed_form(RiccatiParams(kappa, float(h))).blow_up or np.nan for h in h0_values])
    if s_max is None:
        s_max = float(np.nanmax(closed)) * 1.5 + 1.0 if np.any(np.isfinite(closed)) else 10.0
    num = riccati_integrate_batch(kappa, h0_values, np.array([s_max]))
    return {
        "kappa": float(kappa),
        "h0": h0_values,
        "closed_form": closed,
        "numeric": num.blow_up,
        "s_max": s_max,
        "all_finite": bool(np.all(np.isfinite(closed)) and np.all(np.isfinite(num.blow_up))),
    }
