"""Witness spacetimes with their canonical foliations.

Every chart puts time last.  Spatial axes flagged periodic turn the
leaves into flat tori of side ``2 pi`` so that leaf integrals make sense.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from . import jets
from .chart_metrics import MetricField
from .errors import InvalidParams
from .foliation_geometry import Foliation

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpacetimeSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ZooEntry:
    name: str
    description: str
    foliation: str
    domain: str
    defaults: dict
    builder: Callable = field(repr=False, compare=False)


def _zero(X):
    """A zero carrying X's jet structure, so constant entries still come back as jets."""
    return X[..., 0] * 0.0


def _diag(X, entries):
    z = _zero(X)
    d = len(entries)
    rows = [[entries[i] + z if i == j else z for j in range(d)] for i in range(d)]
    return jets.matrix(rows)


def _periodic(n):
    return {ax: TWO_PI for ax in range(n)}


def _params(defaults: dict, given: dict, name: str) -> dict:
    unknown = set(given) - set(defaults)
    if unknown:
        raise InvalidParams(f"{name}: unknown parameters {sorted(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


def _int_param(value, name, lo=1) -> int:
    if int(value) != value or value < lo:
        raise InvalidParams(f"{name} must be an integer >= {lo}, got {value}")
    return int(value)


def _time_slices(name, metric, t_lo, t_hi, spatial_lo=0.0, spatial_hi=TWO_PI):
    n = metric.n
    return Foliation(
        name,
        metric,
        tau=lambda X: X[..., n],
        sample_lower=(spatial_lo,) * n + (t_lo,),
        sample_upper=(spatial_hi,) * n + (t_hi,),
    )


# ---------------------------------------------------------------------------
# builders


def build_minkowski(n=2):
    n = _int_param(n, "n")
    metric = MetricField(
        "minkowski",
        n + 1,
        (0.0,) * n + (-10.0,),
        (TWO_PI,) * n + (10.0,),
        lambda X: _diag(X, [1.0] * n + [-1.0]),
        _periodic(n),
    )
    return metric, _time_slices("minkowski", metric, -1.0, 1.0)


def build_minkowski_tilted(eps=0.5, n=2):
    n = _int_param(n, "n")
    if not abs(eps) < 1:
        raise InvalidParams(f"tilt must satisfy |eps| < 1, got {eps}")
    metric, _ = build_minkowski(n)
    fol = Foliation(
        "minkowski_tilted",
        metric,
        tau=lambda X: X[..., n] - eps * jets.sin(X[..., 0]),
        sample_lower=(0.0,) * n + (-1.0,),
        sample_upper=(TWO_PI,) * n + (1.0,),
    )
    return metric, fol


def build_minkowski_hyperboloids(n=2):
    n = _int_param(n, "n")
    metric = MetricField(
        "minkowski_hyperboloids",
        n + 1,
        (-1.0,) * n + (0.5,),
        (1.0,) * n + (10.0,),
        lambda X: _diag(X, [1.0] * n + [-1.0]),
    )

    def tau(X):
        r2 = X[..., n] * X[..., n]
        for i in range(n):
            r2 = r2 - X[..., i] * X[..., i]
        return jets.sqrt(r2)

    fol = Foliation(
        "minkowski_hyperboloids",
        metric,
        tau=tau,
        sample_lower=(-0.5,) * n + (1.5,),
        sample_upper=(0.5,) * n + (3.0,),
    )
    return metric, fol


def _scale_factor_metric(name, n, a_fn, t_lo, t_hi):
    def g(X):
        a = a_fn(X[..., n])
        a2 = a * a
        return _diag(X, [a2] * n + [-1.0])

    return MetricField(name, n + 1, (0.0,) * n + (t_lo,), (TWO_PI,) * n + (t_hi,), g, _periodic(n))


def _poly_horner(coeffs):
    def a(t):
        out = 0.0 * t + coeffs[-1]
        for c in coeffs[-2::-1]:
            out = out * t + c
        return out

    return a


def build_robertson_walker(a_coeffs=(1.0, 0.0, 0.1), n=2, t_min=-3.0, t_max=3.0):
    """Scale factor a(t) given by ascending polynomial coefficients."""
    n = _int_param(n, "n")
    coeffs = [float(c) for c in a_coeffs]
    if not coeffs or not t_min < t_max:
        raise InvalidParams("need at least one coefficient and t_min < t_max")
    poly = Polynomial(coeffs)
    crit = [r.real for r in poly.deriv().roots() if abs(r.imag) < 1e-12 and t_min < r.real < t_max] if len(coeffs) > 1 else []
    if min(poly(np.array([t_min, t_max] + crit))) <= 0:
        raise InvalidParams("scale factor must stay positive on the chart")
    metric = _scale_factor_metric("robertson_walker", n, _poly_horner(coeffs), t_min, t_max)
    return metric, _time_slices("robertson_walker", metric, -1.0, 1.0)


def build_de_sitter_flat_slicing(c=1.0, n=2):
    n = _int_param(n, "n")
    if not c > 0:
        raise InvalidParams(f"de Sitter needs c > 0, got {c}")
    k = np.sqrt(c)
    metric = _scale_factor_metric("de_sitter_flat_slicing", n, lambda t: jets.exp(k * t), -5.0, 5.0)
    return metric, _time_slices("de_sitter_flat_slicing", metric, -1.0, 1.0)


def build_anti_de_sitter_chart(c=-1.0, n=2):
    """Poincare chart (l/z)^2 (dx^2 + dz^2 - dt^2) with coordinates (x.., z, t), l = 1/sqrt(-c)."""
    n = _int_param(n, "n")
    if not c < 0:
        raise InvalidParams(f"anti-de Sitter needs c < 0, got {c}")
    ell2 = -1.0 / c

    def g(X):
        w = ell2 / (X[..., n - 1] * X[..., n - 1])
        return _diag(X, [w] * n + [-w])

    lower = (-5.0,) * (n - 1) + (0.2, -10.0)
    upper = (5.0,) * (n - 1) + (5.0, 10.0)
    metric = MetricField("anti_de_sitter_chart", n + 1, lower, upper, g)
    fol = Foliation(
        "anti_de_sitter_chart",
        metric,
        tau=lambda X: X[..., n],
        sample_lower=(-1.0,) * (n - 1) + (0.5, -1.0),
        sample_upper=(1.0,) * (n - 1) + (2.0, 1.0),
    )
    return metric, fol


# slab bump: phi'(z) = A (q / q_max)^4 with q = (z - z0)(z1 - z) on [z0, z1]
SLAB_Z0, SLAB_Z1 = 1.5, 3.0


def _bump_primitive(amplitude):
    """phi and its first three derivatives as piecewise-polynomial numpy callables.

    Polynomials are kept in the centred variable u = (z - zc) / w on [-1, 1]
    (there phi' = A (1 - u^2)^4); expanding in raw z loses about 1e-10 to
    cancellation.
    """
    zc, w = 0.5 * (SLAB_Z0 + SLAB_Z1), 0.5 * (SLAB_Z1 - SLAB_Z0)
    dphi = amplitude * Polynomial([1.0, 0.0, -1.0]) ** 4
    prim = w * dphi.integ(lbnd=-1.0)
    total = prim(1.0)
    polys = [prim, dphi, dphi.deriv() / w, dphi.deriv(2) / w**2]

    def make(k):
        def f(z):
            z = np.asarray(z, dtype=float)
            inside = (z >= SLAB_Z0) & (z <= SLAB_Z1)
            base = np.where(z > SLAB_Z1, total, 0.0) if k == 0 else np.zeros_like(z)
            return np.where(inside, polys[k]((z - zc) / w), base)

        return f

    return [make(k) for k in range(4)]


def build_slab_counterexample(phi_amplitude=1.0, psi_amplitude=0.0):
    """g = exp(2 phi(z)) dx^2 + exp(2 psi(z)) dy^2 - dz^2 with coordinates (x, y, z)."""
    fphi = _bump_primitive(phi_amplitude)
    fpsi = _bump_primitive(psi_amplitude)

    def g(X):
        z = X[..., 2]
        phi = jets.apply(z, *fphi)
        psi = jets.apply(z, *fpsi)
        return _diag(X, [jets.exp(2.0 * phi), jets.exp(2.0 * psi), -1.0])

    metric = MetricField("slab_counterexample", 3, (0.0, 0.0, -3.0), (TWO_PI, TWO_PI, 5.0), g, _periodic(2))
    fol = Foliation(
        "slab_counterexample",
        metric,
        tau=lambda X: X[..., 2],
        sample_lower=(0.0, 0.0, -2.0),
        sample_upper=(TWO_PI, TWO_PI, 4.0),
    )
    return metric, fol


def slab_phi_prime(z, amplitude=1.0):
    return _bump_primitive(amplitude)[1](z)


def build_static_lapse_torus(phi0=2.0, ax=0.5, ay=0.3):
    """g = dx^2 + dy^2 - lapse(x, y)^2 dt^2 with lapse = phi0 + ax sin x + ay cos y."""
    if not phi0 > abs(ax) + abs(ay):
        raise InvalidParams("lapse must stay positive: need phi0 > |ax| + |ay|")

    def g(X):
        lapse = phi0 + ax * jets.sin(X[..., 0]) + ay * jets.cos(X[..., 1])
        return _diag(X, [1.0, 1.0, -(lapse * lapse)])

    metric = MetricField("static_lapse_torus", 3, (0.0, 0.0, -10.0), (TWO_PI, TWO_PI, 10.0), g, _periodic(2))
    return metric, _time_slices("static_lapse_torus", metric, -1.0, 1.0)


ZOO = {
    e.name: e
    for e in [
        ZooEntry("minkowski", "flat space, spatial torus", "t = const", "x in T^n, t in (-10, 10)", {"n": 2}, build_minkowski),
        ZooEntry(
            "minkowski_tilted",
            "flat space, tilted slices",
            "t - eps sin(x0) = const",
            "x in T^n, t in (-10, 10), |eps| < 1",
            {"eps": 0.5, "n": 2},
            build_minkowski_tilted,
        ),
        ZooEntry(
            "minkowski_hyperboloids",
            "flat space, hyperboloids in the future cone",
            "sqrt(t^2 - |x|^2) = const",
            "x in (-1, 1)^n, t in (0.5, 10), t > |x|",
            {"n": 2},
            build_minkowski_hyperboloids,
        ),
        ZooEntry(
            "robertson_walker",
            "-dt^2 + a(t)^2 |dx|^2, a polynomial (ascending coefficients)",
            "t = const",
            "x in T^n, t in (t_min, t_max), a > 0",
            {"a_coeffs": [1.0, 0.0, 0.1], "n": 2, "t_min": -3.0, "t_max": 3.0},
            build_robertson_walker,
        ),
        ZooEntry(
            "de_sitter_flat_slicing",
            "constant curvature c > 0, a(t) = exp(sqrt(c) t)",
            "t = const",
            "x in T^n, t in (-5, 5), c > 0",
            {"c": 1.0, "n": 2},
            build_de_sitter_flat_slicing,
        ),
        ZooEntry(
            "anti_de_sitter_chart",
            "constant curvature c < 0, Poincare chart",
            "t = const (static, accelerated)",
            "x in (-5, 5)^(n-1), z in (0.2, 5), t in (-10, 10), c < 0",
            {"c": -1.0, "n": 2},
            build_anti_de_sitter_chart,
        ),
        ZooEntry(
            "slab_counterexample",
            "exp(2phi(z))dx^2 + exp(2psi(z))dy^2 - dz^2, bump on [1.5, 3]",
            "z = const",
            "x, y in T^2, z in (-3, 5)",
            {"phi_amplitude": 1.0, "psi_amplitude": 0.0},
            build_slab_counterexample,
        ),
        ZooEntry(
            "static_lapse_torus",
            "dx^2 + dy^2 - lapse^2 dt^2, lapse = phi0 + ax sin x + ay cos y",
            "t = const (static, accelerated)",
            "x, y in T^2, t in (-10, 10), phi0 > |ax| + |ay|",
            {"phi0": 2.0, "ax": 0.5, "ay": 0.3},
            build_static_lapse_torus,
        ),
    ]
}

ALIASES = {"slab": "slab_counterexample", "de_sitter": "de_sitter_flat_slicing", "anti_de_sitter": "anti_de_sitter_chart"}


def resolve_name(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in ZOO:
        raise InvalidParams(f"unknown spacetime {name!r}; known: {sorted(ZOO)}")
    return name


def zoo_build(spec: SpacetimeSpec | str, **params) -> tuple[MetricField, Foliation]:
    if isinstance(spec, str):
        spec = SpacetimeSpec(spec, params)
    entry = ZOO[resolve_name(spec.name)]
    return entry.builder(**_params(entry.defaults, dict(spec.params), entry.name))


def zoo_list(pattern: str | None = None) -> list[ZooEntry]:
    """Entries whose name (or an alias of it) starts with ``pattern``."""
    if pattern is None:
        return list(ZOO.values())
    names = {name for name in ZOO if name.startswith(pattern)}
    names |= {target for alias, target in ALIASES.items() if alias.startswith(pattern)}
    return [e for name, e in ZOO.items() if name in names]
