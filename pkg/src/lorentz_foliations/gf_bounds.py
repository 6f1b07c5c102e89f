"""Sampled estimate of the foliation invariant

    G = inf [ (1/n) div_L A - ric(N) - (2/n) |A|^2 ]

and the mean-curvature bounds it controls.  Infima are over a declared box,
never over the whole manifold; every report carries its box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundViolated, EmptySampleSet, NotGeodesicNormal, RegimeViolation
from .foliation_geometry import Foliation, shape_operator
from .identity_audit import fundamental_terms
from .riccati_flow import RiccatiParams, check_constant_curvature, focal_sweep, riccati_closed_form, riccati_integrate_batch
from .sampling import Sampler

# clause tolerances
GF_TOL = 1e-9
BOUND_TOL = 1e-6
GEODESIC_TOL = 1e-6
ZERO_B_TOL = 1e-9
ACCEL_TOL = 1e-8


def gf_integrand(fol: Foliation, p) -> np.ndarray:
    t = fundamental_terms(fol, p)
    return t.div_A / t.n - t.ric - 2.0 * t.A_norm_sq / t.n


def _points(fol: Foliation, sampler) -> np.ndarray:
    if isinstance(sampler, Sampler):
        pts = sampler.points(*fol.sample_box)
    else:
        pts = np.asarray(sampler, dtype=float).reshape(-1, fol.dim)
    if pts.shape[0] == 0:
        raise EmptySampleSet(f"{fol.name}: no sample points")
    return pts


@dataclass
class GfEstimate:
    value: float
    argmin: list
    sample_count: int
    integrand_min: float
    integrand_max: float
    integrand_mean: float
    a: float | None  # sqrt(-value) when value <= 0
    box: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def gf_estimate(fol: Foliation, sampler=Sampler()) -> GfEstimate:
    pts = _points(fol, sampler)
    vals = gf_integrand(fol, pts)
    if not np.all(np.isfinite(vals)):
        raise EmptySampleSet(f"{fol.name}: integrand not finite at some samples")
    k = int(np.argmin(vals))
    v = float(vals[k])
    lo, hi = fol.sample_box
    return GfEstimate(
        value=v,
        argmin=pts[k].tolist(),
        sample_count=int(pts.shape[0]),
        integrand_min=v,
        integrand_max=float(np.max(vals)),
        integrand_mean=float(np.mean(vals)),
        a=math.sqrt(-v) if v <= 0 else None,
        box={"lower": lo.tolist(), "upper": hi.tolist()},
    )


@dataclass
class BoundsReport:
    spacetime: str
    gf: float
    sup_H2: float
    sup_B2: float
    margin: float  # -gf - sup_H2
    clauses: dict
    witnesses: dict
    passed: bool
    estimate: GfEstimate = field(repr=False)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "estimate"}
        d["estimate"] = self.estimate.to_dict()
        return d


def check_bounds(fol: Foliation, sampler=Sampler(), strict: bool = True) -> BoundsReport:
    """Check  G <= 0,  sup H^2 <= -G  and both directions of  (G = 0  <=>  B = 0)."""
    pts = _points(fol, sampler)
    est = gf_estimate(fol, pts)
    ex = shape_operator(fol, pts)
    H2 = ex.H**2
    gf = est.value
    sup_H2 = float(np.max(H2))
    sup_B2 = float(np.max(ex.B_norm_sq))
    clauses = {
        "gf_nonpositive": gf <= GF_TOL,
        "mean_curvature_bound": sup_H2 <= -gf + BOUND_TOL,
        "zero_gf_implies_geodesic": (not gf > -GF_TOL) or sup_B2 < GEODESIC_TOL,
        "geodesic_implies_zero_gf": (not sup_B2 < ZERO_B_TOL) or abs(gf) < BOUND_TOL,
    }
    witnesses = {
        "argmin_gf": est.argmin,
        "argmax_H2": pts[int(np.argmax(H2))].tolist(),
        "argmax_B2": pts[int(np.argmax(ex.B_norm_sq))].tolist(),
    }
    rep = BoundsReport(
        spacetime=fol.name,
        gf=gf,
        sup_H2=sup_H2,
        sup_B2=sup_B2,
        margin=-gf - sup_H2,
        clauses=clauses,
        witnesses=witnesses,
        passed=all(clauses.values()),
        estimate=est,
    )
    if strict and not rep.passed:
        failed = [k for k, ok in clauses.items() if not ok]
        raise BoundViolated(f"{fol.name}: bound clauses failed: {failed}", rep)
    return rep


@dataclass
class GeodesicCCReport:
    spacetime: str
    c: float
    curvature_defect: float
    mode: str  # "bound" or "focal_sweep"
    sup_H2: float | None = None
    margin: float | None = None
    max_acceleration: float | None = None
    focal: dict | None = None
    passed: bool = False

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        if self.focal is not None:
            d["focal"] = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.focal.items()}
        return d


def geodesic_cc_check(fol: Foliation, sampler=Sampler(), h0_grid=None) -> GeodesicCCReport:
    """Constant curvature c with a geodesic normal flow forces c >= 0 and H^2 <= c.

    For c < 0 no such foliation exists; the report certifies instead that
    every initial curvature on ``h0_grid`` focuses in finite parameter.
    """
    pts = _points(fol, sampler)
    c, defect = check_constant_curvature(fol, pts)
    if c < -GF_TOL:
        grid = np.linspace(-10.0, 10.0, 41) if h0_grid is None else np.asarray(h0_grid, dtype=float)
        sweep = focal_sweep(-c, grid)
        return GeodesicCCReport(fol.name, c, defect, "focal_sweep", focal=sweep, passed=sweep["all_finite"])
    ex = shape_operator(fol, pts)
    acc = np.sqrt(np.abs(np.einsum("...a,...ab,...b->...", ex.A, fol.metric(pts), ex.A)))
    if np.max(acc) >= ACCEL_TOL:
        raise NotGeodesicNormal(f"{fol.name}: normal flow is accelerated (|A| up to {np.max(acc):.2e})")
    sup_H2 = float(np.max(ex.H**2))
    margin = c - sup_H2
    return GeodesicCCReport(
        fol.name, c, defect, "bound", sup_H2=sup_H2, margin=margin, max_acceleration=float(np.max(acc)), passed=margin >= -BOUND_TOL
    )


@dataclass
class ComparisonReport:
    a: float
    H_b: float
    blow_up: float | None
    s: np.ndarray
    gap: np.ndarray  # (F(s) - F(b)) - (s - b), F = G or L
    min_gap: float  # over s > b
    max_abs_gap: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "H_b": self.H_b,
            "blow_up": self.blow_up,
            "min_gap": self.min_gap,
            "max_abs_gap": self.max_abs_gap,
            "holds": self.holds,
            "samples": int(self.s.size),
        }


def comparison_witness(kappa: float, h0: float, b: float, s_max: float, margin: float = 0.0, n_out: int = 401) -> ComparisonReport:
    """Mean curvature along a normal geodesic with H' = H^2 + kappa + margin, H(0) = h0.

    With a = sqrt(-kappa), the functions G = -1/H (a = 0) and
    L = (1/2a) ln((H - a)/(H + a)) (a > 0) grow at least as fast as s from
    s = b onward, with equality when margin = 0.
    """
    if kappa > 0:
        raise RegimeViolation("comparison needs kappa <= 0")
    if margin < 0:
        raise RegimeViolation("margin must be nonnegative")
    if not 0 <= b < s_max:
        raise RegimeViolation("need 0 <= b < s_max")
    a = math.sqrt(-kappa)
    # H = -h with h the Riccati variable of riccati_flow
    params = RiccatiParams(kappa + margin, -h0)
    blow = riccati_closed_form(params).blow_up
    end = s_max if blow is None else min(s_max, blow - 1e-3)
    if end <= b:
        raise RegimeViolation("blow-up happens before b")
    s = np.linspace(b, end, n_out)
    s_eval = np.concatenate([[0.0], s]) if b > 0 else s
    num = riccati_integrate_batch(params.kappa, params.h0, s_eval)
    H = -num.h[-s.size :]
    H_b = float(H[0])
    if not H_b > a:
        raise RegimeViolation(f"need H(b) > a: H(b) = {H_b:.6g}, a = {a:.6g}")
    with np.errstate(all="ignore"):
        F = -1.0 / H if a == 0 else np.log((H - a) / (H + a)) / (2.0 * a)
    gap = (F - F[0]) - (s - b)
    return ComparisonReport(
        a=a,
        H_b=H_b,
        blow_up=blow,
        s=s,
        gap=gap,
        min_gap=float(np.min(gap[1:])),
        max_abs_gap=float(np.max(np.abs(gap))),
        holds=bool(np.min(gap) >= -1e-9),
    )
