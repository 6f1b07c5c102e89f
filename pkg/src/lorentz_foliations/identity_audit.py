"""Pointwise audits of the divergence identities of a foliation and of the
componentwise transport law for the second fundamental form.

Both identities are parameterized by sign choices so that the choice which
actually closes under this package's conventions can be found from data
(``calibrate_signature`` / ``calibrate_shape_signature``) instead of assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .curvature import riemann_from_christoffel
from .errors import NoUniqueSignature
from .foliation_geometry import Foliation, LocalJets, acceleration_field, full_divergence, local_jets


@dataclass(frozen=True)
class SignSignature:
    """Signs of the |B|^2, n ric(N) and |A|^2 terms of the divergence identity."""

    sigma_B: int
    sigma_ric: int
    sigma_A: int

    def __post_init__(self):
        for s in (self.sigma_B, self.sigma_ric, self.sigma_A):
            if s not in (1, -1):
                raise ValueError(f"signature entries must be +1 or -1, got {s}")

    def as_tuple(self) -> tuple:
        return (self.sigma_B, self.sigma_ric, self.sigma_A)

    @property
    def label(self) -> str:
        return ",".join(f"{s:+d}" for s in self.as_tuple())

    @classmethod
    def all(cls) -> list["SignSignature"]:
        return [cls(*s) for s in itertools.product((1, -1), repeat=3)]


# reference sign pattern from the literature, and the one derived from the Raychaudhuri computation
REFERENCE_SIGNATURE = SignSignature(-1, 1, 1)
DERIVED_SIGNATURE = SignSignature(1, -1, -1)


@dataclass(frozen=True)
class ShapeSignature:
    """Signs in  d x_i(e_k) + ... = s_xx x_i x_k + s_hh (h h)_ik - s_R R_NiNk - (D_N h)_ik."""

    sigma_xx: int
    sigma_hh: int
    sigma_R: int

    def __post_init__(self):
        for s in self.as_tuple():
            if s not in (1, -1):
                raise ValueError(f"signature entries must be +1 or -1, got {s}")

    def as_tuple(self) -> tuple:
        return (self.sigma_xx, self.sigma_hh, self.sigma_R)

    @property
    def label(self) -> str:
        return ",".join(f"{s:+d}" for s in self.as_tuple())

    @classmethod
    def all(cls) -> list["ShapeSignature"]:
        return [cls(*s) for s in itertools.product((1, -1), repeat=3)]


REFERENCE_SHAPE_SIGNATURE = ShapeSignature(1, -1, 1)
DERIVED_SHAPE_SIGNATURE = ShapeSignature(-1, 1, 1)


@dataclass(frozen=True)
class FundamentalTerms:
    div_A: np.ndarray
    N_H: np.ndarray
    B_norm_sq: np.ndarray
    ric: np.ndarray
    A_norm_sq: np.ndarray
    n: int

    def residual(self, sig: SignSignature) -> np.ndarray:
        n = self.n
        rhs = n * self.N_H + sig.sigma_B * self.B_norm_sq + sig.sigma_ric * n * self.ric + sig.sigma_A * self.A_norm_sq
        return self.div_A - rhs


@dataclass
class IdentityReport:
    spacetimes: list
    points: dict
    residuals: dict  # signature label -> {spacetime: max |residual|}
    winner: str | None
    passing: list
    reference_signature: str
    reference_residuals: dict
    tolerance: float
    kind: str = "fundamental"
    notes: list = field(default_factory=list)

    def max_residual(self, label: str) -> float:
        return max(self.residuals[label].values())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "spacetimes": list(self.spacetimes),
            "points": dict(self.points),
            "residuals": {k: dict(v) for k, v in self.residuals.items()},
            "winner": self.winner,
            "passing": list(self.passing),
            "reference_signature": self.reference_signature,
            "reference_residuals": dict(self.reference_residuals),
            "tolerance": self.tolerance,
            "notes": list(self.notes),
        }


def _divergence_on_leaf(lj: LocalJets, V: jets.Jet) -> np.ndarray:
    """sum_i g(nabla_{e_i} V, e_i) for a field jet V of order >= 1."""
    DV = V.truncate(1).gradient().value + np.einsum("...abc,...c->...ab", lj.gamma.value, V.value)
    e = lj.frame.value[..., : lj.n, :]
    return np.einsum("...ia,...ab,...bc,...ic->...", e, lj.g.value, DV, e)


def _riemann_low(lj: LocalJets) -> np.ndarray:
    return riemann_from_christoffel(lj.gamma.truncate(1), lj.g.value)


def fundamental_terms(fol: Foliation, p) -> FundamentalTerms:
    lj = local_jets(fol, p, 1)
    g = lj.g.value
    N = lj.N.value
    A = lj.acceleration(1)
    H = lj.mean_curvature(1)
    h = lj.second_fundamental_form(0).value
    low = _riemann_low(lj)
    ric_NN = np.einsum("...ad,...axyd,...x,...y->...", np.linalg.inv(g), low, N, N)
    return FundamentalTerms(
        div_A=_divergence_on_leaf(lj, A),
        N_H=np.einsum("...a,...a->...", H.partials, N),
        B_norm_sq=np.sum(h * h, axis=(-2, -1)),
        ric=-ric_NN / lj.n,
        A_norm_sq=np.einsum("...a,...ab,...b->...", A.value, g, A.value),
        n=lj.n,
    )


def fundamental_residual(fol: Foliation, p, sig: SignSignature = DERIVED_SIGNATURE) -> np.ndarray:
    return fundamental_terms(fol, p).residual(sig)


def split_residual(fol: Foliation, p) -> np.ndarray:
    """Div A - div_L A - |A|^2 (sign-free)."""
    terms = fundamental_terms(fol, p)
    total = full_divergence(fol.metric, acceleration_field(fol), p)
    return total - terms.div_A - terms.A_norm_sq


@dataclass(frozen=True)
class ShapeTerms:
    lhs: np.ndarray  # (dx_i + x_j omega_ji)(e_k)
    xx: np.ndarray
    hh: np.ndarray
    R_NiNk: np.ndarray
    DNh: np.ndarray

    def residual(self, sig: ShapeSignature) -> np.ndarray:
        rhs = sig.sigma_xx * self.xx + sig.sigma_hh * self.hh - sig.sigma_R * self.R_NiNk - self.DNh
        return self.lhs - rhs


def shape_terms(fol: Foliation, p) -> ShapeTerms:
    lj = local_jets(fol, p, 1)
    n = lj.n
    g = lj.g.truncate(1)
    E1 = lj.frame.truncate(1)
    E = E1.value
    Es = E[..., :n, :]
    N = lj.N.value
    omega = lj.omega()  # [A, B, C] = g(nabla_{e_C} e_A, e_B)
    om_sp = omega[..., :n, :n, :]
    x = jets.einsum("...a,...ab,...ib->...i", lj.acceleration(1), g, E1[..., :n, :])
    dx = np.einsum("...iu,...ku->...ik", x.partials, Es)
    lhs = dx + np.einsum("...j,...jik->...ik", x.value, om_sp[..., :n])
    hj = lj.second_fundamental_form(1)
    h = hj.value
    om_N = om_sp[..., n]  # omega_AB(N) for spatial A, B
    DNh = (
        np.einsum("...iku,...u->...ik", hj.partials, N)
        + np.einsum("...jk,...ji->...ik", h, om_N)
        + np.einsum("...ij,...jk->...ik", h, om_N)
    )
    low = _riemann_low(lj)
    R = np.einsum("...abcd,...a,...ib,...c,...kd->...ik", low, N, Es, N, Es)
    return ShapeTerms(
        lhs=lhs,
        xx=np.einsum("...i,...k->...ik", x.value, x.value),
        hh=np.einsum("...ij,...jk->...ik", h, h),
        R_NiNk=R,
        DNh=DNh,
    )


def shape_transport_matrix(fol: Foliation, p, sig: ShapeSignature = DERIVED_SHAPE_SIGNATURE) -> np.ndarray:
    return shape_terms(fol, p).residual(sig)


def shape_transport_residual(fol: Foliation, p, i: int, k: int, sig_R: int = 1, signature: ShapeSignature | None = None):
    """Residual for the (i, k) entry.  Without ``signature`` the reference form with curvature sign ``sig_R`` is used."""
    if signature is None:
        signature = ShapeSignature(REFERENCE_SHAPE_SIGNATURE.sigma_xx, REFERENCE_SHAPE_SIGNATURE.sigma_hh, sig_R)
    return shape_transport_matrix(fol, p, signature)[..., i, k]


def _calibrate(witnesses, candidates, evaluate, reference, tol, kind) -> IdentityReport:
    names, points, table = [], {}, {c.label: {} for c in candidates}
    for fol, pts in witnesses:
        pts = np.asarray(pts, dtype=float)
        names.append(fol.name)
        points[fol.name] = int(pts.reshape(-1, fol.dim).shape[0])
        terms = evaluate(fol, pts)
        for c in candidates:
            table[c.label][fol.name] = float(np.max(np.abs(terms.residual(c))))
    passing = [c.label for c in candidates if max(table[c.label].values()) < tol]
    report = IdentityReport(
        spacetimes=names,
        points=points,
        residuals=table,
        winner=passing[0] if len(passing) == 1 else None,
        passing=passing,
        reference_signature=reference.label,
        reference_residuals=dict(table[reference.label]),
        tolerance=tol,
        kind=kind,
    )
    if len(passing) != 1:
        what = "no signature" if not passing else f"signatures {passing} tie"
        raise NoUniqueSignature(f"{kind} calibration: {what} below {tol:g}", report)
    return report


def calibrate_signature(witnesses, tol: float = 1e-6) -> IdentityReport:
    """``witnesses`` is a list of (foliation, points).  Exactly one of the eight signatures must close."""
    return _calibrate(witnesses, SignSignature.all(), fundamental_terms, REFERENCE_SIGNATURE, tol, "fundamental")


def calibrate_shape_signature(witnesses, tol: float = 1e-5) -> IdentityReport:
    return _calibrate(witnesses, ShapeSignature.all(), shape_terms, REFERENCE_SHAPE_SIGNATURE, tol, "shape_transport")


def parse_signature(label: str) -> SignSignature:
    parts = [int(s) for s in label.split(",")]
    return SignSignature(*parts)
