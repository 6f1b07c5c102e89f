import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_foliations import zoo
from lorentz_foliations.errors import BoundViolated, EmptySampleSet, NotGeodesicNormal, RegimeViolation
from lorentz_foliations.gf_bounds import check_bounds, comparison_witness, geodesic_cc_check, gf_estimate, gf_integrand
from lorentz_foliations.sampling import Sampler, sample_box

from conftest import leaf_box_points


def test_integrand_examples(built):
    _, fol = built["minkowski"]
    assert np.all(gf_integrand(fol, leaf_box_points(fol, 20)) == 0.0)
    _, fol = built["de_sitter_flat_slicing"]
    np.testing.assert_allclose(gf_integrand(fol, leaf_box_points(fol, 20)), -1.0, atol=1e-12)
    _, fol = built["robertson_walker"]
    p = leaf_box_points(fol, 50)
    np.testing.assert_allclose(gf_integrand(fol, p), -0.2 / (1 + 0.1 * p[:, 2] ** 2), atol=1e-12)
    _, fol = built["static_lapse_torus"]
    vals = gf_integrand(fol, leaf_box_points(fol, 200))
    assert np.all(np.isfinite(vals)) and np.ptp(vals) > 0


def test_estimates(built):
    _, fol = built["minkowski"]
    assert gf_estimate(fol).value == 0.0
    _, fol = built["de_sitter_flat_slicing"]
    est = gf_estimate(fol)
    assert est.value == pytest.approx(-1.0, abs=1e-9) and est.a == pytest.approx(1.0, abs=1e-9)
    _, fol = built["robertson_walker"]
    # a grid with a node at t = 0 hits the infimum exactly
    est = gf_estimate(fol, Sampler("grid", 9**3))
    assert est.value == pytest.approx(-0.2, abs=1e-12) and abs(est.argmin[2]) < 1e-12
    assert est.sample_count == 729 and est.box["lower"][2] == -1.0
    assert est.integrand_min <= est.integrand_mean <= est.integrand_max


@pytest.mark.parametrize("name", ["robertson_walker", "static_lapse_torus", "minkowski_tilted"])
def test_estimate_never_rises_under_refinement(built, name):
    _, fol = built[name]
    sobol = [gf_estimate(fol, Sampler("sobol", 2**k, seed=3)).value for k in range(4, 11)]
    assert all(b <= a for a, b in zip(sobol, sobol[1:]))
    grid = [gf_estimate(fol, Sampler("grid", k**3)).value for k in (3, 5, 9, 17)]
    assert all(b <= a for a, b in zip(grid, grid[1:]))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.integers(1, 64))
def test_estimate_bounds_every_retained_sample(seed, count):
    _, fol = zoo.zoo_build("static_lapse_torus")
    pts = sample_box(*fol.sample_box, count, "uniform", seed)
    est = gf_estimate(fol, pts)
    assert np.all(est.value <= gf_integrand(fol, pts))


def test_empty_sample_set(built):
    _, fol = built["minkowski"]
    with pytest.raises(EmptySampleSet):
        gf_estimate(fol, np.zeros((0, 3)))
    with pytest.raises(EmptySampleSet):
        gf_estimate(fol, Sampler("sobol", 0))


@pytest.mark.parametrize("name", ["minkowski", "minkowski_tilted", "robertson_walker", "de_sitter_flat_slicing", "slab_counterexample"])
def test_bounds_hold(built, name):
    _, fol = built[name]
    rep = check_bounds(fol)
    assert rep.passed and all(rep.clauses.values())


def test_bound_examples(built):
    rep = check_bounds(built["minkowski"][1])
    assert rep.gf == 0.0 and rep.sup_B2 == 0.0
    rep = check_bounds(built["de_sitter_flat_slicing"][1])
    assert rep.sup_H2 == pytest.approx(1.0, abs=1e-9) and rep.gf == pytest.approx(-1.0, abs=1e-9)
    assert abs(rep.margin) < 1e-9
    rep = check_bounds(built["robertson_walker"][1], Sampler("grid", 9**3))
    assert rep.sup_H2 == pytest.approx((0.2 / 1.1) ** 2, rel=1e-12)
    assert rep.sup_H2 <= -rep.gf + 1e-6


@pytest.mark.parametrize(
    "name, failing",
    [
        # flat hyperboloids in a truncated cone: not timelike complete, G = 0 but H = 1/s
        ("minkowski_hyperboloids", {"mean_curvature_bound", "zero_gf_implies_geodesic"}),
        # static Poincare slices: totally geodesic, accelerated normals on an incomplete chart give G = 1/2 > 0
        ("anti_de_sitter_chart", {"gf_nonpositive", "mean_curvature_bound", "geodesic_implies_zero_gf"}),
        # totally geodesic leaves whose acceleration keeps G strictly negative
        ("static_lapse_torus", {"geodesic_implies_zero_gf"}),
    ],
)
def test_bounds_outside_hypotheses_are_reported(built, name, failing):
    _, fol = built[name]
    with pytest.raises(BoundViolated) as info:
        check_bounds(fol)
    rep = info.value.report
    assert {k for k, ok in rep.clauses.items() if not ok} == failing
    assert check_bounds(fol, strict=False).passed is False


def test_geodesic_constant_curvature(built):
    rep = geodesic_cc_check(built["minkowski"][1])
    assert rep.mode == "bound" and rep.sup_H2 == 0.0 and rep.passed
    rep = geodesic_cc_check(built["de_sitter_flat_slicing"][1])
    assert rep.c == pytest.approx(1.0, abs=1e-9) and rep.sup_H2 == pytest.approx(1.0, abs=1e-9)
    assert abs(rep.margin) < 1e-9 and rep.passed
    rep = geodesic_cc_check(built["anti_de_sitter_chart"][1])
    assert rep.mode == "focal_sweep" and rep.passed
    assert rep.c == pytest.approx(-1.0, abs=1e-9)
    assert np.all(np.isfinite(rep.focal["numeric"])) and len(rep.focal["h0"]) == 41
    with pytest.raises(NotGeodesicNormal):
        geodesic_cc_check(built["minkowski_tilted"][1])


def test_comparison_equality_cases():
    rep = comparison_witness(0.0, 1.0, 0.0, 0.9)
    assert rep.a == 0.0 and rep.max_abs_gap < 1e-9 and rep.holds
    rep = comparison_witness(-1.0, 2.0, 0.0, 0.5)
    assert rep.a == 1.0 and rep.max_abs_gap < 1e-9 and rep.holds
    rep = comparison_witness(-1.0, 2.0, 0.2, 0.5)
    assert rep.max_abs_gap < 1e-9


@pytest.mark.parametrize("kappa, h0", [(0.0, 1.0), (-1.0, 2.0), (-0.25, 3.0)])
def test_comparison_strict_with_margin(kappa, h0):
    rep = comparison_witness(kappa, h0, 0.0, 0.3, margin=0.1)
    assert rep.holds and rep.min_gap > 0


def test_comparison_regimes():
    with pytest.raises(RegimeViolation):
        comparison_witness(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(RegimeViolation):
        comparison_witness(-1.0, 0.5, 0.0, 1.0)  # H(b) below a
    with pytest.raises(RegimeViolation):
        comparison_witness(0.0, 1.0, 0.0, 1.0, margin=-0.1)
    with pytest.raises(RegimeViolation):
        comparison_witness(0.0, 1.0, 2.0, 1.0)
