import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_foliations import zoo
from lorentz_foliations.chart_metrics import MetricField, eval_metric, lorentz_signature_ok, metric_partials, metric_partials_fd
from lorentz_foliations.errors import InvalidParams, OutOfDomain, SignatureViolation
from lorentz_foliations import jets

from conftest import ZOO_NAMES, chart_points


@pytest.mark.parametrize("name", ZOO_NAMES)
def test_signature_invariant_at_seeded_points(built, name):
    metric, _ = built[name]
    p = chart_points(metric, 100, seed=3)
    g = eval_metric(metric, p)
    np.testing.assert_allclose(g, np.swapaxes(g, -1, -2), atol=0)
    w = np.linalg.eigvalsh(g)
    assert np.all(w[:, 0] < 0) and np.all(w[:, 1:] > 0)


@pytest.mark.parametrize("name", ZOO_NAMES)
def test_partials_match_central_differences(built, name):
    metric, _ = built[name]
    p = chart_points(metric, 40, seed=5, shrink=0.02)
    exact = metric_partials(metric, p)
    fd = metric_partials_fd(metric, p, step=1e-5)
    scale = np.maximum(np.abs(exact), 1.0)
    assert np.max(np.abs(exact - fd) / scale) < 1e-6
    np.testing.assert_allclose(exact, np.swapaxes(exact, -1, -2), atol=0)


def test_minkowski_is_constant_diagonal(built):
    metric, _ = built["minkowski"]
    p = chart_points(metric, 10)
    np.testing.assert_array_equal(metric(p), np.broadcast_to(np.diag([1.0, 1.0, -1.0]), (10, 3, 3)))
    np.testing.assert_array_equal(metric_partials(metric, p), 0.0)


def test_robertson_walker_substitution_and_time_derivative(built):
    metric, _ = built["robertson_walker"]
    p = np.array([0.3, 1.2, 1.0])
    np.testing.assert_allclose(metric(p), np.diag([1.1**2, 1.1**2, -1.0]), rtol=1e-15)
    t = np.linspace(-2.5, 2.5, 11)
    pts = np.stack([np.zeros_like(t), np.zeros_like(t), t], axis=-1)
    a, da = 1 + 0.1 * t**2, 0.2 * t
    np.testing.assert_allclose(metric_partials(metric, pts)[:, 2, 0, 0], 2 * a * da, rtol=1e-14, atol=1e-15)


def test_slab_substitution_and_flat_region():
    metric, _ = zoo.zoo_build("slab_counterexample", psi_amplitude=0.4)
    fphi = zoo._bump_primitive(1.0)
    fpsi = zoo._bump_primitive(0.4)
    g = metric(np.array([1.0, 2.0, 2.0]))
    np.testing.assert_allclose(g, np.diag([np.exp(2 * fphi[0](2.0)), np.exp(2 * fpsi[0](2.0)), -1.0]), rtol=1e-14)
    z = np.linspace(0.0, 1.0, 21)
    assert np.all(zoo.slab_phi_prime(z) == 0.0)
    assert np.all(zoo.slab_phi_prime(z, 0.4) == 0.0)
    assert zoo.slab_phi_prime(2.0) > 0.0


def test_static_lapse_partial_is_chain_rule(built):
    metric, _ = built["static_lapse_torus"]
    x = np.linspace(0.1, 6.0, 13)
    y = np.linspace(0.5, 5.0, 13)
    pts = np.stack([x, y, np.zeros_like(x)], axis=-1)
    phi = 2.0 + 0.5 * np.sin(x) + 0.3 * np.cos(y)
    d = metric_partials(metric, pts)
    np.testing.assert_allclose(d[:, 0, 2, 2], -2 * phi * 0.5 * np.cos(x), rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(d[:, 1, 2, 2], -2 * phi * -0.3 * np.sin(y), rtol=1e-13, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(-9, 9), st.integers(-3, 3), st.integers(-3, 3))
def test_periodic_axes_repeat(x, y, t, kx, ky):
    metric, _ = zoo.zoo_build("static_lapse_torus")
    p = np.array([x, y, t])
    q = p + np.array([kx * 2 * np.pi, ky * 2 * np.pi, 0.0])
    np.testing.assert_allclose(metric(q), metric(p), atol=1e-12)


def test_de_sitter_is_robertson_walker_with_exponential_scale():
    metric, _ = zoo.zoo_build("de_sitter_flat_slicing", c=4.0)
    t = np.linspace(-1, 1, 5)
    pts = np.stack([t * 0, t * 0, t], axis=-1)
    np.testing.assert_allclose(metric(pts)[:, 0, 0], np.exp(4 * t), rtol=1e-14)


def test_zero_tilt_reduces_to_minkowski(built):
    metric0, fol0 = zoo.zoo_build("minkowski_tilted", eps=0.0)
    metric, fol = built["minkowski"]
    p = chart_points(metric, 20)
    np.testing.assert_array_equal(metric0(p), metric(p))
    np.testing.assert_array_equal(fol0(p), fol(p))


def test_out_of_domain_and_bad_shapes(built):
    metric, _ = built["robertson_walker"]
    with pytest.raises(OutOfDomain):
        metric(np.array([0.0, 0.0, 3.5]))
    with pytest.raises(OutOfDomain):
        metric(np.array([0.0, 0.0]))
    with pytest.raises(OutOfDomain):
        metric(np.array([np.nan, 0.0, 0.0]))
    assert not metric.contains(np.array([0.0, 0.0, -3.0]))
    assert metric.contains(np.array([100.0, 0.0, 0.0]))  # periodic axis


def test_signature_violation_is_raised():
    def bad(X):
        return jets.matrix([[1.0 + 0.0 * X[..., 0], 0.0 * X[..., 0]], [0.0 * X[..., 0], X[..., 1]]])

    metric = MetricField("degenerate", 2, (-1.0, -1.0), (1.0, 1.0), bad)
    with pytest.raises(SignatureViolation):
        eval_metric(metric, np.array([0.0, 0.5]))
    assert not lorentz_signature_ok(np.diag([1.0, 0.0]))
    assert lorentz_signature_ok(np.diag([1.0, -1.0]))


@pytest.mark.parametrize(
    "name, params",
    [
        ("minkowski_tilted", {"eps": 1.0}),
        ("de_sitter_flat_slicing", {"c": -1.0}),
        ("anti_de_sitter_chart", {"c": 0.5}),
        ("static_lapse_torus", {"phi0": 0.7}),
        ("robertson_walker", {"a_coeffs": [0.5, 0.0, -0.1]}),
        ("minkowski", {"n": 0}),
        ("minkowski", {"bogus": 1}),
    ],
)
def test_invalid_params(name, params):
    with pytest.raises(InvalidParams):
        zoo.zoo_build(name, **params)


def test_zoo_listing_and_aliases():
    assert len(zoo.zoo_list()) == 8
    assert [e.name for e in zoo.zoo_list("de_sitter")] == ["de_sitter_flat_slicing"]
    assert zoo.zoo_list("no_such_thing") == []
    assert zoo.resolve_name("slab") == "slab_counterexample"
    metric, fol = zoo.zoo_build(zoo.SpacetimeSpec("anti_de_sitter", {"c": -2.0}))
    assert metric.name == fol.name == "anti_de_sitter_chart"
    with pytest.raises(InvalidParams):
        zoo.zoo_build("nowhere")
