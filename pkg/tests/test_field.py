import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublevel.field import (
    amgm_check,
    builtin_catalog,
    catalog_names,
    constant,
    fd_operators,
    grid_points,
    harmonic_probe,
    monomial_1d,
    parse_function_spec,
    quadratic,
    radial_extremal,
    sample,
    skew,
    sum_sq,
)

CATALOG = builtin_catalog()
coord = st.floats(-1.0, 1.0, allow_nan=False)


def _numeric_gradient(f, x, h=1e-6):
    g = np.zeros(f.dim)
    for i in range(f.dim):
        e = np.zeros(f.dim)
        e[i] = h
        g[i] = (f.value(x + e) - f.value(x - e)) / (2 * h)
    return g


def _numeric_laplacian(f, x, h=1e-4):
    total = 0.0
    for i in range(f.dim):
        e = np.zeros(f.dim)
        e[i] = h
        total += (f.value(x + e) - 2 * f.value(x) + f.value(x - e)) / h**2
    return total


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.id)
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_gradient_matches_central_differences(f, data):
    x = np.array(data.draw(st.lists(coord, min_size=f.dim, max_size=f.dim)))
    np.testing.assert_allclose(f.gradient(x), _numeric_gradient(f, x), atol=1e-6, rtol=1e-6)


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.id)
@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_laplacian_matches_second_differences(f, data):
    x = np.array(data.draw(st.lists(coord, min_size=f.dim, max_size=f.dim)))
    assert float(f.laplacian(x)) == pytest.approx(_numeric_laplacian(f, x), abs=1e-4)


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.id)
def test_laplacian_is_hessian_trace(f):
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, size=(20, f.dim))
    np.testing.assert_allclose(np.trace(f.hessian(x), axis1=-2, axis2=-1), f.laplacian(x), atol=1e-12)


def test_harmonic_probe_has_unit_laplacian_for_any_amplitude():
    x = np.random.default_rng(0).uniform(-2, 2, size=(50, 2))
    for A in (0.1, 1.0, 10.0):
        np.testing.assert_allclose(harmonic_probe(A, 3).laplacian(x), 1.0)
        assert _numeric_laplacian(harmonic_probe(A, 3), x[0], h=1e-3) == pytest.approx(1.0, abs=1e-3 * A + 1e-6)


def test_radial_extremal_values():
    f = radial_extremal(2)
    assert f.value(np.array([1.0, 1.0])) == pytest.approx(0.5)
    assert radial_extremal(3).value(np.array([1.0, 1.0, 1.0])) == pytest.approx(0.5)


def test_monomial_inverts_in_closed_form():
    # |{|x^2/2| <= t}| = 2 sqrt(2t)
    f = monomial_1d(2)
    t = 1e-3
    x = math.sqrt(2 * t)
    assert f.value(np.array([x])) == pytest.approx(t)


def test_quadratic_rejects_nonpositive():
    with pytest.raises(ValueError):
        quadratic(1.0, -1.0)


@pytest.mark.parametrize("f", CATALOG, ids=lambda f: f.id)
def test_spec_round_trip(f):
    g = parse_function_spec(f.id)
    x = np.random.default_rng(2).uniform(-1, 1, size=(10, f.dim))
    assert g.id == f.id
    np.testing.assert_array_equal(g.value(x), f.value(x))


def test_spec_errors():
    with pytest.raises(ValueError, match="unknown function family"):
        parse_function_spec("nope:a=1")
    with pytest.raises(ValueError, match="non-numeric"):
        parse_function_spec("quadratic:a=x")
    with pytest.raises(ValueError, match="has no key"):
        parse_function_spec("quadratic:1")


def test_spec_shift_and_scale():
    f = parse_function_spec("sum_sq:shift=-0.5,scale=2")
    assert f.value(np.array([0.5, 0.5])) == pytest.approx(2 * 0.5 - 0.5)


def test_catalog_names_cover_catalog():
    names = set(catalog_names())
    assert {f.id.split(":")[0] for f in CATALOG} <= names


def test_grid_points_shape_and_centres():
    pts = grid_points(((0, 1), (0, 2)), (4, 8))
    assert pts.shape == (4, 8, 2)
    assert pts[0, 0].tolist() == [0.125, 0.125]
    assert grid_points(((0, 1), (0, 1)), 4).shape == (4, 4, 2)


def test_fd_operators_exact_on_quadratics():
    g = sample(quadratic(1.0, 4.0), ((-1, 1), (-1, 1)), 17)
    grad, lap = fd_operators(g)
    np.testing.assert_allclose(lap, 10.0, atol=1e-9)
    np.testing.assert_allclose(grad, quadratic(1.0, 4.0).gradient(g.points()), atol=1e-9)


def test_sample_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        sample(sum_sq(), ((0, 1),), 8)


def test_constant_has_zero_derivatives():
    f = constant(2.0)
    assert float(f.value(np.zeros(2))) == 2.0
    assert np.all(f.gradient(np.ones((3, 2))) == 0)


def test_amgm_holds_on_convex_and_skips_saddles():
    pts = np.random.default_rng(3).uniform(-1, 1, size=(30, 2))
    assert amgm_check(quadratic(1.0, 4.0), pts).ok
    assert amgm_check(sum_sq(), pts).worst_slack == pytest.approx(0.0, abs=1e-12)
    rep = amgm_check(skew(), pts)
    assert rep.skipped == len(pts)
