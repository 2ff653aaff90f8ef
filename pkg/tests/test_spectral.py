import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homwell.spectral import (
    ModeTruncationWarning,
    OneForm,
    ScalarField,
    TwoForm,
    VectorField,
    exactness_test,
    exterior_derivative_0,
    exterior_derivative_1,
    grid_certificate,
    interior_product_2,
    lie_derivative,
    lie_derivative_cartan_parts,
    min_on_grid,
    pair,
    primitive_of,
    sup_norm,
)

TWO_PI = 2 * np.pi


def sin_profile(M=1):
    return ScalarField.from_modes({(0, 0): 2.0, (0, 1): -0.5j}, M)


def one_over_f(M=32):
    return ScalarField.from_function(lambda x, y: 1.0 / (np.sin(TWO_PI * y) + 2), M)


seeds = st.integers(0, 2**32 - 1)
modes = st.integers(0, 8)


def rand(M, seed, k=0):
    return ScalarField.random(M, np.random.default_rng([seed, k]))


def rand_form(M, seed, k=0):
    return OneForm(rand(M, seed, k), rand(M, seed, k + 1))


# -- ScalarField basics ------------------------------------------------------------------


def test_from_modes_builds_sine():
    f = sin_profile()
    ys = np.linspace(0, 1, 37)
    assert np.allclose(f(0.3, ys), np.sin(TWO_PI * ys) + 2, atol=1e-14)


@given(seeds, modes)
@settings(max_examples=30, deadline=None)
def test_hermitian_and_real(seed, M):
    g = rand(M, seed)
    c = g.coeffs
    assert np.allclose(c[::-1, ::-1], np.conj(c), atol=0)
    x, y = np.random.default_rng(seed).uniform(size=(2, 20))
    vals = np.asarray(g(x, y))
    assert vals.dtype.kind == "f"


def test_records_round_trip():
    g = rand(5, 1)
    h = ScalarField.from_records(g.to_records(), g.max_mode)
    assert np.array_equal(g.coeffs, h.coeffs)


def test_on_grid_matches_evaluate():
    g = rand(4, 2)
    n = 20
    t = np.arange(n) / n
    assert np.allclose(g.on_grid(n), g(t[:, None], t[None, :]), atol=1e-13)


def test_projection_of_reciprocal_is_accurate():
    g, res = ScalarField.from_function(lambda x, y: 1.0 / (np.sin(TWO_PI * y) + 2), 32, return_residual=True)
    assert res < 1e-12


def test_rejects_non_finite_coefficients():
    c = np.zeros((3, 3), complex)
    c[0, 0] = np.nan
    with pytest.raises(ValueError):
        ScalarField(c)


def test_product_is_exact_and_grows_modes():
    a, b = rand(3, 4), rand(5, 4, 1)
    c = a.multiply(b)
    assert c.max_mode == 8
    x, y = np.random.default_rng(0).uniform(size=(2, 50))
    assert np.allclose(c(x, y), a(x, y) * b(x, y), atol=1e-13)


def test_product_cap_warns():
    a = rand(3, 5)
    with pytest.warns(ModeTruncationWarning):
        c = a.multiply(a, cap=4)
    assert c.max_mode == 4


# -- operator examples -------------------------------------------------------------------


def test_d0_of_constant_is_zero():
    d = exterior_derivative_0(ScalarField.constant(3.0))
    assert sup_norm(d) == 0.0


def test_d0_of_sine():
    g = ScalarField.from_modes({(0, 1): -0.5j})
    d = exterior_derivative_0(g)
    ys = np.linspace(0, 1, 11)
    assert sup_norm(d.comp_dx) == 0.0
    assert np.allclose(d.comp_dy(0.0, ys), TWO_PI * np.cos(TWO_PI * ys), atol=1e-13)


def test_d1_of_dx_is_zero():
    assert sup_norm(exterior_derivative_1(OneForm(1.0, 0.0))) == 0.0


def test_d1_of_f_dx():
    f = sin_profile()
    w = exterior_derivative_1(OneForm(f, 0.0)).density
    ys = np.linspace(0, 1, 13)
    assert np.allclose(w(0.4, ys), -TWO_PI * np.cos(TWO_PI * ys), atol=1e-13)


def test_pair_examples():
    f = sin_profile()
    X = VectorField.product_flow(f)
    assert pair(OneForm(1.0, 0.0), X).allclose(f, 1e-15)
    assert sup_norm(pair(OneForm(0.0, 1.0), X)) == 0.0
    p = pair(OneForm(one_over_f(), 0.0), VectorField.product_flow(sin_profile(32)))
    assert sup_norm(p - 1.0) < 1e-12


def test_interior_product_examples():
    f = sin_profile()
    vol = TwoForm(ScalarField.constant(1.0))
    out = interior_product_2(VectorField.product_flow(f), vol)
    assert out.comp_dy.allclose(f, 1e-15) and sup_norm(out.comp_dx) == 0.0
    out = interior_product_2(VectorField(0.0, 1.0), vol)
    assert out.comp_dx.allclose(ScalarField.constant(-1.0)) and sup_norm(out.comp_dy) == 0.0
    out = interior_product_2(VectorField(rand(3, 1), rand(3, 2)), TwoForm(ScalarField.zeros()))
    assert sup_norm(out) == 0.0


def test_lie_derivative_examples():
    f = sin_profile()
    X = VectorField.product_flow(f)
    L = lie_derivative(X, OneForm(1.0, 0.0))
    assert sup_norm(L.comp_dx) == 0.0 and L.comp_dy.allclose(f.dy(), 1e-14)
    assert sup_norm(lie_derivative(X, OneForm(0.0, 1.0))) == 0.0
    assert sup_norm(lie_derivative(VectorField(1.0, 0.0), OneForm(1.0, 0.0))) == 0.0


def test_exactness_examples():
    assert not exactness_test(OneForm(1.0, 0.0)).is_exact
    g = rand(6, 3)
    ok, L = exactness_test(exterior_derivative_0(g))
    assert ok and L.allclose(g - g.mean(), 1e-12)
    f = sin_profile()
    ok, L = exactness_test(OneForm(0.0, f.dy()))
    assert ok and L.allclose(f - f.mean(), 1e-14)


def test_exactness_requires_positive_tol():
    with pytest.raises(ValueError):
        exactness_test(OneForm(1.0, 0.0), tol=0.0)


def test_min_on_grid_examples():
    assert abs(min_on_grid(sin_profile(), 256) - 1.0) < 1e-6
    assert min_on_grid(ScalarField.zeros(), 16) == 0.0
    assert abs(min_on_grid(ScalarField.from_modes({(1, 0): 0.5}), 256) + 1.0) < 1e-6


def test_min_on_grid_refuses_coarse_grid():
    with pytest.raises(ValueError, match="4\\*\\(max_mode\\+1\\)"):
        min_on_grid(rand(10, 0), 40)


def test_grid_certificate_is_a_lower_bound():
    g = rand(5, 9) + 3.0
    gmin, lb = grid_certificate(g, 64)
    fine = float(np.min(g.on_grid(1024)))
    assert lb <= fine <= gmin + 1e-12


# -- invariants --------------------------------------------------------------------------


@given(seeds, modes)
@settings(max_examples=50, deadline=None)
def test_d_squared_is_zero(seed, M):
    g = rand(M, seed)
    assert sup_norm(exterior_derivative_1(exterior_derivative_0(g))) <= 1e-10 * max(1.0, g.l1_norm())


@given(seeds, modes, st.integers(0, 6))
@settings(max_examples=50, deadline=None)
def test_cartan_matches_closed_form_for_product_flows(seed, M, Mf):
    # f d_x th1 dx + (th1 f' + f d_x th2) dy
    f = ScalarField(rand(Mf, seed, 7).x_average().coeffs) + 3.0
    th = rand_form(M, seed)
    L = lie_derivative(VectorField.product_flow(f), th)
    closed = OneForm(
        f.multiply(th.comp_dx.dx()),
        th.comp_dx.multiply(f.dy()) + f.multiply(th.comp_dy.dx()),
    )
    assert L.allclose(closed, 1e-10)


@given(seeds, modes)
@settings(max_examples=50, deadline=None)
def test_exactness_iff_closed_and_zero_periods(seed, M):
    rng = np.random.default_rng(seed)
    g = rand(M, seed)
    a, b = rng.choice([0.0, 0.0, rng.normal()], size=2)
    th = exterior_derivative_0(g) + OneForm(a, b)
    res = exactness_test(th)
    assert res.is_exact == (a == 0 and b == 0)
    if res.is_exact:
        assert exterior_derivative_0(res.primitive).allclose(th, 1e-10)


@given(seeds, modes, st.integers(0, 4))
@settings(max_examples=50, deadline=None)
def test_lie_and_contraction_exactness_agree(seed, M, MX):
    X = VectorField(rand(MX, seed, 3), rand(MX, seed, 4))
    # mix exact and non-exact directions
    th = rand_form(M, seed) if seed % 2 else exterior_derivative_0(rand(M, seed)) + OneForm(1.0, 0.0)
    contracted, exact_part = lie_derivative_cartan_parts(X, th)
    assert exactness_test(exact_part).is_exact
    assert exactness_test(lie_derivative(X, th)).is_exact == exactness_test(contracted).is_exact


@given(seeds, modes, st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_pair_is_bilinear(seed, M, a):
    X = VectorField(rand(M, seed, 5), rand(M, seed, 6))
    t1, t2 = rand_form(M, seed), rand_form(M, seed, 2)
    lhs = pair(t1 * a + t2, X)
    rhs = pair(t1, X) * a + pair(t2, X)
    assert lhs.allclose(rhs, 1e-12)


def test_primitive_reproduces_gradient():
    g = rand(12, 11)
    L = primitive_of(exterior_derivative_0(g))
    assert exterior_derivative_0(L).allclose(exterior_derivative_0(g), 1e-10)


def test_no_warnings_for_moderate_products():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rand(20, 0).multiply(rand(20, 1))
