import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homwell.adapted import (
    InfeasibilityCertificate,
    check_adapted,
    check_homwell0_impossible,
    check_homwell_condition,
    condition_form,
    obstruction_residual,
    orbit_integral,
    search_adapted,
    sin_plus_two,
)
from homwell.spectral import (
    OneForm,
    ScalarField,
    VectorField,
    directional_derivative,
    exterior_derivative_0,
    pair,
    sup_norm,
)

TWO_PI = 2 * np.pi


def shear(M=1):
    return VectorField.product_flow(sin_plus_two(M))


def power_of_f(p, M):
    return ScalarField.from_function(lambda x, y: (np.sin(TWO_PI * y) + 2) ** p, M)


# -- check_adapted -----------------------------------------------------------------------


@pytest.mark.parametrize("which", ["one", "f", "inv_f"])
def test_torus_positive_examples(which):
    M = 32
    t1 = {"one": ScalarField.constant(1.0), "f": sin_plus_two(M), "inv_f": power_of_f(-1, M)}[which]
    rep = check_adapted(shear(M), OneForm(t1, 0.0))
    assert rep.strongly_adapted and rep.weakly_adapted
    assert rep.pairing_lower_bound > 0
    assert rep.lagrangian_primitive is not None


def test_constant_flow_is_strongly_geodesible():
    rep = check_adapted(VectorField(1.0, 0.0), OneForm(1.0, 0.0))
    assert rep.strongly_geodesible_for_theta and rep.geodesible_for_theta


def test_sign_flip_is_not_adapted():
    rep = check_adapted(shear(), OneForm(-1.0, 0.0))
    assert not rep.strongly_adapted and not rep.weakly_adapted
    assert rep.pairing_min == pytest.approx(-3.0, abs=1e-12)


def test_non_exact_lie_derivative_is_rejected():
    # X = d/dx, theta = dx + f(y) dy: L_X theta = 0, exact
    X = VectorField(1.0, 0.0)
    theta = OneForm(1.0, sin_plus_two())
    assert check_adapted(X, theta).strongly_adapted
    # X = d/dy, theta = f(y) dx: L_X theta = f' dx has zero periods but d(f' dx) = -f'' dx^dy != 0
    rep = check_adapted(VectorField(0.0, 1.0), OneForm(sin_plus_two(), 1.0))
    assert rep.closedness_residual > 1
    assert not rep.strongly_adapted


def test_tol_must_be_positive():
    with pytest.raises(ValueError):
        check_adapted(shear(), OneForm(1.0, 0.0), tol=0)


rand_seed = st.integers(0, 2**31)


@given(rand_seed, st.integers(0, 4), st.floats(-1.5, 3.0))
@settings(max_examples=40, deadline=None)
def test_report_invariants(seed, M, shift):
    rng = np.random.default_rng(seed)
    X = VectorField(ScalarField.random(M, rng) + 1.5, ScalarField.random(M, rng) * 0.3)
    theta = OneForm(ScalarField.random(M, rng) * 0.3 + shift, ScalarField.random(M, rng) * 0.3)
    rep = check_adapted(X, theta)
    assert (not rep.strongly_adapted) or rep.weakly_adapted
    assert (not rep.strongly_geodesible_for_theta) or rep.geodesible_for_theta
    exact = rep.lagrangian_primitive is not None
    assert rep.strongly_adapted == (rep.pairing_min > rep.tol and exact)


# -- homogeneous-well conditions ---------------------------------------------------------


@pytest.mark.parametrize("k", [1, 3, 4, -2])
def test_spherical_remark(k):
    M = 64
    theta = OneForm(power_of_f((k + 2) / (k - 2), M), 0.0)
    rep = check_homwell_condition(shear(M), theta, ScalarField.constant(1.0), k, "spherical", tol=1e-8)
    assert rep.residual_inf_norm <= 1e-8
    assert rep.satisfied and rep.open_question


@pytest.mark.parametrize("k", [1.0, 2.0, -3.5, 7.0])
def test_kronecker_spherical_residual_vanishes(k):
    X = VectorField(1.0, np.sqrt(2))
    theta = OneForm(2.0, 0.7)
    rep = check_homwell_condition(X, theta, None, k, "spherical")
    assert rep.residual_inf_norm == 0.0


def test_homwell2_residual_is_eight_pi():
    rep = check_homwell_condition(shear(), OneForm(1.0, 0.0), ScalarField.constant(1.0), 2, "homwell2")
    assert not rep.satisfied
    assert rep.residual_inf_norm == pytest.approx(8 * np.pi, abs=1e-6)


def test_homwell_k_rejects_zero():
    with pytest.raises(ValueError):
        check_homwell_condition(shear(), OneForm(1.0, 0.0), ScalarField.constant(1.0), 0, "homwell_k")


def test_general_condition_reduces_to_spherical_when_r_constant():
    X = shear(8)
    th = OneForm(ScalarField.random(3, np.random.default_rng(1)) + 2, ScalarField.random(3, np.random.default_rng(2)))
    R = ScalarField.constant(1.0)
    k = 3.0
    gen = condition_form("homwell_k", X, th, R, k)
    sph = condition_form("spherical", X, th, R, k)
    # general: k L + (1 - k/2) d(theta.Y); spherical: 2k L - (k-2) d(theta.Y) = 2 * general
    assert (sph - gen * 2.0).allclose(OneForm.zeros(), 1e-9)


@given(st.integers(0, 2**31), st.floats(0.5, 5.0))
@settings(max_examples=25, deadline=None)
def test_satisfied_iff_residual_within_tol(seed, k):
    rng = np.random.default_rng(seed)
    th = OneForm(ScalarField.random(2, rng) + 2, 0.0)
    tol = float(10 ** rng.uniform(-3, 2))
    rep = check_homwell_condition(shear(2), th, None, k, "spherical", tol=tol)
    assert rep.satisfied == (rep.residual_inf_norm <= tol)


# -- search ------------------------------------------------------------------------------


def test_search_recovers_constant():
    res = search_adapted(shear(4), 4)
    assert res.status == "found"
    assert res.pairing_min > 0 and res.equality_residual <= 1e-8
    assert res.theta.comp_dx.allclose(ScalarField.constant(1.0), 1e-10)


def test_search_constant_flow_gives_dx():
    res = search_adapted(VectorField(1.0, 0.0), 3)
    assert res.status == "found"
    assert res.theta.allclose(OneForm(1.0, 0.0), 1e-10)


def test_search_joint_gives_certificate():
    res = search_adapted(shear(4), 4, {"homwell2_joint"})
    assert res.status == "infeasible"
    c = res.certificate
    assert c.kind == "torus_obstruction"
    assert c.lower_bound == pytest.approx(TWO_PI, rel=1e-12)
    assert abs(np.cos(TWO_PI * c.y_witness)) == pytest.approx(1.0, abs=1e-12)


def test_search_joint_constant_profile_is_feasible():
    res = search_adapted(VectorField.product_flow(ScalarField.constant(2.0)), 3, {"homwell2_joint"})
    assert res.status == "found"


def test_search_joint_non_product_is_inconclusive():
    res = search_adapted(VectorField(1.0, 0.5), 2, {"homwell2_joint"})
    assert res.status == "inconclusive"


def test_search_rejects_unknown_constraint():
    with pytest.raises(ValueError):
        search_adapted(shear(), 2, {"bogus"})


def test_certificate_needs_positive_bound():
    with pytest.raises(ValueError):
        InfeasibilityCertificate("torus_obstruction", 0.0, 0.0, "")


# -- obstruction identity ----------------------------------------------------------------


def test_obstruction_example_dx():
    res = obstruction_residual(sin_plus_two(), OneForm(1.0, 0.0), ScalarField.zeros())
    ys = np.linspace(0, 1, 17)
    assert np.allclose(res.predicted.evaluate(0.0, ys), TWO_PI * np.cos(TWO_PI * ys), atol=1e-12)
    assert res.difference <= 1e-10


def test_obstruction_zero_mean_theta():
    theta = OneForm(ScalarField.from_modes({(1, 0): -0.5j}), 0.0)
    r = ScalarField.random(5, np.random.default_rng(4))
    res = obstruction_residual(sin_plus_two(), theta, r)
    assert sup_norm(res.integrated) <= 1e-10


def test_obstruction_constant_f():
    rng = np.random.default_rng(5)
    theta = OneForm(ScalarField.random(4, rng), ScalarField.random(4, rng))
    res = obstruction_residual(ScalarField.constant(2.0), theta, ScalarField.random(4, rng))
    assert sup_norm(res.integrated) <= 1e-10


def test_obstruction_identity_random():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        M = int(rng.integers(1, 17))
        f = ScalarField(ScalarField.random(3, rng).x_average().coeffs) + 3.0
        theta = OneForm(ScalarField.random(M, rng), ScalarField.random(M, rng))
        worst = max(worst, obstruction_residual(f, theta, ScalarField.random(M, rng)).difference)
    assert worst <= 1e-10


def test_obstruction_requires_y_only_profile():
    with pytest.raises(ValueError):
        obstruction_residual(ScalarField.from_modes({(1, 0): 0.5}), OneForm(1.0, 0.0), ScalarField.zeros())


# -- orbit integrals and HomWell_0 -------------------------------------------------------


@pytest.mark.parametrize("y0", [0.0, 0.1, 0.25, 0.8])
def test_orbit_integral_of_pairing_is_one(y0):
    X = shear(4)
    assert orbit_integral(X, pair(OneForm(1.0, 0.0), X), y0) == pytest.approx(1.0, abs=1e-12)


def test_orbit_integral_matches_quadrature():
    X = shear(4)
    g = ScalarField.random(5, np.random.default_rng(8)) + 4
    y0 = 0.37
    fy = np.sin(TWO_PI * y0) + 2
    T = 1 / fy
    t = np.linspace(0, T, 4001)
    # along the orbit x(t) = f(y0) t
    vals = g(fy * t, y0)
    quad = np.trapezoid(vals, t)
    assert orbit_integral(X, g, y0) == pytest.approx(quad, rel=1e-6)


def test_orbit_integral_of_second_derivative_vanishes():
    X = shear(4)
    rng = np.random.default_rng(9)
    for _ in range(20):
        g = ScalarField.random(6, rng)
        XXg = directional_derivative(X, directional_derivative(X, g))
        assert abs(orbit_integral(X, XXg, float(rng.uniform()))) <= 1e-10


def test_orbit_integral_of_dy_pairing_is_zero():
    X = shear(4)
    assert orbit_integral(X, pair(OneForm(0.0, 1.0), X), 0.3) == 0.0


def test_singular_orbit_raises():
    X = VectorField.product_flow(ScalarField.from_modes({(0, 1): 0.5}))
    with pytest.raises(ValueError, match="singular"):
        orbit_integral(X, ScalarField.constant(1.0), 0.25)


def test_homwell0_certificate():
    cert = check_homwell0_impossible(shear(4), OneForm(1.0, 0.0), 0.25)
    assert cert.kind == "orbit_positivity"
    assert cert.lower_bound == pytest.approx(1.0, abs=1e-8)
    assert cert.orbit_identity_residual <= 1e-10


def test_homwell0_precondition():
    with pytest.raises(ValueError):
        check_homwell0_impossible(shear(4), OneForm(-1.0, 0.0), 0.25)


def test_homwell0_condition_report_has_certificate():
    rep = check_homwell_condition(shear(4), OneForm(1.0, 0.0), ScalarField.constant(1.0), None, "homwell0")
    assert not rep.satisfied
    assert rep.certificate is not None and rep.certificate.lower_bound > 0


def test_exact_derivative_integrates_to_zero_on_orbits():
    X = shear(3)
    g = ScalarField.random(4, np.random.default_rng(0))
    Xg = pair(exterior_derivative_0(g), X)
    assert abs(orbit_integral(X, Xg, 0.6)) <= 1e-12
