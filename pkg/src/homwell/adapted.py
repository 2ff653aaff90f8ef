"""Adapted 1-forms on T^2: per-form checks, feasibility search, certificates.

A 1-form theta is *weakly adapted* to a flow X when theta.X >= 0 and the Lie
derivative L_X theta is exact, *strongly adapted* when moreover theta.X > 0.
All verdicts here are about a given theta; nothing in this module claims that
a flow admits no adapted form, except through an explicit
:class:`InfeasibilityCertificate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    DEFAULT_TOL,
    OneForm,
    ScalarField,
    VectorField,
    directional_derivative,
    exactness_test,
    exterior_derivative_0,
    exterior_derivative_1,
    grid_certificate,
    lie_derivative,
    lie_derivative_cartan_parts,
    pair,
    sup_norm,
)

__all__ = [
    "AdaptedReport",
    "ConditionReport",
    "InfeasibilityCertificate",
    "SearchResult",
    "CONDITIONS",
    "check_adapted",
    "check_homwell_condition",
    "condition_form",
    "search_adapted",
    "obstruction_residual",
    "ObstructionResidual",
    "orbit_integral",
    "check_homwell0_impossible",
    "sin_plus_two",
]

CONDITIONS = ("homwell_k", "homwell2", "spherical", "homwell0")
EQUALITY_TOL = 1e-8


def sin_plus_two(max_mode=1):
    """f(y) = sin(2 pi y) + 2, the default product-flow profile."""
    return ScalarField.from_modes({(0, 0): 2.0, (0, 1): -0.5j}, max_mode=max_mode)


@dataclass(frozen=True)
class InfeasibilityCertificate:
    kind: str  # "torus_obstruction" | "orbit_positivity"
    y_witness: float
    lower_bound: float
    explanation: str
    orbit_identity_residual: float | None = None

    def __post_init__(self):
        if self.kind not in ("torus_obstruction", "orbit_positivity"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if not self.lower_bound > 0:
            raise ValueError("a certificate needs a positive lower bound")


@dataclass(frozen=True)
class AdaptedReport:
    weakly_adapted: bool
    strongly_adapted: bool
    geodesible_for_theta: bool
    strongly_geodesible_for_theta: bool
    pairing_min: float
    pairing_lower_bound: float
    closedness_residual: float
    period_residuals: tuple
    contraction_residual: float
    lie_residual: float
    unit_pairing_residual: float
    lagrangian_primitive: ScalarField | None
    tol: float
    grid_n: int


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    residual_inf_norm: float
    satisfied: bool
    tol: float
    k: float | None = None
    witness: tuple | None = None
    certificate: InfeasibilityCertificate | None = None
    # For k not in {0, 2} it is unknown whether the condition ever obstructs.
    open_question: bool = False


@dataclass(frozen=True)
class SearchResult:
    status: str  # "found" | "infeasible" | "inconclusive"
    theta: OneForm | None = None
    r: ScalarField | None = None
    certificate: InfeasibilityCertificate | None = None
    equality_residual: float | None = None
    pairing_min: float | None = None
    reason: str = ""


def check_adapted(X: VectorField, theta: OneForm, tol: float = DEFAULT_TOL, grid_n=None) -> AdaptedReport:
    """Evaluate the adapted / geodesible conditions for one (X, theta) pair."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    pairing = pair(theta, X)
    grid_n = grid_n or 4 * (pairing.max_mode + 1)
    pmin, plow = grid_certificate(pairing, grid_n)

    contracted, exact_part = lie_derivative_cartan_parts(X, theta)
    lie = contracted + exact_part
    ex = exactness_test(lie, tol)
    contraction = sup_norm(contracted)
    lie_res = sup_norm(lie)
    unit_res = sup_norm(pairing - 1.0)

    strongly_geo = unit_res <= tol and lie_res <= tol
    # theta.X = 1 and L_X theta = 0 force i_X d theta = 0, so strong geodesibility
    # implies geodesibility even when roundoff pushes the contraction over tol.
    geo = strongly_geo or (pmin > tol and contraction <= tol)
    strong = pmin > tol and ex.is_exact
    weak = pmin >= -tol and ex.is_exact
    return AdaptedReport(
        weakly_adapted=weak,
        strongly_adapted=strong,
        geodesible_for_theta=geo,
        strongly_geodesible_for_theta=strongly_geo,
        pairing_min=pmin,
        pairing_lower_bound=plow,
        closedness_residual=ex.closedness_residual,
        period_residuals=tuple(abs(p) for p in ex.periods),
        contraction_residual=contraction,
        lie_residual=lie_res,
        unit_pairing_residual=unit_res,
        lagrangian_primitive=ex.primitive,
        tol=tol,
        grid_n=grid_n,
    )


def _second_derivative(Y, g):
    return directional_derivative(Y, directional_derivative(Y, g))


def condition_form(condition_id, Y: VectorField, theta: OneForm, R: ScalarField | None = None, k=None):
    """Left-hand side of the selected homogeneous-well condition.

    ``homwell_k``: k L_Y theta + (1 - k/2) d(theta.Y) - d(YY(R^2/2))
    ``homwell2``:  d(YY(R^2)) - 4 L_Y theta
    ``spherical``: 2k L_Y theta - (k - 2) d(theta.Y)
    ``homwell0``:  theta.Y - YY(R^2/2)   (a function, forced to vanish at k = 0)
    """
    if condition_id not in CONDITIONS:
        raise ValueError(f"unknown condition {condition_id!r}; expected one of {CONDITIONS}")
    lie = lie_derivative(Y, theta)
    py = pair(theta, Y)
    if condition_id == "spherical":
        if k is None:
            raise ValueError("spherical condition needs k")
        return 2 * k * lie - (k - 2) * exterior_derivative_0(py)
    if R is None:
        R = ScalarField.constant(1.0)
    R2 = R.multiply(R)
    if condition_id == "homwell2":
        return exterior_derivative_0(_second_derivative(Y, R2)) - 4 * lie
    if condition_id == "homwell0":
        return py - _second_derivative(Y, R2 * 0.5)
    if k is None or k == 0:
        raise ValueError("homwell_k needs k != 0; use check_homwell0_impossible for k = 0")
    return k * lie + (1 - k / 2) * exterior_derivative_0(py) - exterior_derivative_0(_second_derivative(Y, R2 * 0.5))


def check_homwell_condition(
    X: VectorField,
    theta: OneForm,
    R: ScalarField | None = None,
    k: float | None = None,
    condition_id: str = "homwell_k",
    tol: float = DEFAULT_TOL,
    y0: float = 0.25,
) -> ConditionReport:
    """Residual of a homogeneous-well condition for given (theta, R).

    For ``homwell0`` the residual is generically nonzero and, when theta is
    strongly adapted on a product flow, an orbit-positivity certificate is
    attached (see :func:`check_homwell0_impossible`).
    """
    if condition_id == "homwell_k" and (k is None or k == 0):
        raise ValueError("k = 0 is not allowed for homwell_k; use check_homwell0_impossible")
    lhs = condition_form(condition_id, X, theta, R, k)
    res = sup_norm(lhs)
    ok = res <= tol
    witness = None
    if ok:
        r_ok = True
        if R is not None and condition_id != "spherical":
            r_ok = float(np.min(R.on_grid(4 * (R.max_mode + 1)))) > 0
        if r_ok:
            witness = (theta, R)
    cert = None
    if condition_id == "homwell0" and X.is_product_flow(1e-14):
        try:
            cert = check_homwell0_impossible(X, theta, y0, tol=tol)
        except ValueError:
            cert = None
    return ConditionReport(
        condition_id=condition_id,
        residual_inf_norm=res,
        satisfied=ok,
        tol=tol,
        k=k if condition_id in ("homwell_k", "spherical") else (2.0 if condition_id == "homwell2" else 0.0),
        witness=witness,
        certificate=cert,
        open_question=condition_id in ("homwell_k", "spherical") and k is not None and k not in (0, 2),
    )


# -- feasibility search ---------------------------------------------------------


def _real_basis(max_mode):
    """Real fields spanning the band-limited space: 1, then cos/sin pairs."""
    M = max_mode
    out = [ScalarField.constant(1.0, M)]
    for m in range(0, M + 1):
        for n in range(-M, M + 1):
            if m == 0 and n <= 0:
                continue
            out.append(ScalarField.from_modes({(m, n): 0.5}, M))
            out.append(ScalarField.from_modes({(m, n): -0.5j}, M))
    return out


def _coeff_rows(obj):
    """Real vector of every Fourier coefficient of a field / form."""
    if isinstance(obj, ScalarField):
        c = obj.coeffs.ravel()
    elif isinstance(obj, OneForm):
        c = np.concatenate([obj.comp_dx.coeffs.ravel(), obj.comp_dy.coeffs.ravel()])
    else:
        c = obj.density.coeffs.ravel()
    return np.concatenate([c.real, c.imag])


def _combine(basis, weights):
    M = basis[0].max_mode
    c = np.zeros((2 * M + 1, 2 * M + 1), complex)
    for b, w in zip(basis, weights):
        c += w * b.coeffs
    return ScalarField(c)


def _assemble(X, max_mode, joint):
    basis = _real_basis(max_mode)
    nb = len(basis)
    zero = ScalarField.zeros(max_mode)
    cols = []
    for i in range(2 * nb + (nb if joint else 0)):
        if i < nb:
            theta, r = OneForm(basis[i], zero), None
        elif i < 2 * nb:
            theta, r = OneForm(zero, basis[i - nb]), None
        else:
            theta, r = OneForm.zeros(max_mode), basis[i - 2 * nb]
        lie = lie_derivative(X, theta)
        if joint:
            if r is not None:
                lie = lie - exterior_derivative_0(_second_derivative(X, r))
            # promote so all columns have equal length
            lie = OneForm(lie.comp_dx.promote(max_mode + 3 * X.max_mode), lie.comp_dy.promote(max_mode + 3 * X.max_mode))
            cols.append(_coeff_rows(lie))
        else:
            curl = exterior_derivative_1(lie).density.promote(max_mode + 2 * X.max_mode)
            px, py = lie.periods()
            cols.append(np.concatenate([_coeff_rows(curl), [px, py]]))
    A = np.array(cols).T
    norm_row = np.zeros(A.shape[1])
    norm_row[0] = 1.0  # the constant basis element of theta_1 carries its mean
    return basis, A, norm_row


def search_adapted(
    X: VectorField,
    max_mode: int = 4,
    constraints=("strongly_adapted",),
    grid_n=None,
    tol: float = DEFAULT_TOL,
) -> SearchResult:
    """Look for a strongly adapted theta (optionally jointly with r, L_X theta = d(XXr)).

    The equalities are linear in the Fourier coefficients of theta (and r);
    they are solved by minimum-norm least squares with the gauge
    ``int int theta_1 = 1``. A solution is accepted only if the equality
    residual is at most 1e-8 and theta.X is positive on the grid. Failure at a
    fixed truncation is ``inconclusive``; ``infeasible`` is returned only with
    a truncation-independent certificate.
    """
    constraints = set(constraints)
    unknown = constraints - {"strongly_adapted", "homwell2_joint"}
    if unknown:
        raise ValueError(f"unknown constraints {sorted(unknown)}")
    joint = "homwell2_joint" in constraints
    product = X.is_product_flow(1e-14)
    if joint:
        if not product:
            return SearchResult("inconclusive", reason="joint search is only certified for product flows f(y) d/dx")
        f = X.comp_x
        fp = f.dy()
        fp_sup = sup_norm(fp)
        if fp_sup > tol:
            n = 4 * (fp.max_mode + 1) * 16
            ys = np.arange(n) / n
            vals = np.abs(fp.evaluate(0.0, ys))
            i = int(np.argmax(vals))
            cert = InfeasibilityCertificate(
                kind="torus_obstruction",
                y_witness=float(ys[i]),
                lower_bound=float(vals[i]),
                explanation=(
                    "integrating the dy-component of L_Y theta - d(YYr) over x gives "
                    "f'(y) * int theta_1(x, y) dx for every theta and r; at y_witness "
                    f"|f'| = {vals[i]:.17g} > 0, so int theta_1 dx must vanish there, "
                    "which is impossible when theta_1 > 0"
                ),
            )
            return SearchResult("infeasible", certificate=cert)

    basis, A, norm_row = _assemble(X, max_mode, joint)
    lhs = np.vstack([A, norm_row])
    rhs = np.zeros(lhs.shape[0])
    rhs[-1] = 1.0
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    eq_res = float(np.max(np.abs(lhs @ sol - rhs)))
    nb = len(basis)
    theta = OneForm(_combine(basis, sol[:nb]), _combine(basis, sol[nb: 2 * nb]))
    r = _combine(basis, sol[2 * nb:]) if joint else None
    pairing = pair(theta, X)
    gn = grid_n or 4 * (pairing.max_mode + 1)
    pmin = float(np.min(pairing.on_grid(max(gn, 4 * (pairing.max_mode + 1)))))
    if eq_res <= EQUALITY_TOL and pmin > 0:
        return SearchResult("found", theta=theta, r=r, equality_residual=eq_res, pairing_min=pmin)
    why = []
    if eq_res > EQUALITY_TOL:
        why.append(f"equality residual {eq_res:.3g} > {EQUALITY_TOL:g} at max_mode={max_mode}")
    if pmin <= 0:
        why.append(f"least-squares theta has theta.X min {pmin:.3g} <= 0")
    return SearchResult(
        "inconclusive", theta=theta, r=r, equality_residual=eq_res, pairing_min=pmin, reason="; ".join(why)
    )


# -- torus obstruction and orbit integrals ------------------------------------


@dataclass(frozen=True)
class ObstructionResidual:
    """Both sides of the x-integrated obstruction identity, as functions of y."""

    integrated: ScalarField  # y -> int (L_Y theta - d(YYr))(d/dy) dx
    predicted: ScalarField  # y -> f'(y) int theta_1 dx
    difference: float = field(default=0.0)


def obstruction_residual(f: ScalarField, theta: OneForm, r: ScalarField) -> ObstructionResidual:
    """Compare the x-average of the dy-part of L_Y theta - d(YYr) with f' * mean_x(theta_1)."""
    if not f.depends_on_y_only(1e-14):
        raise ValueError("f must depend on y only")
    Y = VectorField.product_flow(f)
    form = lie_derivative(Y, theta) - exterior_derivative_0(_second_derivative(Y, r))
    integrated = form.comp_dy.x_average()
    predicted = f.dy().multiply(theta.comp_dx.x_average())
    diff = sup_norm(integrated - predicted)
    return ObstructionResidual(integrated, predicted, diff)


def _product_profile(X):
    if not X.is_product_flow(1e-14):
        raise ValueError("orbit integrals need X = f(y) d/dx")
    return X.comp_x


def orbit_integral(X: VectorField, integrand: ScalarField, y0: float) -> float:
    """Integral of ``integrand`` over one period of the closed orbit through (0, y0).

    For X = f(y) d/dx the orbit is the circle y = y0 with period 1/|f(y0)|.
    """
    f = _product_profile(X)
    fy = float(f.evaluate(0.0, y0))
    if abs(fy) < 1e-14:
        raise ValueError(f"singular orbit: f({y0}) = 0")
    avg = float(integrand.x_average().evaluate(0.0, y0))
    return avg / abs(fy)


def check_homwell0_impossible(X: VectorField, theta: OneForm, y0: float, tol: float = DEFAULT_TOL, probe=None):
    """Certificate that (T^2, X) admits no embedding into a degree-0 homogeneous well.

    At k = 0 one would need theta.X = XX(R^2/2). Around the closed orbit through
    (0, y0) the right side integrates to zero for every R, while the left side
    integrates to a positive number.
    """
    rep = check_adapted(X, theta, tol)
    if not rep.strongly_adapted:
        raise ValueError("theta is not strongly adapted to X")
    lower = orbit_integral(X, pair(theta, X), y0)
    if probe is None:
        probe = pair(theta, X)
    ident = abs(orbit_integral(X, _second_derivative(X, probe * 0.5), y0))
    return InfeasibilityCertificate(
        kind="orbit_positivity",
        y_witness=float(y0),
        lower_bound=lower,
        explanation=(
            "around the closed orbit through (0, y_witness) the integral of theta.Y is "
            f"{lower:.17g} > 0 while the integral of YY(R^2/2) is 0 for every R, "
            "so theta.Y = YY(R^2/2) cannot hold"
        ),
        orbit_identity_residual=ident,
    )
