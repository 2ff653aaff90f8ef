"""Explicit embeddings of linear torus flows into degree-2 homogeneous wells.

Source points are angle vectors u in T^n = (R/Z)^n with the linear flow
u' = nu. Each circle factor is realized as an interleaved real pair

    Q_j(u) = c_j (cos 2 pi u_j, sin 2 pi u_j),

so that YYQ_j = -(2 pi nu_j)^2 Q_j and the quadratic potential
V = sum_j (2 pi nu_j)^2 |z_j|^2 / 2 gives YP = -grad V(Q).

* Kronecker flow d/dx + alpha d/dy on T^2: nu = (1, alpha).
* (S^1)^n with Y(a) = ia: nu_j = 1/(2 pi), c_j = 1, V = |x|^2/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potential import Potential, PhaseState, integrate, quadratic_form
from .spectral import (
    DEFAULT_TOL,
    OneForm,
    ScalarField,
    VectorField,
    directional_derivative,
    exactness_test,
    lie_derivative,
    pair,
    sup_norm,
)

__all__ = [
    "ExplicitEmbedding",
    "kronecker_embedding",
    "circle_product_embedding",
    "flow_residual",
    "verify_conjugacy",
    "induced_one_form",
    "Lemma1Check",
    "lemma1_wellcase_check",
]

TWO_PI = 2.0 * np.pi


def _circle_fields(c):
    # c cos(2 pi x), c sin(2 pi x) as fields of the first torus coordinate
    return (
        ScalarField.from_modes({(1, 0): 0.5 * c}),
        ScalarField.from_modes({(1, 0): -0.5j * c}),
    )


def _swap(g):
    return ScalarField(g.coeffs.T)


@dataclass(frozen=True, eq=False)
class ExplicitEmbedding:
    """Embedding u -> (Q(u), P(u)) of a linear torus flow into a well.

    ``Q_map`` / ``P_map`` accept angle arrays of shape ``(..., n)`` and return
    shape ``(..., 2n)``.
    """

    source: dict
    frequencies: np.ndarray
    amplitudes: np.ndarray
    potential: Potential

    @property
    def n(self):
        return len(self.frequencies)

    @property
    def scale(self):
        """|Q|, constant on the source (every such embedding is spherical)."""
        return float(np.sqrt(np.sum(self.amplitudes**2)))

    def Q_map(self, u):
        u = np.asarray(u, float)
        ang = TWO_PI * u
        c = self.amplitudes
        out = np.empty(u.shape[:-1] + (2 * self.n,))
        out[..., 0::2] = c * np.cos(ang)
        out[..., 1::2] = c * np.sin(ang)
        return out

    def P_map(self, u):
        u = np.asarray(u, float)
        ang = TWO_PI * u
        w = TWO_PI * self.frequencies * self.amplitudes
        out = np.empty(u.shape[:-1] + (2 * self.n,))
        out[..., 0::2] = -w * np.sin(ang)
        out[..., 1::2] = w * np.cos(ang)
        return out

    def flow(self, u, t):
        """Exact source flow, angles reduced mod 1."""
        return np.mod(np.asarray(u, float) + np.multiply.outer(t, self.frequencies), 1.0)

    def phase_point(self, u):
        return PhaseState(self.Q_map(u), self.P_map(u))

    def factor_fields(self, j):
        """Spectral (Q, P, YP) field pairs for circle factor j, as functions of x."""
        Y = VectorField(ScalarField.constant(self.frequencies[j]), ScalarField.zeros())
        q = _circle_fields(self.amplitudes[j])
        p = tuple(directional_derivative(Y, g) for g in q)
        yp = tuple(directional_derivative(Y, g) for g in p)
        return q, p, yp

    def torus_fields(self):
        """(Q components as ScalarFields on T^2, flow VectorField) for n <= 2."""
        if self.n > 2:
            raise ValueError("torus fields are only available for n <= 2")
        q = list(_circle_fields(self.amplitudes[0]))
        if self.n == 2:
            q += [_swap(g) for g in _circle_fields(self.amplitudes[1])]
            Y = VectorField(ScalarField.constant(self.frequencies[0]), ScalarField.constant(self.frequencies[1]))
        else:
            Y = VectorField(ScalarField.constant(self.frequencies[0]), ScalarField.zeros())
        return q, Y

    def summary(self):
        return {
            "source": dict(self.source),
            "frequencies": [float(v) for v in self.frequencies],
            "amplitudes": [float(v) for v in self.amplitudes],
            "potential_matrix": [[float(v) for v in row] for row in self.potential.params["matrix"]],
            "potential_degree": self.potential.degree,
            "scale": self.scale,
        }


def _linear_embedding(source, nu, c):
    nu = np.asarray(nu, float)
    c = np.asarray(c, float)
    if np.any(c <= 0):
        raise ValueError("amplitudes must be positive")
    A = np.diag(np.repeat((TWO_PI * nu) ** 2, 2))
    return ExplicitEmbedding(source, nu, c, quadratic_form(A))


def kronecker_embedding(alpha: float, c1: float = 1.0, c2: float = 1.0) -> ExplicitEmbedding:
    """Y = d/dx + alpha d/dy on T^2 into R^4 with V = 2 pi^2 (|z1|^2 + alpha^2 |z2|^2)."""
    return _linear_embedding({"kind": "kronecker", "alpha": float(alpha), "c1": float(c1), "c2": float(c2)}, [1.0, alpha], [c1, c2])


def circle_product_embedding(n: int) -> ExplicitEmbedding:
    """(S^1)^n in C^n with Y(a) = ia, Q(a) = a, P = ia, V = |x|^2/2.

    Angle u_j corresponds to a_j = exp(2 pi i u_j).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _linear_embedding({"kind": "circles", "n": int(n)}, np.full(n, 1.0 / TWO_PI), np.ones(n))


def flow_residual(emb: ExplicitEmbedding, grid_n: int = 64, seed: int = 0) -> float:
    """max |YP + grad V(Q)| over a grid_n x grid_n grid of source points.

    YP is obtained by spectral differentiation of each circle factor along the
    flow, independently of the potential. For n = 1 the grid collapses to
    grid_n points; for n > 2 the remaining angles are fixed random offsets.
    """
    g = np.arange(grid_n) / grid_n
    if emb.n == 1:
        u = g[:, None]
    else:
        rest = np.random.default_rng(seed).uniform(size=emb.n - 2)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        u = np.concatenate(
            [gx[..., None], gy[..., None], np.broadcast_to(rest, gx.shape + (emb.n - 2,))], axis=-1
        ).reshape(-1, emb.n)
    yp = np.empty(u.shape[:-1] + (2 * emb.n,))
    for j in range(emb.n):
        _, _, (yp_c, yp_s) = emb.factor_fields(j)
        yp[..., 2 * j] = yp_c.evaluate(u[..., j], 0.0)
        yp[..., 2 * j + 1] = yp_s.evaluate(u[..., j], 0.0)
    force = emb.potential.gradient(emb.Q_map(u))
    return float(np.max(np.abs(yp + force)))


def verify_conjugacy(emb: ExplicitEmbedding, start, t_max: float, dt: float) -> float:
    """sup over step times t <= t_max of |(Q,P)(Phi^t u) - WellFlow^t (Q,P)(u)|.

    The source flow is exact; only the well side is integrated (Stormer-Verlet).
    """
    if dt <= 0 or t_max < 0:
        raise ValueError("need dt > 0 and t_max >= 0")
    start = np.asarray(start, float)
    steps = int(round(t_max / dt))
    if steps == 0:
        return 0.0
    traj = integrate(emb.potential, emb.phase_point(start), dt, steps)
    if traj.status != "ok":
        raise RuntimeError(f"well trajectory failed: {traj.message}")
    u = emb.flow(start, traj.times)
    dq = traj.q - emb.Q_map(u)
    dp = traj.p - emb.P_map(u)
    return float(np.max(np.sqrt(np.sum(dq**2, axis=1) + np.sum(dp**2, axis=1))))


def induced_one_form(q_fields, Y: VectorField) -> OneForm:
    """theta with theta.W = <YQ, WQ> for every W."""
    yq = [directional_derivative(Y, g) for g in q_fields]
    t1 = sum((a.multiply(g.dx()) for a, g in zip(yq, q_fields)), ScalarField.zeros())
    t2 = sum((a.multiply(g.dy()) for a, g in zip(yq, q_fields)), ScalarField.zeros())
    return OneForm(t1, t2)


@dataclass(frozen=True)
class Lemma1Check:
    lhs_residual: float  # sup |W<-YYQ,Q> - k<-YYQ,WQ>|
    rhs_residual: float | None  # sup |W(kL + (1-k/2) theta.Y - YY|Q|^2/2)|, None without L
    identity_gap: float  # sup |lhs - (k L_Y theta . W + W((1-k/2) theta.Y - YY|Q|^2/2))|
    lagrangian_available: bool

    def vanish_together(self, tol):
        if self.rhs_residual is None:
            return self.identity_gap <= tol
        return (self.lhs_residual <= tol) == (self.rhs_residual <= tol) and self.identity_gap <= tol


def lemma1_wellcase_check(q_fields, Y: VectorField, k: float, W: VectorField, theta: OneForm | None = None, tol=DEFAULT_TOL) -> Lemma1Check:
    """Both sides of the Euler-condition equivalence for a map Q: T^2 -> R^m.

    ``theta`` defaults to the form induced by Q (theta.W = <YQ, WQ>). The
    right side needs L with dL = L_Y theta; when L_Y theta is not exact the
    right side is reported as ``None`` and only the pointwise identity gap
    (using L_Y theta . W in place of WL) is available.
    """
    q_fields = list(q_fields)
    if theta is None:
        theta = induced_one_form(q_fields, Y)
    yq = [directional_derivative(Y, g) for g in q_fields]
    yyq = [directional_derivative(Y, g) for g in yq]
    wq = [directional_derivative(W, g) for g in q_fields]
    acc_q = sum((a.multiply(g) for a, g in zip(yyq, q_fields)), ScalarField.zeros())
    acc_wq = sum((a.multiply(g) for a, g in zip(yyq, wq)), ScalarField.zeros())
    lhs = directional_derivative(W, -acc_q) - k * (-acc_wq)

    half_norm = sum((g.multiply(g) for g in q_fields), ScalarField.zeros()) * 0.5
    inner = (1 - k / 2) * pair(theta, Y) - directional_derivative(Y, directional_derivative(Y, half_norm))
    lie = lie_derivative(Y, theta)
    via_lie = k * pair(lie, W) + directional_derivative(W, inner)
    gap = sup_norm(lhs - via_lie)

    ex = exactness_test(lie, tol)
    rhs_res = None
    if ex.is_exact:
        rhs = directional_derivative(W, k * ex.primitive + inner)
        rhs_res = sup_norm(rhs)
        gap = max(gap, sup_norm(lhs - rhs))
    return Lemma1Check(sup_norm(lhs), rhs_res, gap, ex.is_exact)
