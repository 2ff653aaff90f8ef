"""Potentials V: R^m -> R, homogeneity diagnostics and a Stormer-Verlet well simulator.

The well flow is q' = p, p' = -grad V(q) with energy H = |p|^2/2 + V(q).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DEFAULT_EPSILON",
    "DEFAULT_ESCAPE_RADIUS",
    "Potential",
    "PhaseState",
    "Trajectory",
    "IdentityCheck",
    "quadratic_form",
    "closed_form",
    "homogeneous_extend",
    "euler_residual",
    "gradient_consistency",
    "integrate",
    "symplectic_identity_check",
    "state_at",
    "write_csv",
    "read_csv",
]

DEFAULT_EPSILON = 0.1
DEFAULT_ESCAPE_RADIUS = 1e6


@dataclass(frozen=True, eq=False)
class Potential:
    """Evaluable potential with gradient.

    ``evaluate`` and ``gradient`` accept arrays of shape ``(..., m)``.
    ``kind`` is ``"quadratic_form"``, ``"homogeneous_extension"`` or
    ``"closed_form"``; ``params`` carries the kind-specific data (the matrix,
    the sphere function, the expression source).
    """

    dimension: int
    evaluate: Callable
    gradient: Callable
    kind: str
    degree: float | None = None
    epsilon: float = DEFAULT_EPSILON
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    def __call__(self, x):
        return self.evaluate(x)


def quadratic_form(A, epsilon=DEFAULT_EPSILON) -> Potential:
    """V(x) = x.A.x / 2 for symmetric A; homogeneous of degree 2 everywhere."""
    A = np.array(A, float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    A = 0.5 * (A + A.T)
    A.setflags(write=False)

    def evaluate(x):
        x = np.asarray(x, float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, A, x)

    def gradient(x):
        return np.asarray(x, float) @ A

    return Potential(A.shape[0], evaluate, gradient, "quadratic_form", 2.0, epsilon, {"matrix": A})


def closed_form(dimension, evaluate, gradient, degree=None, epsilon=DEFAULT_EPSILON, source=None) -> Potential:
    return Potential(dimension, evaluate, gradient, "closed_form", degree, epsilon, {"expression": source})


def _smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1. Returns (value, derivative)."""
    t = np.clip(np.asarray(t, float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / t), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / (1.0 - t)), 0.0)
        s = a / (a + b)
        da = np.where(t > 0, a / t**2, 0.0)
        db = np.where(t < 1, -b / (1.0 - t) ** 2, 0.0)
        ds = (da * b - a * db) / (a + b) ** 2
    inside = (t > 0) & (t < 1)
    return s, np.where(inside, ds, 0.0)


def _sphere_gradient_fd(V1, s, h=1e-6):
    # gradient of the 0-homogeneous extension x -> V1(x/|x|); it is tangent at s
    m = s.shape[-1]
    g = np.zeros_like(s)
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        xp = s + e
        xm = s - e
        g[..., i] = (
            V1(xp / np.linalg.norm(xp, axis=-1, keepdims=True)) - V1(xm / np.linalg.norm(xm, axis=-1, keepdims=True))
        ) / (2 * h)
    return g


def homogeneous_extend(V1, k, epsilon=DEFAULT_EPSILON, dimension=None, sphere_gradient=None, inner_value=0.0) -> Potential:
    """Extend sphere data V1 to V(x) = |x|^k V1(x/|x|) for |x| >= epsilon.

    ``sphere_gradient(s)``, if given, may be any ambient gradient of V1 at the
    unit vector s; only its tangential part is used. Otherwise the tangential
    gradient is taken by central differences on the sphere. Inside the ball the
    potential is blended to ``inner_value`` by a smooth step supported on
    epsilon/2 <= |x| <= epsilon.
    """
    if k == 0:
        raise ValueError("degree k = 0 is not allowed")
    k = float(k)

    def tangential(s):
        if sphere_gradient is None:
            g = _sphere_gradient_fd(V1, s)
        else:
            g = np.asarray(sphere_gradient(s), float)
        return g - np.sum(g * s, axis=-1, keepdims=True) * s

    def _parts(x):
        x = np.asarray(x, float)
        r = np.linalg.norm(x, axis=-1)
        rs = np.where(r > 0, r, 1.0)
        s = x / rs[..., None]
        return x, r, rs, s

    def evaluate(x):
        x, r, rs, s = _parts(x)
        homog = rs**k * V1(s)
        chi, _ = _smoothstep((r - epsilon / 2) / (epsilon / 2))
        return chi * homog + (1 - chi) * inner_value

    def gradient(x):
        x, r, rs, s = _parts(x)
        v1 = V1(s)
        homog = rs**k * v1
        grad_h = k * rs[..., None] ** (k - 1) * v1[..., None] * s + rs[..., None] ** (k - 1) * tangential(s)
        chi, dchi = _smoothstep((r - epsilon / 2) / (epsilon / 2))
        dchi = dchi / (epsilon / 2)
        return chi[..., None] * grad_h + (dchi * (homog - inner_value))[..., None] * s

    params = {"sphere_function": V1, "k": k}
    return Potential(dimension or 0, evaluate, gradient, "homogeneous_extension", k, epsilon, params)


def _sample_points(dimension, samples, radius_range, rng):
    lo, hi = radius_range
    dirs = rng.standard_normal((samples, dimension))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.geomspace(lo, hi, 8)
    return (dirs[:, None, :] * radii[None, :, None]).reshape(-1, dimension)


def euler_residual(V: Potential, k, samples=100, radius_range=None, dimension=None, seed=0) -> float:
    """max |<grad V(x), x> - k V(x)| / (1 + |V(x)|) over sampled x.

    Samples ``samples`` random directions times 8 log-spaced radii in
    ``radius_range`` (default ``(epsilon, 10)``).
    """
    radius_range = radius_range or (V.epsilon, 10.0)
    if radius_range[0] < V.epsilon:
        raise ValueError(f"radius_range starts below epsilon={V.epsilon}")
    m = dimension or V.dimension
    if not m:
        raise ValueError("potential has no dimension; pass dimension=")
    x = _sample_points(m, samples, radius_range, np.random.default_rng(seed))
    val = V.evaluate(x)
    lhs = np.sum(V.gradient(x) * x, axis=-1)
    return float(np.max(np.abs(lhs - k * val) / (1 + np.abs(val))))


def gradient_consistency(V: Potential, points=100, scale=2.0, h=1e-5, seed=0, dimension=None) -> float:
    """Max relative gap between V.gradient and central differences of V.evaluate."""
    m = dimension or V.dimension
    rng = np.random.default_rng(seed)
    x = rng.uniform(-scale, scale, (points, m))
    g = V.gradient(x)
    fd = np.zeros_like(x)
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        fd[:, i] = (V.evaluate(x + e) - V.evaluate(x - e)) / (2 * h)
    return float(np.max(np.abs(g - fd)) / (1.0 + np.max(np.abs(g))))


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, float)).copy()
        p = np.atleast_1d(np.asarray(self.p, float)).copy()
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError("q and p must be vectors of equal length")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


@dataclass
class Trajectory:
    """Sampled well trajectory; ``q`` and ``p`` have shape (n_states, m)."""

    dt: float
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    blowup_flag: bool = False
    escape_radius: float = DEFAULT_ESCAPE_RADIUS
    status: str = "ok"  # "ok" | "blowup" | "error"
    message: str = ""

    @property
    def times(self):
        return self.dt * np.arange(len(self.energy))

    @property
    def states(self):
        return [PhaseState(q, p) for q, p in zip(self.q, self.p)]

    def __len__(self):
        return len(self.energy)

    @property
    def max_energy_drift(self):
        return float(np.max(np.abs(self.energy - self.energy[0])))


def integrate(V: Potential, s0: PhaseState, dt: float, steps: int, escape_radius=DEFAULT_ESCAPE_RADIUS) -> Trajectory:
    """Stormer-Verlet (kick-drift-kick) for q' = p, p' = -grad V(q).

    Stops early with ``blowup_flag`` once |q| exceeds ``escape_radius``;
    a non-finite state truncates the trajectory with status ``"error"``.
    ``dt`` may be negative (used for reversibility checks) but not zero.
    """
    if dt == 0 or not math.isfinite(dt):
        raise ValueError("dt must be finite and nonzero")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    m = s0.q.shape[0]
    qs = np.empty((steps + 1, m))
    ps = np.empty((steps + 1, m))
    q = s0.q.copy()
    p = s0.p.copy()
    qs[0], ps[0] = q, p
    g = V.gradient(q)
    n = 0
    status, msg, blow = "ok", "", False
    for n in range(1, steps + 1):
        p_half = p - 0.5 * dt * g
        q = q + dt * p_half
        g = V.gradient(q)
        p = p_half - 0.5 * dt * g
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            status, msg = "error", f"non-finite state at step {n}"
            n -= 1
            break
        qs[n], ps[n] = q, p
        if np.linalg.norm(q) > escape_radius:
            status, msg, blow = "blowup", f"|q| exceeded {escape_radius:g} at step {n}", True
            break
    qs, ps = qs[: n + 1], ps[: n + 1]
    energy = 0.5 * np.sum(ps**2, axis=1) + V.evaluate(qs)
    return Trajectory(dt, qs, ps, energy, blow, escape_radius, status, msg)


def state_at(traj: Trajectory, t: float, V: Potential) -> PhaseState:
    """Phase point at time ``t`` by cubic Hermite interpolation between steps.

    Uses q' = p and p' = -grad V(q) at the bracketing steps, so the
    interpolation error is O(dt^4), well below the O(dt^2) scheme error.
    """
    times = traj.times
    if not times[0] <= t <= times[-1]:
        raise ValueError(f"t={t} outside the trajectory span [0, {times[-1]}]")
    i = min(int(np.floor(t / traj.dt)), len(times) - 2)
    h = traj.dt
    s = (t - times[i]) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    q0, q1, p0, p1 = traj.q[i], traj.q[i + 1], traj.p[i], traj.p[i + 1]
    f0, f1 = -V.gradient(q0), -V.gradient(q1)
    q = h00 * q0 + h10 * h * p0 + h01 * q1 + h11 * h * p1
    p = h00 * p0 + h10 * h * f0 + h01 * p1 + h11 * h * f1
    return PhaseState(q, p)


@dataclass(frozen=True)
class IdentityCheck:
    kinetic_residual: float  # max |<p, dq/dt> - |p|^2|
    energy_residual: float  # max |H(t) - H(0)|


def symplectic_identity_check(traj: Trajectory, V: Potential | None = None) -> IdentityCheck:
    """Discrete proxies for Theta.X = |p|^2 and i_X dTheta = -dH.

    Uses midpoint momenta against difference quotients of q; both residuals
    are O(dt^2) for the Verlet scheme.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    energy = traj.energy
    if V is not None:
        energy = 0.5 * np.sum(traj.p**2, axis=1) + V.evaluate(traj.q)
    e_res = float(np.max(np.abs(energy - energy[0])))
    if len(traj) < 2:
        return IdentityCheck(0.0, e_res)
    qdot = np.diff(traj.q, axis=0) / traj.dt
    pmid = 0.5 * (traj.p[1:] + traj.p[:-1])
    k_res = float(np.max(np.abs(np.sum(pmid * qdot, axis=1) - np.sum(pmid**2, axis=1))))
    return IdentityCheck(k_res, e_res)


def write_csv(traj: Trajectory, path_or_file):
    """Header ``t,q1..qm,p1..pm,E``; one row per state, 17 significant digits."""
    m = traj.q.shape[1]
    header = ["t"] + [f"q{i + 1}" for i in range(m)] + [f"p{i + 1}" for i in range(m)] + ["E"]

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, q, p, e in zip(traj.times, traj.q, traj.p, traj.energy):
            w.writerow([format(float(v), ".17g") for v in (t, *q, *p, e)])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


def read_csv(path):
    """Return ``(header, array)`` from a trajectory CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], float)
