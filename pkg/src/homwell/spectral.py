"""Exterior calculus on the 2-torus T^2 = (R/Z)^2 for band-limited fields.

Every real field is stored as a truncated Fourier series

    g(x, y) = sum_{|m|,|n| <= M} ghat[m, n] exp(2 pi i (m x + n y))

in a ``(2M+1, 2M+1)`` complex table indexed as ``coeffs[m + M, n + M]``.
Derivatives are mode-wise multiplications, products are exact discrete
convolutions (the mode count adds), and the two de Rham periods of a 1-form
are its (0, 0) coefficients.

Sign convention: dx^dy is positive and i_{d/dx}(dx^dy) = dy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import convolve2d, fftconvolve

__all__ = [
    "MAX_MODE_CAP",
    "DEFAULT_TOL",
    "ModeTruncationWarning",
    "ScalarField",
    "OneForm",
    "TwoForm",
    "VectorField",
    "exterior_derivative_0",
    "exterior_derivative_1",
    "pair",
    "interior_product_2",
    "interior_product_1",
    "lie_derivative",
    "lie_derivative_cartan_parts",
    "directional_derivative",
    "exactness_test",
    "min_on_grid",
    "grid_certificate",
    "sup_norm",
    "primitive_of",
    "project",
    "ExactnessResult",
]

MAX_MODE_CAP = 256
DEFAULT_TOL = 1e-9
TWO_PI = 2.0 * np.pi


class ModeTruncationWarning(UserWarning):
    """A product exceeded the mode cap and high modes were dropped."""


def _support(c):
    """Smallest block holding every nonzero entry, with its offset."""
    rows = np.flatnonzero(np.any(c != 0, axis=1))
    if rows.size == 0:
        return c[:1, :1], 0, 0
    cols = np.flatnonzero(np.any(c != 0, axis=0))
    return c[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1], rows[0], cols[0]


def _wavenumbers(max_mode):
    return np.arange(-max_mode, max_mode + 1)


def _pad(coeffs, max_mode):
    cur = (coeffs.shape[0] - 1) // 2
    if cur == max_mode:
        return coeffs
    if cur > max_mode:
        d = cur - max_mode
        return coeffs[d:-d, d:-d]
    d = max_mode - cur
    return np.pad(coeffs, d)


def _hermitian_part(coeffs):
    return 0.5 * (coeffs + np.conj(coeffs[::-1, ::-1]))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real band-limited function on T^2.

    Parameters
    ----------
    coeffs : complex array of shape (2M+1, 2M+1)
        Fourier coefficients, ``coeffs[m + M, n + M] = ghat(m, n)``.
        Hermitian symmetry is enforced on construction.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2 != 1:
            raise ValueError(f"coefficient table must be (2M+1, 2M+1), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Fourier coefficient")
        c = _hermitian_part(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- construction -----------------------------------------------------

    @property
    def max_mode(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @classmethod
    def zeros(cls, max_mode=0):
        return cls(np.zeros((2 * max_mode + 1, 2 * max_mode + 1), complex))

    @classmethod
    def constant(cls, value, max_mode=0):
        c = np.zeros((2 * max_mode + 1, 2 * max_mode + 1), complex)
        c[max_mode, max_mode] = value
        return cls(c)

    @classmethod
    def from_modes(cls, modes, max_mode=None):
        """Build from a mapping ``{(m, n): coefficient}``.

        Conjugate partners are filled in, so ``{(1, 0): 0.5}`` gives cos(2 pi x).
        Passing both a mode and its partner with inconsistent values averages them.
        """
        modes = dict(modes)
        if max_mode is None:
            max_mode = max([max(abs(m), abs(n)) for m, n in modes] + [0])
        c = np.zeros((2 * max_mode + 1, 2 * max_mode + 1), complex)
        for (m, n), v in modes.items():
            c[m + max_mode, n + max_mode] += v
            if (m, n) != (0, 0) and (-m, -n) not in modes:
                c[-m + max_mode, -n + max_mode] += np.conj(v)
        return cls(c)

    @classmethod
    def from_records(cls, records, max_mode=None):
        """Inverse of :meth:`to_records`."""
        records = list(records)
        if max_mode is None:
            max_mode = max([max(abs(int(r[0])), abs(int(r[1]))) for r in records] + [0])
        c = np.zeros((2 * max_mode + 1, 2 * max_mode + 1), complex)
        for m, n, re, im in records:
            c[int(m) + max_mode, int(n) + max_mode] = complex(re, im)
        return cls(c)

    @classmethod
    def from_function(cls, func, max_mode, oversample=4, return_residual=False):
        """Project a smooth periodic function onto modes |m|, |n| <= max_mode.

        ``func`` is called with two broadcastable arrays ``(x, y)``. Quadrature
        is the trapezoid rule on an ``oversample * (2M+1)`` square grid, which
        is exact for the retained modes up to aliasing from modes above
        ``(oversample - 1/2)(2M+1)``. The residual reported is the sup of
        ``func - projection`` on a half-cell-shifted grid.
        """
        n = oversample * (2 * max_mode + 1)
        t = np.arange(n) / n
        with np.errstate(all="raise"):
            try:
                vals = np.broadcast_to(np.asarray(func(t[:, None], t[None, :]), float), (n, n))
            except FloatingPointError as exc:
                raise ValueError(f"function is not finite on the projection grid: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise ValueError("function is not finite on the projection grid")
        full = np.fft.fftshift(np.fft.fft2(vals)) / (n * n)
        mid = n // 2
        c = full[mid - max_mode: mid + max_mode + 1, mid - max_mode: mid + max_mode + 1]
        field = cls(c)
        if not return_residual:
            return field
        s = (np.arange(n) + 0.5) / n
        exact = np.broadcast_to(np.asarray(func(s[:, None], s[None, :]), float), (n, n))
        residual = float(np.max(np.abs(exact - field.on_grid(n, offset=0.5))))
        return field, residual

    @classmethod
    def random(cls, max_mode, rng=None, decay=0.0, scale=1.0):
        """Random real band-limited field; coefficients ~ N(0,1) * (1+|k|)^-decay."""
        rng = np.random.default_rng(rng)
        shape = (2 * max_mode + 1, 2 * max_mode + 1)
        c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        k = _wavenumbers(max_mode)
        c *= (1.0 + np.hypot(k[:, None], k[None, :])) ** (-decay)
        c *= scale / np.sqrt(c.size)
        return cls(c)

    def to_records(self):
        """List of ``(m, n, re, im)`` for every nonzero stored mode."""
        M = self.max_mode
        out = []
        for i, j in zip(*np.nonzero(self.coeffs)):
            v = self.coeffs[i, j]
            out.append((int(i) - M, int(j) - M, float(v.real), float(v.imag)))
        return out

    # -- evaluation ---------------------------------------------------------

    def coefficient(self, m, n):
        M = self.max_mode
        if abs(m) > M or abs(n) > M:
            return 0j
        return complex(self.coeffs[m + M, n + M])

    def mean(self) -> float:
        return self.coefficient(0, 0).real

    def evaluate(self, x, y):
        """Evaluate at points ``(x, y)`` (broadcastable arrays)."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        k = _wavenumbers(self.max_mode)
        ex = np.exp(TWO_PI * 1j * x[..., None] * k)
        ey = np.exp(TWO_PI * 1j * y[..., None] * k)
        val = np.einsum("...m,mn,...n->...", ex, self.coeffs, ey)
        return val.real

    __call__ = evaluate

    def on_grid(self, grid_n, offset=0.0):
        """Values on the grid ``x_i = (i + offset)/grid_n`` (axis 0 is x)."""
        M = self.max_mode
        if grid_n < 2 * M + 1:
            raise ValueError(f"grid_n={grid_n} cannot resolve max_mode={M}")
        buf = np.zeros((grid_n, grid_n), complex)
        wn = _wavenumbers(M)
        k = wn % grid_n
        c = self.coeffs
        if offset:
            phase = np.exp(TWO_PI * 1j * wn * offset / grid_n)
            c = phase[:, None] * c * phase[None, :]
        buf[np.ix_(k, k)] = c
        return (np.fft.ifft2(buf) * grid_n * grid_n).real

    # -- algebra --------------------------------------------------------------

    def promote(self, max_mode):
        return ScalarField(_pad(self.coeffs, max_mode))

    def truncate(self, max_mode):
        if max_mode >= self.max_mode:
            return self
        return ScalarField(_pad(self.coeffs, max_mode))

    def _binary(self, other, op):
        if isinstance(other, ScalarField):
            M = max(self.max_mode, other.max_mode)
            return ScalarField(op(_pad(self.coeffs, M), _pad(other.coeffs, M)))
        other = float(other)
        c = self.coeffs.copy()
        M = self.max_mode
        c[M, M] = op(c[M, M], other)
        return ScalarField(c)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ScalarField(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return self.multiply(other)
        return ScalarField(self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField(self.coeffs / float(other))

    def multiply(self, other, cap=MAX_MODE_CAP):
        """Exact product; the result has max_mode = sum of the inputs' (capped)."""
        out_mode = self.max_mode + other.max_mode
        (a, ia, ja), (b, ib, jb) = _support(self.coeffs), _support(other.coeffs)
        # direct sums keep exact zeros exact (mode structure survives); FFT only for big dense factors
        if a.size * b.size <= 200_000:
            part = convolve2d(a, b)
        else:
            part = fftconvolve(a, b)
        c = np.zeros((2 * out_mode + 1, 2 * out_mode + 1), complex)
        c[ia + ib : ia + ib + part.shape[0], ja + jb : ja + jb + part.shape[1]] = part
        if out_mode > cap:
            dropped = _pad(c, cap)
            lost = np.abs(c).sum() - np.abs(dropped).sum()
            warnings.warn(
                f"product needs max_mode={out_mode}; truncated to {cap} (dropped l1 mass {lost:.3g})",
                ModeTruncationWarning,
                stacklevel=2,
            )
            c = dropped
        return ScalarField(c)

    def dx(self):
        k = _wavenumbers(self.max_mode)
        return ScalarField(self.coeffs * (TWO_PI * 1j * k)[:, None])

    def dy(self):
        k = _wavenumbers(self.max_mode)
        return ScalarField(self.coeffs * (TWO_PI * 1j * k)[None, :])

    def x_average(self):
        """The function y -> int_T g(x, y) dx (keeps only m = 0)."""
        c = np.zeros_like(self.coeffs)
        M = self.max_mode
        c[M, :] = self.coeffs[M, :]
        return ScalarField(c)

    def depends_on_y_only(self, tol=0.0):
        M = self.max_mode
        c = self.coeffs.copy()
        c[M, :] = 0
        return bool(np.max(np.abs(c), initial=0.0) <= tol)

    def l1_norm(self):
        """Sum of |coefficients|; a rigorous upper bound for the sup norm."""
        return float(np.abs(self.coeffs).sum())

    def allclose(self, other, atol=1e-10):
        M = max(self.max_mode, other.max_mode)
        return bool(np.max(np.abs(_pad(self.coeffs, M) - _pad(other.coeffs, M))) <= atol)

    def __repr__(self):
        return f"ScalarField(max_mode={self.max_mode})"


def _as_field(v):
    return v if isinstance(v, ScalarField) else ScalarField.constant(float(v))


@dataclass(frozen=True, eq=False)
class OneForm:
    """theta = comp_dx dx + comp_dy dy."""

    comp_dx: ScalarField
    comp_dy: ScalarField

    def __post_init__(self):
        a, b = _as_field(self.comp_dx), _as_field(self.comp_dy)
        M = max(a.max_mode, b.max_mode)
        object.__setattr__(self, "comp_dx", a.promote(M))
        object.__setattr__(self, "comp_dy", b.promote(M))

    @property
    def max_mode(self):
        return self.comp_dx.max_mode

    @classmethod
    def zeros(cls, max_mode=0):
        return cls(ScalarField.zeros(max_mode), ScalarField.zeros(max_mode))

    def periods(self):
        """(int over the x-cycle, int over the y-cycle); these are the (0,0) modes."""
        return self.comp_dx.mean(), self.comp_dy.mean()

    def __add__(self, other):
        return OneForm(self.comp_dx + other.comp_dx, self.comp_dy + other.comp_dy)

    def __sub__(self, other):
        return OneForm(self.comp_dx - other.comp_dx, self.comp_dy - other.comp_dy)

    def __neg__(self):
        return OneForm(-self.comp_dx, -self.comp_dy)

    def __mul__(self, a):
        return OneForm(self.comp_dx * a, self.comp_dy * a)

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-10):
        return self.comp_dx.allclose(other.comp_dx, atol) and self.comp_dy.allclose(other.comp_dy, atol)


@dataclass(frozen=True, eq=False)
class TwoForm:
    """omega = density dx^dy."""

    density: ScalarField

    def __post_init__(self):
        object.__setattr__(self, "density", _as_field(self.density))

    @property
    def max_mode(self):
        return self.density.max_mode

    def __add__(self, other):
        return TwoForm(self.density + other.density)

    def __sub__(self, other):
        return TwoForm(self.density - other.density)

    def __mul__(self, a):
        return TwoForm(self.density * a)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    """X = comp_x d/dx + comp_y d/dy. May vanish somewhere; callers check."""

    comp_x: ScalarField
    comp_y: ScalarField

    def __post_init__(self):
        a, b = _as_field(self.comp_x), _as_field(self.comp_y)
        M = max(a.max_mode, b.max_mode)
        object.__setattr__(self, "comp_x", a.promote(M))
        object.__setattr__(self, "comp_y", b.promote(M))

    @property
    def max_mode(self):
        return self.comp_x.max_mode

    @classmethod
    def product_flow(cls, f):
        """Y = f(y) d/dx."""
        return cls(f, ScalarField.zeros(f.max_mode))

    def is_product_flow(self, tol=0.0):
        """True when X = f(y) d/dx."""
        return self.comp_x.depends_on_y_only(tol) and self.comp_y.l1_norm() <= tol

    def __mul__(self, a):
        return VectorField(self.comp_x * a, self.comp_y * a)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(-self.comp_x, -self.comp_y)


# -- operators ---------------------------------------------------------------


def exterior_derivative_0(g: ScalarField) -> OneForm:
    return OneForm(g.dx(), g.dy())


def exterior_derivative_1(theta: OneForm) -> TwoForm:
    return TwoForm(theta.comp_dy.dx() - theta.comp_dx.dy())


def pair(theta: OneForm, X: VectorField) -> ScalarField:
    """theta . X, exact product (no aliasing)."""
    return theta.comp_dx.multiply(X.comp_x) + theta.comp_dy.multiply(X.comp_y)


def directional_derivative(X: VectorField, g: ScalarField) -> ScalarField:
    """X g = dg . X."""
    return pair(exterior_derivative_0(g), X)


def interior_product_1(X: VectorField, theta: OneForm) -> ScalarField:
    return pair(theta, X)


def interior_product_2(X: VectorField, omega: TwoForm) -> OneForm:
    w = omega.density
    return OneForm(-w.multiply(X.comp_y), w.multiply(X.comp_x))


def lie_derivative_cartan_parts(X: VectorField, theta: OneForm):
    """Return ``(i_X d theta, d(theta . X))``; their sum is the Lie derivative."""
    return interior_product_2(X, exterior_derivative_1(theta)), exterior_derivative_0(pair(theta, X))


def lie_derivative(X: VectorField, theta: OneForm) -> OneForm:
    contracted, exact = lie_derivative_cartan_parts(X, theta)
    return contracted + exact


# -- norms, positivity, exactness ----------------------------------------------


def _default_grid(max_mode):
    return max(4 * (max_mode + 1), 16)


def sup_norm(obj, grid_n=None) -> float:
    """Max |value| on a 4x-oversampled grid.

    For forms and vector fields this is the max over components.
    """
    if isinstance(obj, ScalarField):
        fields = [obj]
    elif isinstance(obj, OneForm):
        fields = [obj.comp_dx, obj.comp_dy]
    elif isinstance(obj, TwoForm):
        fields = [obj.density]
    elif isinstance(obj, VectorField):
        fields = [obj.comp_x, obj.comp_y]
    else:
        raise TypeError(f"cannot take sup norm of {type(obj).__name__}")
    M = max(f.max_mode for f in fields)
    n = grid_n or _default_grid(M)
    return max(float(np.max(np.abs(f.on_grid(n)))) for f in fields)


def min_on_grid(g: ScalarField, grid_n: int) -> float:
    """Minimum of ``g`` over the uniform ``grid_n x grid_n`` grid.

    This is a grid certificate, not a global minimum; see :func:`grid_certificate`
    for a rigorous lower bound.
    """
    need = 4 * (g.max_mode + 1)
    if grid_n < need:
        raise ValueError(
            f"grid_n={grid_n} is below 4*(max_mode+1)={need}; "
            "a coarser grid can miss the minimum of a degree-"
            f"{g.max_mode} trigonometric polynomial"
        )
    return float(np.min(g.on_grid(grid_n)))


def grid_certificate(g: ScalarField, grid_n: int):
    """Grid minimum plus a rigorous lower bound for min g over all of T^2.

    Every point lies within half a cell of a grid node in each coordinate, so
    ``min g >= grid_min - (h/2)(sup|g_x| + sup|g_y|)`` with the derivative sups
    bounded by coefficient l1 norms.

    Returns ``(grid_min, lower_bound)``.
    """
    gmin = min_on_grid(g, grid_n)
    h = 1.0 / grid_n
    slope = g.dx().l1_norm() + g.dy().l1_norm()
    return gmin, gmin - 0.5 * h * slope


@dataclass(frozen=True)
class ExactnessResult:
    is_exact: bool
    primitive: ScalarField | None
    closedness_residual: float
    periods: tuple

    def __iter__(self):
        # allows ``is_exact, primitive = exactness_test(...)``
        return iter((self.is_exact, self.primitive))


def primitive_of(theta: OneForm) -> ScalarField:
    """Mode-wise L with dL = theta whenever theta is exact; mean(L) = 0."""
    M = theta.max_mode
    k = _wavenumbers(M)
    a = theta.comp_dx.coeffs
    b = theta.comp_dy.coeffs
    L = np.zeros_like(a)
    mx = k != 0
    L[mx, :] = a[mx, :] / (TWO_PI * 1j * k[mx])[:, None]
    ny = k != 0
    L[M, ny] = b[M, ny] / (TWO_PI * 1j * k[ny])
    return ScalarField(L)


def exactness_test(theta: OneForm, tol: float = DEFAULT_TOL) -> ExactnessResult:
    """Decide exactness on T^2: closed and both periods vanish.

    The returned object unpacks as ``(is_exact, primitive)``; the primitive
    is ``None`` when the form is not exact.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    closed = sup_norm(exterior_derivative_1(theta))
    px, py = theta.periods()
    ok = closed <= tol and abs(px) <= tol and abs(py) <= tol
    return ExactnessResult(ok, primitive_of(theta) if ok else None, closed, (px, py))


def project(func: Callable, max_mode: int, oversample: int = 4):
    """Shorthand for :meth:`ScalarField.from_function`."""
    return ScalarField.from_function(func, max_mode, oversample=oversample)
