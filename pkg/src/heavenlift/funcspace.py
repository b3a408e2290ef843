"""Polynomial stand-ins for the arbitrary functions b(z), r(y), k(y).

The lifted solutions hold for arbitrary holomorphic ``b`` and smooth real
``r``, ``k``.  Polynomials keep every primitive those formulas need in closed
form: the double-integral kernel reduces to polynomial division plus a
logarithm, and only the y-integral term needs quadrature.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import QuadratureError, SingularPointError
from .jets import Jet

MAX_DEGREE = 8


def _horner(coeffs: Sequence[complex], x):
    out = 0j
    for c in reversed(coeffs):
        out = out * x + c
    return out


@dataclass(frozen=True)
class HolomorphicPoly:
    """b(z) = sum_k coeffs[k] z^k; the conjugate function uses conj(coeffs)."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        c = tuple(complex(v) for v in self.coeffs) or (0j,)
        if len(c) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(c) - 1} exceeds {MAX_DEGREE}")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def conjugate(self) -> "HolomorphicPoly":
        return HolomorphicPoly(tuple(c.conjugate() for c in self.coeffs))

    def derivative(self) -> "HolomorphicPoly":
        return HolomorphicPoly(tuple(k * c for k, c in enumerate(self.coeffs))[1:] or (0j,))

    def __call__(self, z):
        return _horner(self.coeffs, z)


@dataclass(frozen=True)
class RealSmoothFn:
    """Real polynomial r(y) = sum_k coeffs[k] y^k."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs) or (0.0,)
        object.__setattr__(self, "coeffs", c)

    def derivative(self) -> "RealSmoothFn":
        return RealSmoothFn(tuple(k * c for k, c in enumerate(self.coeffs))[1:] or (0.0,))

    def __call__(self, y):
        return _horner(self.coeffs, y)


def eval_poly(f: HolomorphicPoly | RealSmoothFn, x: Jet) -> Jet:
    """Horner evaluation of ``f`` on a jet argument."""
    out = jets.constant(f.coeffs[-1], x.nvars, x.order)
    for c in reversed(f.coeffs[:-1]):
        out = out * x + c
    return out


# -- double integral kernel ------------------------------------------------


def _kernel_polynomials(coeffs: Sequence[complex]):
    """Divide b(t) by (t + w) with w symbolic.

    Returns ``(Q, R)`` where Q[i, j] is the coefficient of z^i w^j of the
    z-antiderivative of the quotient and R[j] the coefficient of w^j in the
    remainder b(-w).
    """
    d = len(coeffs) - 1
    width = d + 1
    R = np.zeros(width, dtype=complex)
    Q = np.zeros((d + 1, width), dtype=complex)
    if d == 0:
        R[0] = coeffs[0]
        return Q, R
    # quotient coefficients q_k(w), k = 0..d-1, as arrays over powers of w
    q = [np.zeros(width, dtype=complex) for _ in range(d)]
    q[d - 1][0] = coeffs[d]
    for k in range(d - 1, 0, -1):
        q[k - 1][0] = coeffs[k]
        q[k - 1][1:] -= q[k][:-1]
    R[0] = coeffs[0]
    R[1:] -= q[0][:-1]
    for k in range(d):
        Q[k + 1] = q[k] / (k + 1)
    return Q, R


def _eval_bivariate(Q: np.ndarray, z: Jet, w: Jet) -> Jet:
    out = jets.constant(0.0, z.nvars, min(z.order, w.order))
    zp = [jets.constant(1.0, z.nvars, z.order)]
    wp = [jets.constant(1.0, w.nvars, w.order)]
    for _ in range(Q.shape[0]):
        zp.append(zp[-1] * z)
    for _ in range(Q.shape[1]):
        wp.append(wp[-1] * w)
    for i in range(Q.shape[0]):
        for j in range(Q.shape[1]):
            if Q[i, j] != 0:
                out = out + Q[i, j] * (zp[i] * wp[j])
    return out


def _eval_univariate(R: np.ndarray, w: Jet) -> Jet:
    out = jets.constant(0.0, w.nvars, w.order)
    for c in reversed(R):
        out = out * w + c
    return out


def kernel_half(b: HolomorphicPoly, z: Jet, zbar: Jet) -> Jet:
    """The b-only part of the kernel: d_z of it equals -b(z)/(z + zbar).

    Gauge: -(Q(z, zbar) + b(-zbar) ln(z + zbar)) where Q is the
    z-antiderivative (vanishing at z = 0) of the quotient of b(t) by
    (t + zbar).
    """
    s = (z + zbar).value
    if s.real <= 0:
        raise SingularPointError(f"z + zbar = {s} must have positive real part", s)
    Q, R = _kernel_polynomials(b.coeffs)
    return -(_eval_bivariate(Q, z, zbar) + _eval_univariate(R, zbar) * jets.log(z + zbar))


def double_integral_kernel(b: HolomorphicPoly, z: Jet, zbar: Jet) -> Jet:
    """K(z, zbar) with d_z d_zbar K = (b(z) + conj_b(zbar)) / (z + zbar)^2.

    K is the b-half from :func:`kernel_half` plus its mirror image for the
    conjugate function with the roles of z and zbar exchanged, so K is real
    whenever zbar = conj(z).
    """
    return kernel_half(b, z, zbar) + kernel_half(b.conjugate(), zbar, z)


def log_antiderivative(b: HolomorphicPoly, z: Jet) -> Jet:
    """Primitive of b(z)/z: b(0) ln z + sum_{k>=1} c_k z^k / k."""
    out = b.coeffs[0] * jets.log(z)
    for k, c in enumerate(b.coeffs[1:], start=1):
        if c != 0:
            out = out + (c / k) * z**k
    return out


# -- y-integral term ---------------------------------------------------------


def adaptive_simpson(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 40,
) -> np.ndarray:
    """Vector-valued adaptive Simpson quadrature with absolute tolerance."""
    if a == b:
        return np.zeros_like(np.asarray(f(a)))

    def simpson(fa, fm, fb, h):
        return (fa + 4 * fm + fb) * h / 6

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(flo, flm, fmid, mid - lo)
        right = simpson(fmid, frm, fhi, hi - mid)
        err = np.max(np.abs(left + right - whole))
        if err <= 15 * eps:
            return left + right + (left + right - whole) / 15
        if depth >= max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge on [{lo}, {hi}]")
        return recurse(lo, mid, flo, flm, fmid, left, eps / 2, depth + 1) + recurse(
            mid, hi, fmid, frm, fhi, right, eps / 2, depth + 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, b - a)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def _log_moment_integrand(w0: complex, shift: Callable[[float], complex], order: int):
    """s -> [ln(w0 + c(s)), (w0 + c(s))^-1, ..., (w0 + c(s))^-order]."""

    def f(s):
        a = w0 + shift(s)
        if a == 0 or (a.imag == 0 and a.real <= 0):
            raise SingularPointError(f"log argument {a} on branch cut at s={s}", a)
        out = np.empty(order + 1, dtype=complex)
        out[0] = cmath.log(a)
        inv = 1 / a
        p = 1.0 + 0j
        for n in range(1, order + 1):
            p *= inv
            out[n] = p
        return out

    return f


def _log_integral_jet(moments: np.ndarray, delta: Jet) -> Jet:
    """Jet of int ln(w0 + c(s) + delta) ds from the moments of the integrand."""
    out = jets.constant(moments[0], delta.nvars, delta.order)
    dp = jets.constant(1.0, delta.nvars, delta.order)
    for n in range(1, delta.order + 1):
        dp = dp * delta
        out = out + ((-1) ** (n - 1) / n) * moments[n] * dp
    return out


def y_integral_term(
    k: RealSmoothFn, y: float, z: Jet, zbar: Jet, tol: float = 1e-12
) -> Jet:
    """T = 2i * int_0^y ln[(zbar + 2i k(s)) / (z - 2i k(s))] ds, y held fixed.

    The result carries z/zbar-direction derivatives only.  Each Taylor
    coefficient is an integral of a closed-form derivative of the logarithm,
    computed by adaptive Simpson.
    """
    order = min(z.order, zbar.order)
    z0, zb0 = z.value, zbar.value
    plus = _log_moment_integrand(zb0, lambda s: 2j * k(s), order)
    minus = _log_moment_integrand(z0, lambda s: -2j * k(s), order)
    both = lambda s: np.concatenate([plus(s), minus(s)])
    m = adaptive_simpson(both, 0.0, float(y), tol=tol)
    jp = _log_integral_jet(m[: order + 1], zbar.truncate(order) - zb0)
    jm = _log_integral_jet(m[order + 1 :], z.truncate(order) - z0)
    return 2j * (jp - jm)


def y_integral_rate(k: RealSmoothFn, y: Jet, z: Jet, zbar: Jet) -> Jet:
    """Closed-form T_y = 2i ln[(zbar + 2i k(y)) / (z - 2i k(y))] as a jet."""
    ky = eval_poly(k, y)
    return 2j * (jets.log(zbar + 2j * ky) - jets.log(z - 2j * ky))
