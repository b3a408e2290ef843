"""Truncated multivariate Taylor jets with complex coefficients.

A :class:`Jet` stores the Taylor coefficients of a function of ``nvars`` real
variables at a base point, for every multi-index of total degree up to
``order``.  Coefficients are kept densely in graded-lexicographic order, so a
jet of order ``k`` is a prefix of the same function's jet of any higher order.

All arithmetic is exact up to floating point: products are truncated Cauchy
products, quotients are solved degree by degree, and analytic functions are
applied by composing their univariate Taylor series with the non-constant part
of the argument.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import SingularPointError

MAX_ORDER = 4
MAX_VARS = 4

__all__ = [
    "Jet",
    "jet_variable",
    "constant",
    "variables",
    "arith",
    "analytic",
    "extract",
    "wirtinger",
    "partial",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "power",
    "compose",
    "integrate_gradient",
    "integrate_along",
    "multi_indices",
]


def _compositions(total: int, nvars: int):
    if nvars == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, nvars - 1):
            yield (first,) + rest


@functools.lru_cache(maxsize=None)
def multi_indices(nvars: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of total degree <= order, graded-lex ordered."""
    out = []
    for d in range(order + 1):
        out.extend(_compositions(d, nvars))
    return tuple(out)


class _Basis:
    """Index tables for one (nvars, order) pair."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.indices = multi_indices(nvars, order)
        self.size = len(self.indices)
        self.pos = {m: i for i, m in enumerate(self.indices)}
        self.factorials = np.array(
            [math.prod(math.factorial(k) for k in m) for m in self.indices], dtype=float
        )
        ii, jj, kk = [], [], []
        for i, mi in enumerate(self.indices):
            for j, mj in enumerate(self.indices):
                mk = tuple(a + b for a, b in zip(mi, mj))
                if sum(mk) <= order:
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.pos[mk])
        self.mul_i = np.array(ii, dtype=np.intp)
        self.mul_j = np.array(jj, dtype=np.intp)
        self.mul_k = np.array(kk, dtype=np.intp)
        # for division: contributions to k from pairs with i != 0
        self.div_terms = []
        for k in range(self.size):
            sel = (self.mul_k == k) & (self.mul_i != 0)
            self.div_terms.append((self.mul_i[sel], self.mul_j[sel]))
        self.degrees = np.array([sum(m) for m in self.indices])


@functools.lru_cache(maxsize=None)
def _basis(nvars: int, order: int) -> _Basis:
    return _Basis(nvars, order)


def _check_shape(nvars: int, order: int) -> None:
    if not 1 <= nvars <= MAX_VARS:
        raise ValueError(f"nvars must be in 1..{MAX_VARS}, got {nvars}")
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")


class Jet:
    """Truncated Taylor expansion of a complex-valued function at a point."""

    __slots__ = ("coeffs", "nvars", "order")
    __array_priority__ = 100  # keep numpy scalars from broadcasting over us

    def __init__(self, coeffs, nvars: int, order: int):
        _check_shape(nvars, order)
        coeffs = np.asarray(coeffs, dtype=complex)
        size = _basis(nvars, order).size
        if coeffs.shape != (size,):
            raise ValueError(f"expected {size} coefficients, got shape {coeffs.shape}")
        self.coeffs = coeffs
        self.nvars = nvars
        self.order = order

    # -- basic accessors -------------------------------------------------

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    @property
    def basis(self) -> _Basis:
        return _basis(self.nvars, self.order)

    def coeff(self, m: Sequence[int]) -> complex:
        return complex(self.coeffs[self.basis.pos[tuple(m)]])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        return Jet(self.coeffs[: _basis(self.nvars, order).size], self.nvars, order)

    def conj(self) -> "Jet":
        """Jet of the complex conjugate function (valid at real base points)."""
        return Jet(self.coeffs.conj(), self.nvars, self.order)

    @property
    def real(self) -> "Jet":
        return Jet(self.coeffs.real.astype(complex), self.nvars, self.order)

    @property
    def imag(self) -> "Jet":
        return Jet(self.coeffs.imag.astype(complex), self.nvars, self.order)

    def deriv(self, var: int) -> "Jet":
        """Jet of the partial derivative along ``var``; the order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        src = self.basis
        dst = _basis(self.nvars, self.order - 1)
        out = np.empty(dst.size, dtype=complex)
        for i, m in enumerate(dst.indices):
            up = list(m)
            up[var] += 1
            out[i] = self.coeffs[src.pos[tuple(up)]] * up[var]
        return Jet(out, self.nvars, self.order - 1)

    def scale_vars(self, factors: Sequence[complex]) -> "Jet":
        """Jet of f(factors[0]*y0, ...) expressed in the scaled variables y."""
        f = np.asarray(factors, dtype=complex)
        mult = np.array([np.prod(f ** np.array(m)) for m in self.basis.indices])
        return Jet(self.coeffs * mult, self.nvars, self.order)

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value:.6g})"

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            order = min(self.order, other.order)
            return self.truncate(order).coeffs, other.truncate(order).coeffs, order
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            c = self.coeffs.copy()
            c[0] += other
            return Jet(c, self.nvars, self.order)
        a, b, order = pair
        return Jet(a + b, self.nvars, order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return Jet(self.coeffs * other, self.nvars, self.order)
        a, b, order = pair
        return Jet(_cauchy(a, b, self.nvars, order), self.nvars, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        pair = self._coerce(other)
        if pair is None:
            if other == 0:
                raise SingularPointError("division by zero scalar", other)
            return Jet(self.coeffs / other, self.nvars, self.order)
        a, b, order = pair
        return Jet(_divide(a, b, self.nvars, order), self.nvars, order)

    def __rtruediv__(self, other):
        return constant(other, self.nvars, self.order) / self

    def __pow__(self, exponent):
        return power(self, exponent)


def _cauchy(a: np.ndarray, b: np.ndarray, nvars: int, order: int) -> np.ndarray:
    B = _basis(nvars, order)
    prod = a[B.mul_i] * b[B.mul_j]
    re = np.bincount(B.mul_k, weights=prod.real, minlength=B.size)
    im = np.bincount(B.mul_k, weights=prod.imag, minlength=B.size)
    return re + 1j * im


def _divide(a: np.ndarray, b: np.ndarray, nvars: int, order: int) -> np.ndarray:
    b0 = b[0]
    if b0 == 0:
        raise SingularPointError("division by a jet with zero constant term", complex(b0))
    B = _basis(nvars, order)
    c = np.zeros(B.size, dtype=complex)
    for k in range(B.size):
        ii, jj = B.div_terms[k]
        c[k] = (a[k] - np.dot(b[ii], c[jj])) / b0
    return c


# -- constructors ---------------------------------------------------------


def constant(value: complex, nvars: int, order: int) -> Jet:
    _check_shape(nvars, order)
    c = np.zeros(_basis(nvars, order).size, dtype=complex)
    c[0] = value
    return Jet(c, nvars, order)


def jet_variable(index: int, value: complex, order: int, nvars: int) -> Jet:
    """Jet of the coordinate function ``x_index`` at ``x_index = value``."""
    _check_shape(nvars, order)
    if not 0 <= index < nvars:
        raise ValueError(f"variable index {index} out of range for nvars={nvars}")
    jet = constant(value, nvars, order)
    if order >= 1:
        unit = [0] * nvars
        unit[index] = 1
        jet.coeffs[jet.basis.pos[tuple(unit)]] = 1.0
    return jet


def variables(point: Sequence[complex], order: int) -> list[Jet]:
    """Coordinate jets for every component of ``point``."""
    n = len(point)
    return [jet_variable(i, point[i], order, n) for i in range(n)]


# -- univariate composition ------------------------------------------------


def _compose_series(a: Jet, taylor: Sequence[complex]) -> Jet:
    """Evaluate sum_k taylor[k] * (a - a0)**k, truncated at a.order."""
    h = Jet(a.coeffs.copy(), a.nvars, a.order)
    h.coeffs[0] = 0.0
    result = constant(taylor[a.order], a.nvars, a.order)
    for k in range(a.order - 1, -1, -1):
        result = result * h + taylor[k]
    return result


def _on_branch_cut(x: complex) -> bool:
    return x.imag == 0 and x.real <= 0


def exp(a: Jet) -> Jet:
    e = cmath.exp(a.value)
    return _compose_series(a, [e / math.factorial(k) for k in range(a.order + 1)])


def log(a: Jet) -> Jet:
    x = a.value
    if x == 0:
        raise SingularPointError("log of zero", x)
    if _on_branch_cut(x):
        raise SingularPointError(f"log argument {x} lies on the branch cut", x)
    taylor = [cmath.log(x)]
    taylor += [(-1) ** (k + 1) / (k * x**k) for k in range(1, a.order + 1)]
    return _compose_series(a, taylor)


def _binom(s: complex, k: int) -> complex:
    out = 1.0
    for j in range(k):
        out *= (s - j) / (j + 1)
    return out


def power(a: Jet, exponent) -> Jet:
    """Principal-branch power; integer exponents are allowed at zero base."""
    x = a.value
    is_int = float(np.real(exponent)).is_integer() and np.imag(exponent) == 0
    if is_int:
        n = int(np.real(exponent))
        if n >= 0:
            result = constant(1.0, a.nvars, a.order)
            base = a
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        if x == 0:
            raise SingularPointError("negative power of zero", x)
        return 1.0 / power(a, -n)
    if x == 0 or _on_branch_cut(x):
        raise SingularPointError(f"non-integer power at {x} (branch cut or zero)", x)
    taylor = [_binom(exponent, k) * x ** (exponent - k) for k in range(a.order + 1)]
    return _compose_series(a, taylor)


def sqrt(a: Jet) -> Jet:
    x = a.value
    if x == 0 or _on_branch_cut(x):
        raise SingularPointError(f"sqrt argument {x} on branch cut or zero", x)
    return power(a, 0.5)


def sin(a: Jet) -> Jet:
    s, c = cmath.sin(a.value), cmath.cos(a.value)
    cycle = [s, c, -s, -c]
    return _compose_series(a, [cycle[k % 4] / math.factorial(k) for k in range(a.order + 1)])


def cos(a: Jet) -> Jet:
    s, c = cmath.sin(a.value), cmath.cos(a.value)
    cycle = [c, -s, -c, s]
    return _compose_series(a, [cycle[k % 4] / math.factorial(k) for k in range(a.order + 1)])


_ANALYTIC: dict[str, Callable[[Jet], Jet]] = {
    "exp": exp,
    "ln": log,
    "log": log,
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
}


def analytic(fn: str, a: Jet, exponent=None) -> Jet:
    """Apply a named analytic function (``pow`` takes ``exponent``)."""
    if fn == "pow":
        if exponent is None:
            raise ValueError("pow requires an exponent")
        return power(a, exponent)
    try:
        return _ANALYTIC[fn](a)
    except KeyError:
        raise ValueError(f"unknown analytic function {fn!r}") from None


def arith(op: str, a: Jet, b=None) -> Jet:
    """Functional form of jet arithmetic: add, sub, mul, div, neg, scale."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "neg":
        return -a
    if op == "scale":
        if isinstance(b, Jet):
            raise TypeError("scale takes a scalar")
        return a * b
    raise ValueError(f"unknown op {op!r}")


# -- derivatives -------------------------------------------------------------


def extract(a: Jet, m: Sequence[int]) -> complex:
    """Partial derivative of multi-index ``m`` at the base point."""
    m = tuple(int(k) for k in m)
    if len(m) != a.nvars or min(m) < 0:
        raise ValueError(f"bad multi-index {m} for nvars={a.nvars}")
    if sum(m) > a.order:
        raise ValueError(f"derivative order {sum(m)} exceeds jet order {a.order}")
    i = a.basis.pos[m]
    return complex(a.coeffs[i] * a.basis.factorials[i])


@functools.lru_cache(maxsize=4096)
def _expand_operators(ops: tuple[tuple[complex, ...], ...], nvars: int):
    """Expand a product of first-order operators into real multi-indices."""
    terms = {(0,) * nvars: 1.0 + 0j}
    for op in ops:
        nxt: dict = {}
        for m, c in terms.items():
            for i, w in enumerate(op):
                if w == 0:
                    continue
                mm = list(m)
                mm[i] += 1
                mm = tuple(mm)
                nxt[mm] = nxt.get(mm, 0) + c * w
        terms = nxt
    return tuple((m, c) for m, c in terms.items() if c != 0)


def partial(a: Jet, ops: Iterable[Sequence[complex]]) -> complex:
    """Apply a product of constant-coefficient first-order operators.

    Each operator is a vector of weights over the real variables, so the
    Wirtinger derivative along the pair (x, y) is ``(0.5, -0.5j)`` on those
    positions.
    """
    key = tuple(tuple(complex(w) for w in op) for op in ops)
    for op in key:
        if len(op) != a.nvars:
            raise ValueError("operator length does not match nvars")
    if len(key) > a.order:
        raise ValueError(f"derivative order {len(key)} exceeds jet order {a.order}")
    total = 0j
    for m, c in _expand_operators(key, a.nvars):
        total += c * extract(a, m)
    return total


def _wirtinger_ops(holo_pairs, m_w, nvars):
    flat = [i for pair in holo_pairs for i in pair]
    if len(set(flat)) != len(flat) or any(not 0 <= i < nvars for i in flat):
        raise ValueError(f"malformed holomorphic pairing {holo_pairs}")
    if len(m_w) != 2 * len(holo_pairs) or min(m_w, default=0) < 0:
        raise ValueError("Wirtinger multi-index must give (n_z, n_zbar) per pair")
    ops = []
    for (ix, iy), nz, nzb in zip(holo_pairs, m_w[0::2], m_w[1::2]):
        dz = [0j] * nvars
        dz[ix], dz[iy] = 0.5, -0.5j
        dzb = [0j] * nvars
        dzb[ix], dzb[iy] = 0.5, 0.5j
        ops += [tuple(dz)] * nz + [tuple(dzb)] * nzb
    return ops


def wirtinger(a: Jet, holo_pairs: Sequence[tuple[int, int]], m_w: Sequence[int]) -> complex:
    """Mixed Wirtinger partial at the base point.

    ``holo_pairs`` lists ``(re_index, im_index)`` for each complex coordinate
    ``z = x + i y``; ``m_w`` gives ``(n_z, n_zbar)`` counts for each pair in
    order.  For example ``m_w = (1, 1, 0, 0)`` with two pairs is u_{1 1bar}.
    """
    return partial(a, _wirtinger_ops(holo_pairs, tuple(m_w), a.nvars))


def wirtinger_deriv(a: Jet, pair: tuple[int, int], conjugate: bool = False) -> Jet:
    """Jet of d/dz (or d/dzbar) of ``a`` for the complex coordinate ``pair``."""
    ix, iy = pair
    dx, dy = a.deriv(ix), a.deriv(iy)
    return 0.5 * (dx + 1j * dy) if conjugate else 0.5 * (dx - 1j * dy)


# -- composition and integration --------------------------------------------


def compose(outer: Jet, inner: Sequence[Jet]) -> Jet:
    """Substitute jets for the variables of ``outer``.

    ``outer`` is a Taylor expansion about a base point P; ``inner[i]`` must be
    jets (in new variables) whose constant terms equal P_i.  The result is
    truncated to the smaller of the orders involved.
    """
    if len(inner) != outer.nvars:
        raise ValueError("need one inner jet per variable of the outer jet")
    nv = inner[0].nvars
    order = min(outer.order, min(j.order for j in inner))
    hs = []
    for j in inner:
        h = Jet(j.truncate(order).coeffs.copy(), nv, order)
        h.coeffs[0] = 0.0
        hs.append(h)
    powers = []
    for h in hs:
        p = [constant(1.0, nv, order)]
        for _ in range(order):
            p.append(p[-1] * h)
        powers.append(p)
    out = np.zeros(_basis(nv, order).size, dtype=complex)
    ob = outer.basis
    for idx, m in enumerate(ob.indices):
        if sum(m) > order:
            break
        c = outer.coeffs[idx]
        if c == 0:
            continue
        term = None
        for var, e in enumerate(m):
            if e:
                term = powers[var][e] if term is None else term * powers[var][e]
        out += c * (term.coeffs if term is not None else powers[0][0].coeffs)
    return Jet(out, nv, order)


def integrate_gradient(grad: Sequence[Jet], value: complex) -> Jet:
    """Jet of order k+1 of the function whose gradient jets (order k) are given.

    Each coefficient is taken from the first variable present in its
    multi-index; the gradient is assumed to be exact (closed).
    """
    nv = grad[0].nvars
    order = min(g.order for g in grad) + 1
    B = _basis(nv, order)
    out = np.zeros(B.size, dtype=complex)
    out[0] = value
    for idx, m in enumerate(B.indices[1:], start=1):
        var = next(i for i, e in enumerate(m) if e)
        lower = list(m)
        lower[var] -= 1
        out[idx] = grad[var].coeff(lower) / m[var]
    return Jet(out, nv, order)


def integrate_along(rate: Jet, var: int, base: Jet) -> Jet:
    """Combine a jet with the antiderivative of ``rate`` along ``var``.

    Coefficients whose multi-index has no ``var`` component come from
    ``base``; all others are integrated from ``rate`` (which needs order at
    least ``base.order - 1``).
    """
    order = base.order
    B = base.basis
    out = base.coeffs.copy()
    for idx, m in enumerate(B.indices):
        if m[var]:
            lower = list(m)
            lower[var] -= 1
            out[idx] = rate.coeff(lower) / m[var]
    return Jet(out, base.nvars, order)
