"""Residual operators for the Monge-Ampere family of equations and their relatives.

Every equation is registered under an :class:`EquationId` together with the
chart it is written in.  A residual is the left-hand side minus the right-hand
side, evaluated from exact jet partials; complex-variable derivatives are
Wirtinger combinations of the chart's real partials.

Besides the raw value, a residual carries ``scale`` (the largest absolute
term in the equation) and ``normalized = |value| / max(scale, 1)``, which is
what pass/fail decisions use.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import jets
from .errors import ChartMismatchError, ConsistencyError, DegenerateModeError
from .jets import Jet
from .solutions import Chart, FieldEvaluator

_H = 0.5
_WZ = (0.5, -0.5j)
_WZB = (0.5, 0.5j)


def _op(n, **weights):
    v = [0j] * n
    for k, w in weights.items():
        v[int(k[1:])] = w
    return tuple(v)


def _wpair(i, j, conj=False):
    v = [0j] * 4
    v[i], v[j] = (_WZB if conj else _WZ)
    return tuple(v)


def _unit(i):
    v = [0j] * 4
    v[i] = 1.0
    return tuple(v)


# first-order operators available in each chart, by name
CHART_OPERATORS: dict[Chart, dict[str, tuple]] = {
    Chart.ORIGINAL: {"1": _wpair(0, 1), "1b": _wpair(0, 1, True), "2": _wpair(2, 3), "2b": _wpair(2, 3, True)},
    Chart.REAL_XYZT: {"x": _unit(0), "y": _unit(1), "z": _unit(2), "t": _unit(3)},
    Chart.LEGENDRE_CMA: {
        "p": _wpair(0, 1),
        "pb": _wpair(0, 1, True),
        "2": _wpair(2, 3),
        "2b": _wpair(2, 3, True),
        "alpha": _unit(0),
        "beta": _unit(1),
    },
    Chart.LEGENDRE_HCMA: {"p": _unit(0), "q": _unit(1), "t": _unit(2), "z": _unit(3)},
    Chart.ROT_LEGENDRE: {
        "x": _unit(0),
        "y": _unit(1),
        "q": _wpair(0, 1),
        "qb": _wpair(0, 1, True),
        "z": _wpair(2, 3),
        "zb": _wpair(2, 3, True),
    },
}


class Derivs:
    """Named partial derivatives of one jet in one chart."""

    def __init__(self, jet: Jet, chart: Chart):
        self.jet = jet
        self.chart = chart
        self._ops = CHART_OPERATORS[chart]
        self._cache: dict[tuple, complex] = {}

    @property
    def val(self) -> complex:
        return self.jet.value

    def d(self, *names: str) -> complex:
        key = tuple(sorted(names))
        if key not in self._cache:
            self._cache[key] = jets.partial(self.jet, [self._ops[n] for n in key])
        return self._cache[key]


# -- equation registry -------------------------------------------------------------


class EquationId(enum.Enum):
    CMA_ELLIPTIC = "CMA_ELLIPTIC"
    CMA_HYPERBOLIC = "CMA_HYPERBOLIC"
    CMA_REAL = "CMA_REAL"
    CMA_REDUCED = "CMA_REDUCED"
    LAPLACE3 = "LAPLACE3"
    HELMHOLTZ = "HELMHOLTZ"
    CMA_LEGENDRE = "CMA_LEGENDRE"
    VEQ_PP = "VEQ_PP"
    VEQ_PP_CONJ = "VEQ_PP_CONJ"
    VEQ_PZBAR = "VEQ_PZBAR"
    VEQ_PZBAR_CONJ = "VEQ_PZBAR_CONJ"
    VEQ_ZZBAR = "VEQ_ZZBAR"
    VEQ_UNIT = "VEQ_UNIT"
    W_LIN_1 = "W_LIN_1"
    W_LIN_2 = "W_LIN_2"
    W_LIN_3 = "W_LIN_3"
    W_LIN_4 = "W_LIN_4"
    W_LIN_1_CONJ = "W_LIN_1_CONJ"
    W_LIN_2_CONJ = "W_LIN_2_CONJ"
    W_LIN_3_CONJ = "W_LIN_3_CONJ"
    W_LIN_4_CONJ = "W_LIN_4_CONJ"
    W_WAVE = "W_WAVE"
    LAPLACE3_W = "LAPLACE3_W"
    HCMA_REAL = "HCMA_REAL"
    HCMA_REDUCED = "HCMA_REDUCED"
    WAVE3 = "WAVE3"
    HCMA_LEGENDRE = "HCMA_LEGENDRE"
    PARTNER_A = "PARTNER_A"
    PARTNER_B = "PARTNER_B"
    PARTNER_C = "PARTNER_C"
    HCMA_LEG_ROT = "HCMA_LEG_ROT"
    ROT_CONSTRAINT_1 = "ROT_CONSTRAINT_1"
    ROT_CONSTRAINT_2 = "ROT_CONSTRAINT_2"
    ROT_CONSTRAINT_XY_1 = "ROT_CONSTRAINT_XY_1"
    ROT_CONSTRAINT_XY_2 = "ROT_CONSTRAINT_XY_2"
    BF_COMBINED = "BF_COMBINED"
    BF_REAL = "BF_REAL"
    BF_V = "BF_V"
    BF_ELLIPTIC = "BF_ELLIPTIC"
    OMEGA_SYM = "OMEGA_SYM"
    BACKLUND_1 = "BACKLUND_1"
    BACKLUND_2 = "BACKLUND_2"
    LIE_Y = "LIE_Y"
    SYM_LINEARIZATION = "SYM_LINEARIZATION"
    PARTNER_POT_1 = "PARTNER_POT_1"
    PARTNER_POT_2 = "PARTNER_POT_2"
    PARTNER_INV_1 = "PARTNER_INV_1"
    PARTNER_INV_2 = "PARTNER_INV_2"
    SELF_PARTNER_1 = "SELF_PARTNER_1"
    SELF_PARTNER_2 = "SELF_PARTNER_2"
    SELF_PARTNER_CONJ_1 = "SELF_PARTNER_CONJ_1"
    SELF_PARTNER_CONJ_2 = "SELF_PARTNER_CONJ_2"
    BASIC_PAIR_1 = "BASIC_PAIR_1"
    BASIC_PAIR_2 = "BASIC_PAIR_2"

    @property
    def spec(self) -> "EquationSpec":
        return EQUATIONS[self]

    @property
    def chart(self) -> Chart:
        return EQUATIONS[self].chart

    @property
    def order(self) -> int:
        return EQUATIONS[self].order

    @property
    def n_aux(self) -> int:
        return EQUATIONS[self].n_aux

    @property
    def quantity(self) -> str:
        return EQUATIONS[self].quantity


@dataclass(frozen=True)
class EquationSpec:
    chart: Chart
    terms: Callable  # (D, *aux_D, ctx) -> list of complex terms summing to the residual
    n_aux: int = 0
    quantity: str = "primary"
    order: int = 2
    linear: bool = False


@dataclass(frozen=True)
class _Ctx:
    lam: complex
    elliptic: bool


EQUATIONS: dict[EquationId, EquationSpec] = {}


def _register(eq: EquationId, chart: Chart, n_aux=0, quantity="primary", linear=False):
    def deco(fn):
        EQUATIONS[eq] = EquationSpec(chart, fn, n_aux, quantity, 2, linear)
        return fn

    return deco


E = EquationId
O, RX, LC, LH, RL = (Chart.ORIGINAL, Chart.REAL_XYZT, Chart.LEGENDRE_CMA, Chart.LEGENDRE_HCMA, Chart.ROT_LEGENDRE)


def _cma_det(D):
    return [D.d("1", "1b") * D.d("2", "2b"), -D.d("1", "2b") * D.d("2", "1b")]


_register(E.CMA_ELLIPTIC, O)(lambda D, c: _cma_det(D) + [-1.0])
_register(E.CMA_HYPERBOLIC, O)(lambda D, c: _cma_det(D) + [1.0])


def _real_det(D):
    d = D.d
    return [
        (d("x", "x") + d("y", "y")) * (d("z", "z") + d("t", "t")),
        -((d("x", "t") + d("y", "z")) ** 2),
        -((d("y", "t") - d("x", "z")) ** 2),
    ]


def _reduced_det(D):
    d = D.d
    return [d("y", "y") * (d("z", "z") + d("t", "t")), -(d("y", "z") ** 2), -(d("y", "t") ** 2)]


_register(E.CMA_REAL, RX)(lambda D, c: _real_det(D) + [-1.0])
_register(E.HCMA_REAL, RX)(lambda D, c: _real_det(D) + [1.0])
_register(E.CMA_REDUCED, RX)(lambda D, c: _reduced_det(D) + [-1.0])
_register(E.HCMA_REDUCED, RX)(lambda D, c: _reduced_det(D) + [1.0])

# Laplace in (p, z2, z2bar) with p the real coordinate 0 of the chart
_register(E.LAPLACE3, LC, linear=True)(lambda D, c: [D.d("2", "2b"), D.d("alpha", "alpha")])
_register(E.HELMHOLTZ, LC, linear=True)(lambda D, c: [D.d("2", "2b"), D.val])


@_register(E.CMA_LEGENDRE, LC)
def _cma_legendre(D, c):
    d = D.d
    return [
        d("p", "pb") * d("2", "2b"),
        -d("p", "2b") * d("pb", "2"),
        -d("p", "p") * d("pb", "pb"),
        d("p", "pb") ** 2,
    ]


def _veq_coeffs(D):
    vp, vpb, v2, v2b = D.d("p"), D.d("pb"), D.d("2"), D.d("2b")
    delta = 1 + vp * vpb
    A = (1 + vp**2 + 1j * v2) / delta
    Ab = (1 + vpb**2 - 1j * v2b) / delta
    B = (v2 * v2b + 1j * (v2 - v2b)) / delta
    C = (vp * v2b + 1j * (vp - vpb)) / delta
    Cb = (vpb * v2 - 1j * (vpb - vp)) / delta
    return A, Ab, B, C, Cb


_register(E.VEQ_PP, LC)(lambda D, c: [D.d("p", "p"), -_veq_coeffs(D)[0] * D.d("p", "pb")])
_register(E.VEQ_PP_CONJ, LC)(lambda D, c: [D.d("pb", "pb"), -_veq_coeffs(D)[1] * D.d("p", "pb")])
_register(E.VEQ_ZZBAR, LC)(lambda D, c: [D.d("2", "2b"), -_veq_coeffs(D)[2] * D.d("p", "pb")])
_register(E.VEQ_PZBAR, LC)(lambda D, c: [D.d("p", "2b"), -_veq_coeffs(D)[3] * D.d("p", "pb")])
_register(E.VEQ_PZBAR_CONJ, LC)(lambda D, c: [D.d("pb", "2"), -_veq_coeffs(D)[4] * D.d("p", "pb")])
_register(E.VEQ_UNIT, LC)(lambda D, c: [D.d("p", "pb"), -1.0, -D.d("p") * D.d("pb")])

_W = dict(quantity="w", linear=True)
_register(E.W_LIN_1, LC, **_W)(lambda D, c: [D.d("p", "pb"), D.val])
_register(E.W_LIN_2, LC, **_W)(lambda D, c: [D.d("p", "p"), D.val, -1j * D.d("2")])
_register(E.W_LIN_3, LC, **_W)(lambda D, c: [D.d("p", "2b"), -1j * D.d("p"), 1j * D.d("pb")])
_register(E.W_LIN_4, LC, **_W)(lambda D, c: [D.d("2", "2b"), -1j * D.d("2"), 1j * D.d("2b")])
_register(E.W_LIN_1_CONJ, LC, **_W)(lambda D, c: [D.d("pb", "p"), D.val])
_register(E.W_LIN_2_CONJ, LC, **_W)(lambda D, c: [D.d("pb", "pb"), D.val, 1j * D.d("2b")])
_register(E.W_LIN_3_CONJ, LC, **_W)(lambda D, c: [D.d("pb", "2"), 1j * D.d("pb"), -1j * D.d("p")])
_register(E.W_LIN_4_CONJ, LC, **_W)(lambda D, c: [D.d("2b", "2"), 1j * D.d("2b"), -1j * D.d("2")])
_register(E.W_WAVE, LC, **_W)(
    lambda D, c: [D.d("2", "2b"), -D.d("p", "p"), -D.d("pb", "pb"), 2 * D.d("p", "pb")]
)
_register(E.LAPLACE3_W, LC, **_W)(lambda D, c: [D.d("2", "2b"), D.d("beta", "beta")])

_register(E.WAVE3, LH, linear=True)(lambda D, c: [D.d("q", "q"), -D.d("t", "t"), -D.d("z", "z")])
_register(E.PARTNER_A, LH, linear=True)(lambda D, c: [D.d("q", "q"), -D.d("p", "z"), -D.d("q", "t")])
_register(E.PARTNER_B, LH, linear=True)(lambda D, c: [D.d("p", "q"), -D.d("q", "z"), D.d("p", "t")])
_register(E.PARTNER_C, LH, linear=True)(lambda D, c: [D.d("q", "q"), -D.d("t", "t"), -D.d("z", "z")])


@_register(E.HCMA_LEGENDRE, LH)
def _hcma_legendre(D, c):
    d = D.d
    return [
        (d("p", "p") + d("q", "q")) * (d("t", "t") + d("z", "z")),
        -((d("p", "t") - d("q", "z")) ** 2),
        -((d("p", "z") + d("q", "t")) ** 2),
        -d("p", "p") * d("q", "q"),
        d("p", "q") ** 2,
    ]


@_register(E.HCMA_LEG_ROT, RL)
def _hcma_leg_rot(D, c):
    d = D.d
    e = cmath.exp(d("q") + d("qb"))
    return [
        d("q", "qb") * d("z", "zb"),
        -d("q", "zb") * d("qb", "z"),
        e * d("q", "q") * d("qb", "qb"),
        -e * d("q", "qb") ** 2,
    ]


_register(E.ROT_CONSTRAINT_1, RL)(
    lambda D, c: [cmath.exp(D.d("qb")) * (D.d("qb", "qb") + D.d("q", "qb")), -c.lam * D.d("q", "zb")]
)
_register(E.ROT_CONSTRAINT_2, RL)(
    lambda D, c: [c.lam * cmath.exp(D.d("q")) * (D.d("q", "q") + D.d("q", "qb")), -D.d("qb", "z")]
)


@_register(E.ROT_CONSTRAINT_XY_1, RL)
def _rot_xy_1(D, c):
    d = D.d
    # 2 lam [exp((psi_x - i psi_y)/2)]_x
    e = cmath.exp((d("x") - 1j * d("y")) / 2)
    return [d("z", "x"), 1j * d("z", "y"), -c.lam * e * (d("x", "x") - 1j * d("x", "y"))]


@_register(E.ROT_CONSTRAINT_XY_2, RL)
def _rot_xy_2(D, c):
    d = D.d
    e = cmath.exp((d("x") + 1j * d("y")) / 2)
    return [d("zb", "x"), -1j * d("zb", "y"), -(1 / c.lam) * e * (d("x", "x") + 1j * d("x", "y"))]


_register(E.BF_COMBINED, RL)(
    lambda D, c: [
        D.d("z", "zb"),
        -cmath.exp(D.d("q") + D.d("qb")) * (D.d("q", "q") + 2 * D.d("q", "qb") + D.d("qb", "qb")),
    ]
)
_register(E.BF_REAL, RL)(lambda D, c: [D.d("z", "zb"), -cmath.exp(D.d("x")) * D.d("x", "x")])
_register(E.BF_ELLIPTIC, RL)(lambda D, c: [D.d("z", "zb"), cmath.exp(D.d("x")) * D.d("x", "x")])
_register(E.BF_V, RL)(
    lambda D, c: [D.d("z", "zb"), -cmath.exp(D.val) * (D.d("x", "x") + D.d("x") ** 2)]
)

# -- multi-field relations: first argument is the base field, then aux fields


_register(E.OMEGA_SYM, RL, n_aux=1)(
    lambda P, W, c: [W.d("z", "zb"), -cmath.exp(P.d("x")) * W.d("x", "x")]
)
_register(E.BACKLUND_1, RL, n_aux=1)(
    lambda P, W, c: [W.d("z"), -P.d("z"), 2 * c.lam * cmath.exp((P.d("x") + W.d("x")) / 2)]
)
_register(E.BACKLUND_2, RL, n_aux=1)(
    lambda P, W, c: [W.d("zb"), P.d("zb"), -(2 / c.lam) * cmath.exp((P.d("x") - W.d("x")) / 2)]
)
_register(E.LIE_Y, RL, n_aux=1)(lambda P, W, c: [P.d("y"), -1j * W.d("x")])


@_register(E.SYM_LINEARIZATION, O, n_aux=1)
def _desym(U, F, c):
    u, f = U.d, F.d
    return [
        u("2", "2b") * f("1", "1b"),
        u("1", "1b") * f("2", "2b"),
        -u("2", "1b") * f("1", "2b"),
        -u("1", "2b") * f("2", "1b"),
    ]


def _L(U, F, i, lam):
    """lam (u_{i 2bar} D_1bar - u_{i 1bar} D_2bar) applied to F."""
    u = U.d
    return [lam * u(i, "2b") * F.d("1b"), -lam * u(i, "1b") * F.d("2b")]


_register(E.PARTNER_POT_1, O, n_aux=2)(lambda U, F, S, c: [S.d("1")] + [-t for t in _L(U, F, "1", c.lam)])
_register(E.PARTNER_POT_2, O, n_aux=2)(lambda U, F, S, c: [S.d("2")] + [-t for t in _L(U, F, "2", c.lam)])


def _inv_factor(c):
    # minus sign for the elliptic equation, plus for the hyperbolic one
    return (-1 if c.elliptic else 1) / c.lam.conjugate()


_register(E.PARTNER_INV_1, O, n_aux=2)(
    lambda U, F, S, c: [F.d("1")] + [-t * _inv_factor(c) / c.lam for t in _L(U, S, "1", c.lam)]
)
_register(E.PARTNER_INV_2, O, n_aux=2)(
    lambda U, F, S, c: [F.d("2")] + [-t * _inv_factor(c) / c.lam for t in _L(U, S, "2", c.lam)]
)
_register(E.SELF_PARTNER_1, O, n_aux=1)(lambda U, F, c: [F.d("1")] + [-t for t in _L(U, F, "1", c.lam)])
_register(E.SELF_PARTNER_2, O, n_aux=1)(lambda U, F, c: [F.d("2")] + [-t for t in _L(U, F, "2", c.lam)])
_register(E.SELF_PARTNER_CONJ_1, O, n_aux=1)(
    lambda U, F, c: [F.d("1b"), -(U.d("2", "1b") * F.d("1")) / c.lam, (U.d("1", "1b") * F.d("2")) / c.lam]
)
_register(E.SELF_PARTNER_CONJ_2, O, n_aux=1)(
    lambda U, F, c: [F.d("2b"), -(U.d("2", "2b") * F.d("1")) / c.lam, (U.d("1", "2b") * F.d("2")) / c.lam]
)
EQUATIONS[E.BASIC_PAIR_1] = EQUATIONS[E.SELF_PARTNER_1]
EQUATIONS[E.BASIC_PAIR_2] = EQUATIONS[E.SELF_PARTNER_CONJ_1]

assert set(EQUATIONS) == set(EquationId), set(EquationId) - set(EQUATIONS)

# groups used by the verification suites
LINV_ALL = (
    E.W_LIN_1, E.W_LIN_2, E.W_LIN_3, E.W_LIN_4,
    E.W_LIN_1_CONJ, E.W_LIN_2_CONJ, E.W_LIN_3_CONJ, E.W_LIN_4_CONJ,
)  # fmt: skip
VEQ_ALL = (E.VEQ_PP, E.VEQ_PP_CONJ, E.VEQ_PZBAR, E.VEQ_PZBAR_CONJ, E.VEQ_ZZBAR)
PARTSYM_ALL = (E.PARTNER_A, E.PARTNER_B, E.PARTNER_C)
ROT_CONSTRAINTS = (E.ROT_CONSTRAINT_1, E.ROT_CONSTRAINT_2)
ROT_CONSTRAINTS_XY = (E.ROT_CONSTRAINT_XY_1, E.ROT_CONSTRAINT_XY_2)


# -- evaluation --------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualRecord:
    equation: EquationId
    point: tuple
    value: complex
    magnitude: float
    scale: float
    normalized: float


def _record(eq, point, terms) -> ResidualRecord:
    terms = [complex(t) for t in terms]
    value = sum(terms)
    scale = max(abs(t) for t in terms)
    mag = abs(value)
    return ResidualRecord(eq, tuple(point), value, mag, scale, mag / max(scale, 1.0))


def _as_eq(eq) -> EquationId:
    return eq if isinstance(eq, EquationId) else EquationId(eq)


def _derivs(field: FieldEvaluator, eq: EquationId, point) -> Derivs:
    if field.chart != eq.chart:
        raise ChartMismatchError(f"{eq.value} lives in chart {eq.chart.value}, field {field.name!r} in {field.chart.value}")
    return Derivs(field(point, eq.order), eq.chart)


def residual(eq, field: FieldEvaluator, point: Sequence[float], lam: complex = 1j, elliptic: bool = True) -> ResidualRecord:
    """Residual of a single-field equation at ``point``."""
    eq = _as_eq(eq)
    if eq.n_aux:
        raise ValueError(f"{eq.value} relates several fields; use residual_pair")
    return _record(eq, point, eq.spec.terms(_derivs(field, eq, point), _Ctx(complex(lam), elliptic)))


def residual_pair(
    eq,
    u: FieldEvaluator,
    aux: FieldEvaluator | Sequence[FieldEvaluator],
    point: Sequence[float],
    lam: complex = 1j,
    elliptic: bool = True,
) -> ResidualRecord:
    """Residual of a relation between ``u`` and auxiliary fields.

    Auxiliary fields by equation: SYM_LINEARIZATION, SELF_PARTNER_*, BASIC_PAIR_*
    take phi; PARTNER_POT_* and PARTNER_INV_* take (phi, psi); OMEGA_SYM,
    BACKLUND_* and LIE_Y take omega with ``u`` the Boyer-Finley field psi.
    """
    eq = _as_eq(eq)
    aux = [aux] if isinstance(aux, FieldEvaluator) else list(aux)
    if len(aux) != eq.n_aux:
        raise ValueError(f"{eq.value} needs {eq.n_aux} auxiliary field(s), got {len(aux)}")
    ds = [_derivs(f, eq, point) for f in [u, *aux]]
    return _record(eq, point, eq.spec.terms(*ds, _Ctx(complex(lam), elliptic)))


def conjugate_point(chart: Chart, point: Sequence[float]) -> tuple:
    """Image of a point under complex conjugation of the chart's complex coordinates."""
    x0, x1, x2, x3 = point
    if chart in (Chart.ORIGINAL, Chart.LEGENDRE_CMA, Chart.ROT_LEGENDRE):
        return (x0, -x1, x2, -x3)
    return tuple(point)


# -- dispersion oracle ---------------------------------------------------------------


def dispersion_delta(alpha: float, beta: float, branch: str = "plus") -> float:
    """p-wavenumber delta of the mode exp(-i(alpha t + beta z +- gamma q + delta p)).

    Found by substituting the mode into the first two partner constraints:
    each residual is affine in delta, so two evaluations fix it.  The second
    constraint must agree to 1e-12.
    """
    if branch not in ("plus", "minus"):
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    if beta == 0:
        raise DegenerateModeError(f"beta = 0 gives a degenerate mode (alpha={alpha})")
    gamma = float(np.hypot(alpha, beta))
    sign = 1 if branch == "plus" else -1
    origin = (0.0, 0.0, 0.0, 0.0)

    def mode(delta):
        return FieldEvaluator.from_expression(
            Chart.LEGENDRE_HCMA,
            lambda X: jets.exp(-1j * (alpha * X[2] + beta * X[3] + sign * gamma * X[1] + delta * X[0])),
        )

    r0 = residual(E.PARTNER_A, mode(0.0), origin).value
    r1 = residual(E.PARTNER_A, mode(1.0), origin).value
    slope = r1 - r0
    if abs(slope) == 0:
        raise DegenerateModeError("partner constraint does not determine delta")
    delta = (-r0 / slope).real
    check = residual(E.PARTNER_B, mode(delta), origin)
    if check.normalized > 1e-12 * max(1.0, gamma * gamma):
        raise ConsistencyError(f"partner constraints disagree for alpha={alpha}, beta={beta}: {check.value}")
    return delta


# -- consequence checks ----------------------------------------------------------------


@dataclass
class ConsequenceReport:
    premises: dict[str, float]
    consequence: str
    consequence_max: float
    consequence_mean: float
    points: int
    tol: float
    premise_ok: bool = dc_field(init=False)
    consequence_ok: bool = dc_field(init=False)

    def __post_init__(self):
        self.premise_ok = all(v < self.tol for v in self.premises.values())
        self.consequence_ok = self.consequence_max < self.tol

    @property
    def passed(self) -> bool:
        return self.premise_ok and self.consequence_ok

    @property
    def status(self) -> str:
        if not self.premise_ok:
            return "premise_violation"
        return "pass" if self.consequence_ok else "consequence_violation"


def verify_consequence(
    field: FieldEvaluator,
    premise_eqs: Iterable,
    consequence_eq,
    points: Iterable[Sequence[float]],
    tol: float = 1e-9,
    lam: complex = 1j,
    fields: dict[str, FieldEvaluator] | None = None,
) -> ConsequenceReport:
    """Check that premises hold on ``points`` and measure the consequence there.

    ``fields`` maps an equation's quantity (e.g. ``"w"``) to the evaluator it
    should see; anything else uses ``field``.
    """
    fields = fields or {}
    premise_eqs = [_as_eq(e) for e in premise_eqs]
    consequence_eq = _as_eq(consequence_eq)
    points = list(points)
    pick = lambda e: fields.get(e.quantity, field)
    premises = {
        e.value: max(residual(e, pick(e), p, lam).normalized for p in points) for e in premise_eqs
    }
    cons = [residual(consequence_eq, pick(consequence_eq), p, lam).normalized for p in points]
    return ConsequenceReport(
        premises, consequence_eq.value, max(cons), float(np.mean(cons)), len(points), tol
    )
