"""Exact solution families: low-dimensional seeds and their four-dimensional lifts.

Every family is exposed as a :class:`FieldEvaluator`, a pure map from a point
(four real coordinates of a declared chart) to a jet of the field there.

Chart coordinate conventions (index order):

* ``ORIGINAL``      -- (Re z1, Im z1, Re z2, Im z2)
* ``REAL_XYZT``     -- (x, y, z, t) with z1 = (x + iy)/2, z2 = (t + iz)/2
* ``LEGENDRE_CMA``  -- (Re p, Im p, Re z2, Im z2)
* ``LEGENDRE_HCMA`` -- (p, q, t, z), all real
* ``ROT_LEGENDRE``  -- (x, y, Re z, Im z) with q = x + iy
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from . import jets
from .errors import SingularPointError
from .funcspace import (
    HolomorphicPoly,
    RealSmoothFn,
    double_integral_kernel,
    eval_poly,
    kernel_half,
    log_antiderivative,
    y_integral_rate,
    y_integral_term,
)
from .jets import Jet


class Chart(enum.Enum):
    ORIGINAL = "original"
    REAL_XYZT = "real_xyzt"
    LEGENDRE_CMA = "legendre_cma"
    LEGENDRE_HCMA = "legendre_hcma"
    ROT_LEGENDRE = "rot_legendre"


ChartId = Chart


@dataclass(frozen=True)
class FieldEvaluator:
    """A candidate solution: point in ``chart`` -> jet of the field."""

    chart: Chart
    fn: Callable[[Sequence[complex], int], Jet]
    params: Any = None
    name: str = ""

    def __call__(self, point: Sequence[complex], order: int = 2) -> Jet:
        if len(point) != 4:
            raise ValueError("points have four coordinates")
        jet = self.fn(tuple(point), order)
        if jet.order != order:
            raise AssertionError(f"{self.name}: evaluator returned order {jet.order}, wanted {order}")
        return jet

    @classmethod
    def from_expression(cls, chart: Chart, expr: Callable[[list[Jet]], Jet], name="", params=None):
        """Wrap ``expr(coordinate_jets) -> Jet`` as an evaluator."""

        def fn(point, order):
            out = expr(jets.variables(point, order))
            if not isinstance(out, Jet):
                out = jets.constant(out, 4, order)
            return out

        return cls(chart, fn, params, name)

    def map(self, op: Callable[[Jet], Jet], name: str = "") -> "FieldEvaluator":
        """Evaluator of ``op(field)`` in the same chart."""
        return FieldEvaluator(self.chart, lambda p, k: op(self.fn(p, k)), self.params, name or self.name)

    def __add__(self, other: "FieldEvaluator") -> "FieldEvaluator":
        if other.chart != self.chart:
            raise ValueError("cannot add evaluators from different charts")
        return FieldEvaluator(
            self.chart, lambda p, k: self.fn(p, k) + other.fn(p, k), None, f"{self.name}+{other.name}"
        )


def _complex_pair(xs: list[Jet], i: int, j: int) -> tuple[Jet, Jet]:
    return xs[i] + 1j * xs[j], xs[i] - 1j * xs[j]


# -- Helmholtz lift ------------------------------------------------------------


@dataclass(frozen=True)
class HelmholtzMode:
    alpha: complex
    F: complex
    G: complex

    @property
    def s(self) -> float:
        return math.sqrt(1.0 - 1.0 / abs(self.alpha) ** 2)


@dataclass(frozen=True)
class HelmholtzLiftParams:
    """Mode data for the lift of Helmholtz solutions to the elliptic equation.

    ``z2_factor`` selects how the (z2, z2bar) dependence is attached:
    ``"per_mode"`` gives each exponential its own factor fixed by the linear
    system, ``"common"`` uses one common factor A_j per mode.  The two agree
    when every |alpha_j| = 1.  ``z2_scale`` multiplies the z2 exponent and is
    only meant for negative controls.
    """

    modes: tuple[HelmholtzMode, ...]
    z2_factor: str = "per_mode"
    z2_scale: float = 1.0

    def __post_init__(self):
        modes = tuple(m if isinstance(m, HelmholtzMode) else HelmholtzMode(*m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if not modes:
            raise ValueError("HelmholtzLiftParams needs at least one mode")
        for m in modes:
            if abs(m.alpha) < 1:
                raise ValueError(f"|alpha| = {abs(m.alpha):.6g} < 1: s_j would be imaginary")
        if self.z2_factor not in ("per_mode", "common"):
            raise ValueError(f"unknown z2_factor {self.z2_factor!r}")


def _lin_mode(a: complex, p, pb, z, zb, scale: float) -> Jet:
    """exp(a p - pb/a - i(a^2+1) z2 + i(1 + 1/a^2) z2bar), one exponential of w."""
    expo = a * p - pb / a + scale * (-1j * (a * a + 1) * z + 1j * (1 + 1 / (a * a)) * zb)
    return jets.exp(expo)


def helmholtz_w(params: HelmholtzLiftParams) -> FieldEvaluator:
    """Evaluator of the linearized field w (chart LEGENDRE_CMA)."""

    def fn(point, order):
        xs = jets.variables(point, order)
        p, pb = _complex_pair(xs, 0, 1)
        z, zb = _complex_pair(xs, 2, 3)
        w = jets.constant(0.0, 4, order)
        for m in params.modes:
            if params.z2_factor == "per_mode":
                for a, amp in (((1 + m.s) * m.alpha, m.F), ((1 - m.s) * m.alpha, m.G)):
                    ac = -1 / a.conjugate()
                    w = w + 0.5 * amp * _lin_mode(a, p, pb, z, zb, params.z2_scale)
                    w = w + 0.5 * amp.conjugate() * _lin_mode(ac, p, pb, z, zb, params.z2_scale)
            else:
                w = w + _common_term(m, p, pb, z, zb, params.z2_scale)
        return w

    return FieldEvaluator(Chart.LEGENDRE_CMA, fn, params, "helmholtz_w")


def _common_term(m: HelmholtzMode, p, pb, z, zb, scale):
    al, s = complex(m.alpha), m.s
    re_ap = 0.5 * (al * p + al.conjugate() * pb)
    im_ap = (al * p - al.conjugate() * pb) / 2j
    c = al * al * (s * s + 1) + 1
    A = jets.exp(scale * 2 * (c * z - c.conjugate() * zb) / 2j)
    phase = jets.exp(2j * im_ap)
    phase_c = jets.exp(-2j * im_ap)
    re_F = 0.5 * (m.F * phase + m.F.conjugate() * phase_c)
    re_G = 0.5 * (m.G * phase + m.G.conjugate() * phase_c)
    return A * (jets.exp(2 * s * re_ap) * re_F + jets.exp(-2 * s * re_ap) * re_G)


def helmholtz_lift(params: HelmholtzLiftParams) -> FieldEvaluator:
    """v = -ln w on the LEGENDRE_CMA chart; w must be positive."""
    w_eval = helmholtz_w(params)

    def fn(point, order):
        w = w_eval.fn(point, order)
        if w.value.real <= 0:
            raise SingularPointError(f"w = {w.value} is not positive", w.value)
        return -jets.log(w)

    return FieldEvaluator(Chart.LEGENDRE_CMA, fn, params, "helmholtz_lift")


# -- wave lift -------------------------------------------------------------------


@dataclass(frozen=True)
class WaveMode:
    alpha: float
    beta: float
    amplitude: complex = 1.0
    branch: str = "plus"

    def __post_init__(self):
        if self.branch not in ("plus", "minus"):
            raise ValueError(f"branch must be 'plus' or 'minus', got {self.branch!r}")
        if self.beta == 0:
            raise ValueError("wave modes need beta != 0")

    @property
    def gamma(self) -> float:
        return math.hypot(self.alpha, self.beta)

    @property
    def sign(self) -> int:
        return 1 if self.branch == "plus" else -1


@dataclass(frozen=True)
class WaveLiftParams:
    modes: tuple[WaveMode, ...]
    realize: bool = False

    def __post_init__(self):
        modes = tuple(m if isinstance(m, WaveMode) else WaveMode(*m) for m in self.modes)
        if not modes:
            raise ValueError("WaveLiftParams needs at least one mode")
        object.__setattr__(self, "modes", modes)

    def expanded_modes(self) -> tuple[WaveMode, ...]:
        """Modes actually summed; conjugate partners appended when realizing."""
        if not self.realize:
            return self.modes
        partners = tuple(
            WaveMode(-m.alpha, -m.beta, complex(m.amplitude).conjugate(), "minus" if m.sign > 0 else "plus")
            for m in self.modes
        )
        return self.modes + partners


def wave_lift(params: WaveLiftParams) -> FieldEvaluator:
    """Finite mode sum sum_j a_j exp(-i(alpha t + beta z +- gamma q + delta p))."""
    from .pde import dispersion_delta

    modes = params.expanded_modes()
    deltas = [dispersion_delta(m.alpha, m.beta, m.branch) for m in modes]

    def fn(point, order):
        p, q, t, z = jets.variables(point, order)
        v = jets.constant(0.0, 4, order)
        for m, d in zip(modes, deltas):
            phase = m.alpha * t + m.beta * z + m.sign * m.gamma * q + d * p
            v = v + complex(m.amplitude) * jets.exp(-1j * phase)
        return v

    return FieldEvaluator(Chart.LEGENDRE_HCMA, fn, params, "wave_lift")


# -- Boyer-Finley lift -------------------------------------------------------------


@dataclass(frozen=True)
class BFLiftParams:
    """Data for the three lifted Boyer-Finley families (variants A, B, C).

    When ``constrained_alpha`` is set, r is replaced by the linear function
    that makes both rotational constraints hold with lambda = exp(i alpha).
    """

    variant: str
    b: HolomorphicPoly
    r: RealSmoothFn = RealSmoothFn((0.0,))
    k: RealSmoothFn | None = None
    constrained_alpha: float | None = None
    r0: float = 0.0

    def __post_init__(self):
        if self.variant not in ("A", "B", "C"):
            raise ValueError(f"variant must be A, B or C, got {self.variant!r}")
        if self.variant == "C" and self.k is None:
            raise ValueError("variant C needs k(y)")
        if self.constrained_alpha is not None and not 0 <= self.constrained_alpha < 2 * math.pi:
            raise ValueError("constrained_alpha must lie in [0, 2 pi)")
        if not isinstance(self.b, HolomorphicPoly):
            object.__setattr__(self, "b", HolomorphicPoly(tuple(self.b)))
        if not isinstance(self.r, RealSmoothFn):
            object.__setattr__(self, "r", RealSmoothFn(tuple(self.r)))
        if self.k is not None and not isinstance(self.k, RealSmoothFn):
            object.__setattr__(self, "k", RealSmoothFn(tuple(self.k)))

    @property
    def effective_r(self) -> RealSmoothFn:
        if self.constrained_alpha is None:
            return self.r
        a = self.constrained_alpha
        slope = 2 * (a - math.pi) if self.variant == "A" else 2 * a
        return RealSmoothFn((self.r0, slope))

    @property
    def lam(self) -> complex:
        """exp(i alpha) for constrained families, i otherwise."""
        if self.constrained_alpha is None:
            return 1j
        return cmath.exp(1j * self.constrained_alpha)


def _bf_common(params: BFLiftParams, xs: list[Jet]):
    q, qb = _complex_pair(xs, 0, 1)
    z, zb = _complex_pair(xs, 2, 3)
    bz = eval_poly(params.b, z)
    bzb = eval_poly(params.b.conjugate(), zb)
    zsum = z + zb
    if zsum.value.real <= 0:
        raise SingularPointError(f"z + zbar = {zsum.value} must be positive", zsum.value)
    return q, qb, z, zb, bz, bzb, zsum


def _variant_term(params: BFLiftParams, xs: list[Jet], z: Jet, zb: Jet, order: int) -> Jet | None:
    y = xs[1]
    if params.variant == "B":
        return 2j * y * (jets.log(zb) - jets.log(z))
    if params.variant == "C":
        base = y_integral_term(params.k, y.value.real, z, zb)
        rate = y_integral_rate(params.k, y, z, zb)
        return jets.integrate_along(rate, 1, base)
    return None


def bf_lift(params: BFLiftParams) -> FieldEvaluator:
    """psi(x, y, z, zbar) of the lifted Boyer-Finley family (chart ROT_LEGENDRE).

    The fourth coordinate y enters through q = x + iy and through r(y)/k(y),
    so the evaluator carries genuine y-partials.
    """

    def fn(point, order):
        xs = jets.variables(point, order)
        q, qb, z, zb, bz, bzb, zsum = _bf_common(params, xs)
        qa, qba = q + bz, qb + bzb
        psi = qa * jets.log(qa) + qba * jets.log(qba) - (q + qb) * (jets.log(zsum) + 1)
        psi = psi + double_integral_kernel(params.b, z, zb)
        extra = _variant_term(params, xs, z, zb, order)
        if extra is not None:
            psi = psi + extra
        return psi + eval_poly(params.effective_r, xs[1])

    return FieldEvaluator(Chart.ROT_LEGENDRE, fn, params, f"bf_lift_{params.variant}")


def bf_backlund_partner(params: BFLiftParams) -> FieldEvaluator:
    """omega paired with a constrained bf_lift psi by the Backlund relations.

    Built from psi_y = i omega_x, with the x-independent part fixed by the two
    first-order relations; available for variants A and B.  omega is defined
    up to an additive function of y, chosen as zero here.
    """
    if params.constrained_alpha is None:
        raise ValueError("the Backlund partner needs constrained_alpha")
    if params.variant not in ("A", "B"):
        raise ValueError("closed-form omega is available for variants A and B")
    b, bc = params.b, params.b.conjugate()
    r = params.effective_r.coeffs
    slope = r[1] if len(r) > 1 else 0.0

    def fn(point, order):
        xs = jets.variables(point, order)
        x, y = xs[0], xs[1]
        q, qb, z, zb, bz, bzb, zsum = _bf_common(params, xs)
        qa, qba = q + bz, qb + bzb
        omega = qa * jets.log(qa) - qa - qba * jets.log(qba) + qba - 1j * slope * x
        omega = omega + bz - bzb + kernel_half(bc, zb, z) - kernel_half(b, z, zb)
        omega = omega + 2j * y * jets.log(zsum)
        if params.variant == "B":
            omega = omega + 2 * x * (jets.log(zb) - jets.log(z))
            omega = omega - 4j * y * (jets.log(z) + jets.log(zb))
            omega = omega - 2 * log_antiderivative(b, z) + 2 * log_antiderivative(bc, zb)
        return omega

    return FieldEvaluator(Chart.ROT_LEGENDRE, fn, params, f"bf_omega_{params.variant}")


# -- seeds -------------------------------------------------------------------------


class SeedKind(enum.Enum):
    HELMHOLTZ_MODE = "helmholtz_mode"
    LAPLACE3_MODE = "laplace3_mode"
    WAVE3_MODE = "wave3_mode"
    BF_SEED = "bf_seed"


@dataclass(frozen=True)
class SeedParams:
    """Parameters for the reduced-equation seeds.

    ``modes`` holds (kappa, amplitude) for Helmholtz/Laplace seeds,
    (alpha, beta, amplitude, sign) for the wave seed; ``b`` is used by the
    Boyer-Finley seed.
    """

    modes: tuple = ()
    b: HolomorphicPoly | None = None
    extra: dict = field(default_factory=dict)


def seed(kind: SeedKind | str, params: SeedParams) -> FieldEvaluator:
    """Evaluator of a low-dimensional seed solution; unused coordinates are inert.

    * HELMHOLTZ_MODE: theta(z2, z2bar) = sum a exp(i(kappa z2 + z2bar/kappa)),
      chart LEGENDRE_CMA, theta_{2 2bar} + theta = 0.
    * LAPLACE3_MODE: v = exp(p) theta with p = coordinate 0 (real),
      chart LEGENDRE_CMA, v_{2 2bar} + v_pp = 0.
    * WAVE3_MODE: v(q, t, z) = sum a exp(-i(alpha t + beta z + sign gamma q)),
      chart LEGENDRE_HCMA.
    * BF_SEED: v = ln(x + b(z)) + ln(x + conj_b(zbar)) - 2 ln(z + zbar),
      chart ROT_LEGENDRE.
    """
    kind = SeedKind(kind) if not isinstance(kind, SeedKind) else kind

    if kind in (SeedKind.HELMHOLTZ_MODE, SeedKind.LAPLACE3_MODE):
        if not params.modes:
            raise ValueError("Helmholtz/Laplace seeds need (kappa, amplitude) modes")
        for kappa, _ in params.modes:
            if kappa == 0:
                raise ValueError("kappa must be non-zero")

        def fn(point, order):
            xs = jets.variables(point, order)
            z, zb = _complex_pair(xs, 2, 3)
            theta = jets.constant(0.0, 4, order)
            for kappa, amp in params.modes:
                theta = theta + amp * jets.exp(1j * (kappa * z + zb / kappa))
            if kind is SeedKind.LAPLACE3_MODE:
                theta = jets.exp(xs[0]) * theta
            return theta

        return FieldEvaluator(Chart.LEGENDRE_CMA, fn, params, kind.value)

    if kind is SeedKind.WAVE3_MODE:
        if not params.modes:
            raise ValueError("wave seeds need (alpha, beta, amplitude, sign) modes")

        def fn(point, order):
            _, q, t, z = jets.variables(point, order)
            v = jets.constant(0.0, 4, order)
            for al, be, amp, sgn in params.modes:
                g = math.hypot(al, be)
                v = v + amp * jets.exp(-1j * (al * t + be * z + sgn * g * q))
            return v

        return FieldEvaluator(Chart.LEGENDRE_HCMA, fn, params, kind.value)

    if params.b is None:
        raise ValueError("BF_SEED needs b")

    def fn(point, order):
        xs = jets.variables(point, order)
        x = xs[0]
        z, zb = _complex_pair(xs, 2, 3)
        bz = eval_poly(params.b, z)
        bzb = eval_poly(params.b.conjugate(), zb)
        return jets.log(x + bz) + jets.log(x + bzb) - 2 * jets.log(z + zb)

    return FieldEvaluator(Chart.ROT_LEGENDRE, fn, params, kind.value)
