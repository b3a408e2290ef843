"""Numeric Legendre and point-Legendre transforms between charts.

All three transforms are instances of one duality.  A field ``f`` in source
coordinates ``A`` with dual slots ``a`` is mapped to

    B_a = c_a f_{A_a},   B_i = A_i (passive slots),   g = f - sum_a A_a f_{A_a}

and then ``g_{B_a} = -A_a / c_a``, ``g_{B_i} = f_{A_i}``.  Evaluating ``g`` at
a target ``B`` means solving for the preimage ``A`` by Newton, then reading
off the jet of ``g`` by inverting the jet of the map ``A -> B`` and
integrating the gradient above.

Transform coefficients:

* two-variable (p = u_1):       c = (-1/2, 1/2) on slots (0, 1) for the
  inverse, (1/2, -1/2) for the forward direction;
* one-variable (q = u_y):       c = -1 (inverse) or +1 (forward) on one slot;
* rotational point-Legendre:    the two-variable inverse applied to -psi in
  coordinates (Re zeta1, Im zeta1, Re z2, Im z2), followed by zeta1 = ln z1.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets
from .errors import LegendreError, SingularPointError
from .jets import Jet
from .solutions import Chart, FieldEvaluator


class TransformKind(enum.Enum):
    TWO_VAR = "two_var"
    ONE_VAR = "one_var"
    ROT = "rot"


@dataclass(frozen=True)
class NewtonSettings:
    tol: float = 1e-12
    max_iter: int = 50
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("Newton tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class TransformSpec:
    kind: TransformKind
    newton: NewtonSettings = field(default_factory=NewtonSettings)

    def __post_init__(self):
        if not isinstance(self.kind, TransformKind):
            object.__setattr__(self, "kind", TransformKind(self.kind))


@dataclass(frozen=True)
class NewtonResult:
    point: tuple[complex, ...]
    iterations: int
    residual: float


TWO_VAR_INVERSE = (-0.5, 0.5)
TWO_VAR_FORWARD = (0.5, -0.5)
REALITY_TOL = 1e-10


def _field_jet(f: FieldEvaluator, point, order: int) -> Jet:
    return f.fn(tuple(point), order)


def newton_preimage(
    f: FieldEvaluator,
    target: Sequence[complex],
    slots: Sequence[int],
    c: Sequence[float],
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> NewtonResult:
    """Solve c_a f_{A_a}(A) = target_a for the dual slots; passive slots are copied.

    The unknowns are treated as independent complex numbers with the full
    complex Jacobian.
    """
    A = np.array(target, dtype=complex)
    if seed is not None:
        for a in slots:
            A[a] = seed[a]
    else:
        A[list(slots)] = 0.0
    goal = np.array([target[a] for a in slots], dtype=complex)
    cs = np.asarray(c, dtype=float)
    m = len(slots)
    for it in range(1, newton.max_iter + 1):
        try:
            J2 = _field_jet(f, A, 2)
        except SingularPointError as exc:
            raise LegendreError(f"Newton iterate {tuple(A)} left the domain: {exc}") from exc
        grad = np.array([jets.extract(J2, _unit(a, 4)) for a in slots])
        F = cs * grad - goal
        jac = np.empty((m, m), dtype=complex)
        for i, a in enumerate(slots):
            for j, b in enumerate(slots):
                jac[i, j] = cs[i] * jets.extract(J2, _unit(a, 4, b))
        if abs(np.linalg.det(jac)) <= 1e-14 * max(1.0, np.max(np.abs(jac))) ** m:
            raise LegendreError(f"singular Hessian block at {tuple(A)}")
        step = np.linalg.solve(jac, F)
        A[list(slots)] -= newton.damping * step
        size = np.max(np.abs(step))
        if size <= newton.tol * (1 + np.max(np.abs(A[list(slots)]))):
            final = _field_jet(f, A, 1)
            res = np.max(np.abs(cs * np.array([jets.extract(final, _unit(a, 4)) for a in slots]) - goal))
            return NewtonResult(tuple(A), it, float(res))
    raise LegendreError(f"Newton did not converge in {newton.max_iter} iterations (last step {size:.3g})")


def _unit(a: int, n: int, b: int | None = None) -> tuple[int, ...]:
    m = [0] * n
    m[a] += 1
    if b is not None:
        m[b] += 1
    return tuple(m)


def _snap_real(point: Sequence[complex], target: Sequence[complex]) -> tuple:
    """Drop round-off imaginary parts when the target is a real slice."""
    if all(abs(complex(t).imag) == 0 for t in target):
        pt = np.asarray(point, dtype=complex)
        scale = max(1.0, float(np.max(np.abs(pt))))
        if np.max(np.abs(pt.imag)) > REALITY_TOL * scale:
            raise LegendreError(f"preimage {tuple(pt)} of a real target is not real")
        return tuple(float(x.real) for x in pt)
    return tuple(point)


def dual_jet(
    f: FieldEvaluator,
    target: Sequence[complex],
    order: int,
    slots: Sequence[int],
    c: Sequence[float],
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> tuple[Jet, NewtonResult]:
    """Jet of the dual field g at ``target`` (see module docstring)."""
    if not 1 <= order <= 4:
        raise ValueError("order must lie in 1..4")
    sol = newton_preimage(f, target, slots, c, seed, newton)
    A = _snap_real(sol.point, target)
    V = _field_jet(f, A, order)
    n = 4
    slots = list(slots)
    cmap = dict(zip(slots, c))
    grads = [V.deriv(i) for i in range(n)]  # order - 1
    k = order - 1
    # map A -> B as jets in A-variables (base point A)
    G = [cmap[i] * grads[i] if i in cmap else jets.jet_variable(i, A[i], k, n) for i in range(n)]
    B0 = [G[i].value for i in range(n)]
    if k == 0:
        H = [jets.constant(a, n, 0) for a in A]
    else:
        Jm = np.array([[jets.extract(G[i], _unit(j, n)) for j in range(n)] for i in range(n)])
        try:
            Jinv = np.linalg.inv(Jm)
        except np.linalg.LinAlgError as exc:
            raise LegendreError(f"singular Jacobian at {A}") from exc
        Xv = jets.variables(B0, k)
        zero = jets.constant(0.0, n, k)
        H = [jets.constant(A[i], n, k) + sum((Jinv[i, j] * (Xv[j] - B0[j]) for j in range(n)), zero)
             for i in range(n)]  # fmt: skip
        # each pass fixes one more order of the inverse map
        for _ in range(k - 1):
            E = [jets.compose(G[i], H) - Xv[i] for i in range(n)]
            H = [H[i] - sum((Jinv[i, j] * E[j] for j in range(n)), zero) for i in range(n)]
            for h, a in zip(H, A):
                h.coeffs[0] = a
    grad_g = [(-1.0 / cmap[i]) * H[i] if i in cmap else jets.compose(grads[i], H) for i in range(n)]
    value = V.value - sum(A[a] * grads[a].value for a in slots)
    return jets.integrate_gradient(grad_g, value), NewtonResult(A, sol.iterations, sol.residual)


def invert_two_var(
    v: FieldEvaluator,
    target: Sequence[float],
    order: int = 2,
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> Jet:
    """Jet of u at ``target`` (ORIGINAL chart) from v in the LEGENDRE_CMA chart.

    Solves -v_p = z1 and its conjugate for p, then returns
    u = v - p v_p - pbar v_pbar with derivatives in (Re z1, Im z1, Re z2, Im z2).
    """
    if v.chart is not Chart.LEGENDRE_CMA:
        raise ValueError(f"expected a LEGENDRE_CMA field, got {v.chart.value}")
    return dual_jet(v, target, order, (0, 1), TWO_VAR_INVERSE, seed, newton)[0]


def forward_two_var(
    u: FieldEvaluator,
    target: Sequence[float],
    order: int = 2,
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> Jet:
    """Jet of v = u - z1 u_1 - z1bar u_1bar at a LEGENDRE_CMA point (p = u_1)."""
    return dual_jet(u, target, order, (0, 1), TWO_VAR_FORWARD, seed, newton)[0]


def invert_one_var(
    v: FieldEvaluator,
    target: Sequence[float],
    order: int = 2,
    slot: int = 1,
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> Jet:
    """Jet of u from v(q, ...) with y = -v_q, u = v - q v_q; ``slot`` is the dual index."""
    return dual_jet(v, target, order, (slot,), (-1.0,), seed, newton)[0]


def forward_one_var(
    u: FieldEvaluator,
    target: Sequence[float],
    order: int = 2,
    slot: int = 1,
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> Jet:
    """Jet of v = u - y u_y at a point with q = u_y in the dual slot."""
    return dual_jet(u, target, order, (slot,), (1.0,), seed, newton)[0]


def _zeta_of(z1: complex) -> complex:
    if z1 == 0:
        raise SingularPointError("z1 = 0 has no logarithm", z1)
    return cmath.log(z1)


def rot_image(psi: FieldEvaluator, point: Sequence[float]) -> tuple[float, float, float, float]:
    """ORIGINAL-chart point reached from a ROT_LEGENDRE point: z1 = exp(psi_q), z2 = z."""
    J = psi.fn(tuple(point), 1)
    psi_q = 0.5 * (jets.extract(J, (1, 0, 0, 0)) - 1j * jets.extract(J, (0, 1, 0, 0)))
    z1 = cmath.exp(psi_q)
    return (z1.real, z1.imag, point[2], point[3])


def push_forward_rot(
    psi: FieldEvaluator,
    target: Sequence[float],
    order: int = 2,
    seed: Sequence[complex] | None = None,
    newton: NewtonSettings = NewtonSettings(),
) -> Jet:
    """Jet of u = q psi_q + qbar psi_qbar - psi at ``target`` (ORIGINAL chart).

    The preimage solves psi_q = ln z1 (principal branch) and its conjugate.
    """
    if psi.chart is not Chart.ROT_LEGENDRE:
        raise ValueError(f"expected a ROT_LEGENDRE field, got {psi.chart.value}")
    x0, x1, x2, x3 = target
    zeta = _zeta_of(complex(x0, x1))
    neg = psi.map(lambda j: -j, name=f"-{psi.name}")
    u_zeta, _ = dual_jet(neg, (zeta.real, zeta.imag, x2, x3), order, (0, 1), TWO_VAR_INVERSE, seed, newton)
    X = jets.variables(target, order)
    z1 = X[0] + 1j * X[1]
    z1b = X[0] - 1j * X[1]
    lz, lzb = jets.log(z1), jets.log(z1b)
    xi0 = 0.5 * (lz + lzb)
    xi1 = (lz - lzb) / 2j
    return jets.compose(u_zeta, [xi0, xi1, X[2], X[3]])


def legendre_transform(
    spec: TransformSpec,
    f: FieldEvaluator,
    target: Sequence[float],
    order: int = 2,
    seed: Sequence[complex] | None = None,
) -> Jet:
    """Dispatch on ``spec.kind`` to the inverse transform back to the potential u."""
    if spec.kind is TransformKind.TWO_VAR:
        return invert_two_var(f, target, order, seed, spec.newton)
    if spec.kind is TransformKind.ONE_VAR:
        return invert_one_var(f, target, order, seed=seed, newton=spec.newton)
    return push_forward_rot(f, target, order, seed, spec.newton)


def pushed_evaluator(
    f: FieldEvaluator,
    spec: TransformSpec,
    seed: Sequence[complex] | None = None,
    chart: Chart = Chart.ORIGINAL,
) -> FieldEvaluator:
    """Evaluator of the potential u obtained by transforming ``f`` pointwise."""
    return FieldEvaluator(
        chart,
        lambda p, k: legendre_transform(spec, f, p, k, seed),
        f.params,
        f"{spec.kind.value}[{f.name}]",
    )
