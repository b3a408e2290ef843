"""Kahler metric data, curvature, and the finite-algebra non-invariance test.

Potentials live in the ORIGINAL chart, so the holomorphic pairs of jet
variables are (0, 1) -> z1 and (2, 3) -> z2.  The metric is g_{i jbar} =
u_{i jbar}; curvature uses the Kahler shortcut

    R_{i jbar k lbar} = -d_k d_lbar g_{i jbar} + g^{nbar m} (d_k g_{i nbar}) (d_lbar g_{m jbar})

and the Ricci form is computed both as the trace of R and as
-d_k d_lbar ln det g.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import jets
from .errors import DegenerateMetricError
from .jets import Jet
from .solutions import Chart, FieldEvaluator

PAIRS = ((0, 1), (2, 3))
HERMITIAN_TOL = 1e-10


class Signature(enum.Enum):
    EUCLIDEAN = "euclidean"
    ULTRA_HYPERBOLIC = "ultra_hyperbolic"
    DEGENERATE = "degenerate"


def _w(u: Jet, holo: Sequence[int], anti: Sequence[int]) -> complex:
    """Mixed Wirtinger derivative: d/dz_i for i in ``holo``, d/dzbar_j for j in ``anti``."""
    m = [0, 0, 0, 0]
    for i in holo:
        m[2 * i] += 1
    for j in anti:
        m[2 * j + 1] += 1
    return jets.wirtinger(u, PAIRS, m)


@dataclass(frozen=True)
class KahlerData:
    g: np.ndarray  # g[i, j] = u_{i jbar}
    det_g: complex
    riemann: np.ndarray  # riemann[i, j, k, l] = R_{i jbar k lbar}
    ricci: np.ndarray  # trace of riemann
    ricci_logdet: np.ndarray  # -d_k d_lbar ln det g
    signature: Signature
    eigenvalues: tuple[float, float]
    hermitian_defect: float
    ginv_norm: float = 1.0

    @property
    def ricci_discrepancy(self) -> float:
        return float(np.max(np.abs(self.ricci - self.ricci_logdet)))

    @property
    def ricci_scale(self) -> float:
        """Natural size of a contraction g^{-1} R; at least 1."""
        return max(1.0, self.ginv_norm * float(np.max(np.abs(self.riemann))))

    def ricci_normalized(self, route: str = "trace") -> float:
        r = self.ricci if route == "trace" else self.ricci_logdet
        return float(np.max(np.abs(r))) / self.ricci_scale


def _signature(g: np.ndarray, tol: float = 1e-12) -> tuple[Signature, tuple[float, float]]:
    herm = 0.5 * (g + g.conj().T)
    ev = np.linalg.eigvalsh(herm)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.min(np.abs(ev)) <= tol * scale:
        sig = Signature.DEGENERATE
    elif ev[0] * ev[1] > 0:
        sig = Signature.EUCLIDEAN
    else:
        sig = Signature.ULTRA_HYPERBOLIC
    return sig, (float(ev[0]), float(ev[1]))


def kahler_from_jet(u: Jet) -> KahlerData:
    """Metric, curvature and Ricci tensor from an order >= 4 jet of the potential.

    The real quadratic form of g has each eigenvalue of the Hermitian matrix
    twice, so two equal signs mean a definite (Euclidean) metric and opposite
    signs the (2, 2) ultra-hyperbolic one.
    """
    if u.order < 4:
        raise ValueError(f"curvature needs an order-4 jet, got order {u.order}")
    if u.nvars != 4:
        raise ValueError("potential jets must have four variables")
    g = np.array([[_w(u, (i,), (j,)) for j in range(2)] for i in range(2)])
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    if abs(det) <= 1e-14 * max(1.0, float(np.max(np.abs(g)))) ** 2:
        raise DegenerateMetricError(f"det g = {det} vanishes")
    ginv = np.linalg.inv(g)  # ginv[n, m] = g^{nbar m}
    dg = np.array([[[_w(u, (i, k), (j,)) for k in range(2)] for j in range(2)] for i in range(2)])  # d_k g_{i jbar}
    dbg = np.array([[[_w(u, (i,), (j, l)) for l in range(2)] for j in range(2)] for i in range(2)])  # d_lbar g_{i jbar}
    ddg = np.array(
        [[[[_w(u, (i, k), (j, l)) for l in range(2)] for k in range(2)] for j in range(2)] for i in range(2)]
    )
    riemann = -ddg + np.einsum("nm,ink,mjl->ijkl", ginv, dg, dbg)
    ricci = np.einsum("ji,ijkl->kl", ginv, riemann)

    # second route: det g as a jet, then its log
    gj = [[_g_jet(u, i, j) for j in range(2)] for i in range(2)]
    dj = gj[0][0] * gj[1][1] - gj[0][1] * gj[1][0]
    ldet = jets.log(dj / dj.value)  # normalized so negative det g stays off the cut
    ricci_ld = -np.array([[_w(ldet, (k,), (l,)) for l in range(2)] for k in range(2)])

    sig, ev = _signature(g)
    return KahlerData(
        g=g,
        det_g=complex(det),
        riemann=riemann,
        ricci=ricci,
        ricci_logdet=ricci_ld,
        signature=sig,
        eigenvalues=ev,
        hermitian_defect=float(np.max(np.abs(g - g.conj().T))),
        ginv_norm=float(np.max(np.abs(ginv))),
    )


def _g_jet(u: Jet, i: int, j: int) -> Jet:
    a = jets.wirtinger_deriv(u, PAIRS[i])
    return jets.wirtinger_deriv(a, PAIRS[j], conjugate=True)


def nonflatness_certificate(data: KahlerData) -> float:
    """Largest absolute Riemann component; above 1e-3 certifies curvature."""
    return float(np.max(np.abs(data.riemann)))


# -- candidate symmetry algebra ------------------------------------------------------


# a characteristic sees (z1, z1bar, z2, z2bar) and the first jet of u as a mapping
# with keys "u", "1", "1b", "2", "2b"; values may be complex numbers or jets
CharacteristicFn = Callable[[Sequence, dict], object]


@dataclass(frozen=True)
class Characteristic:
    name: str
    fn: CharacteristicFn
    scale: complex = 1.0

    def __call__(self, coords: Sequence, d: dict):
        out = self.fn(coords, d)
        return out if self.scale == 1.0 else self.scale * out

    def scaled(self, factor: complex) -> "Characteristic":
        return Characteristic(self.name, self.fn, self.scale * factor)


def _translation(key):
    return Characteristic(f"translation_{key}", lambda c, d: d[key])


ROTATION = Characteristic("rotation_z1", lambda c, d: 1j * (c[0] * d["1"] - c[1] * d["1b"]))
DILATION = Characteristic("dilation_z1", lambda c, d: d["u"] - c[0] * d["1"] - c[1] * d["1b"])
TRANSLATION_X = Characteristic("translation_x", lambda c, d: d["1"] + d["1b"])

EXTRA_CHARACTERISTICS: dict[str, Characteristic] = {
    "translation_x": TRANSLATION_X,
    "translation_y": Characteristic("translation_y", lambda c, d: 1j * (d["1"] - d["1b"])),
    "rotation_z2": Characteristic("rotation_z2", lambda c, d: 1j * (c[2] * d["2"] - c[3] * d["2b"])),
    "dilation_z2": Characteristic("dilation_z2", lambda c, d: d["u"] - c[2] * d["2"] - c[3] * d["2b"]),
    "constant": Characteristic("constant", lambda c, d: 1.0 + 0 * d["u"]),
}


@dataclass(frozen=True)
class CandidateAlgebra:
    """A finite list of symmetry characteristics tested for annihilating a solution."""

    characteristics: tuple[Characteristic, ...]

    def __post_init__(self):
        if not self.characteristics:
            raise ValueError("the candidate algebra is empty")

    @classmethod
    def default(cls) -> "CandidateAlgebra":
        trans = tuple(_translation(k) for k in ("1", "1b", "2", "2b"))
        return cls(trans + (ROTATION, DILATION))

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "CandidateAlgebra":
        table = {c.name: c for c in cls.default().characteristics} | EXTRA_CHARACTERISTICS
        try:
            return cls(tuple(table[n] for n in names))
        except KeyError as exc:
            raise ValueError(f"unknown characteristic {exc.args[0]!r}; known: {sorted(table)}") from None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.characteristics)

    def __len__(self) -> int:
        return len(self.characteristics)


def _coords(X: Sequence) -> tuple:
    return (X[0] + 1j * X[1], X[0] - 1j * X[1], X[2] + 1j * X[3], X[2] - 1j * X[3])


def characteristic_values(u: Jet, point: Sequence[float], algebra: CandidateAlgebra) -> np.ndarray:
    """Values of every characteristic at one point from a jet of u there."""
    d = {
        "u": u.value,
        "1": _w(u, (0,), ()),
        "1b": _w(u, (), (0,)),
        "2": _w(u, (1,), ()),
        "2b": _w(u, (), (1,)),
    }
    c = _coords([complex(x) for x in point])
    return np.array([complex(ch(c, d)) for ch in algebra.characteristics])


def characteristic_field(u: FieldEvaluator, ch: Characteristic) -> FieldEvaluator:
    """The characteristic evaluated on ``u`` as a field in u's chart."""
    if u.chart is not Chart.ORIGINAL:
        raise ValueError("characteristics are defined for potentials in the ORIGINAL chart")

    def fn(point, order):
        U = u.fn(point, order + 1)
        d = {
            "u": U.truncate(order),
            "1": jets.wirtinger_deriv(U, PAIRS[0]),
            "1b": jets.wirtinger_deriv(U, PAIRS[0], conjugate=True),
            "2": jets.wirtinger_deriv(U, PAIRS[1]),
            "2b": jets.wirtinger_deriv(U, PAIRS[1], conjugate=True),
        }
        out = ch(_coords(jets.variables(point, order)), d)
        return out if isinstance(out, Jet) else jets.constant(out, 4, order)

    return FieldEvaluator(Chart.ORIGINAL, fn, None, f"{ch.name}[{u.name}]")


class InvarianceResult(NamedTuple):
    rank: int
    min_singular_value: float
    singular_values: tuple[float, ...]
    norm: float
    columns: tuple[str, ...]
    points: int


RANK_RTOL = 1e-8


def invariance_rank(
    field: FieldEvaluator,
    algebra: CandidateAlgebra,
    points: Sequence[Sequence[float]],
    jobs: int = 1,
) -> InvarianceResult:
    """Numerical column rank of M[p, s] = characteristic s on ``field`` at point p.

    Full rank means no constant combination of the candidates vanishes on the
    sample, so the solution is not invariant under any one-parameter group in
    their span.  ``norm`` is the largest singular value.
    """
    points = [tuple(p) for p in points]
    k = len(algebra)
    if len(points) < 2 * k:
        raise ValueError(f"need at least {2 * k} points for {k} characteristics, got {len(points)}")

    def row(p):
        return characteristic_values(field(p, 1), p, algebra)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row, points))
    else:
        rows = [row(p) for p in points]
    M = np.array(rows)
    s = np.linalg.svd(M, compute_uv=False)
    top = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > RANK_RTOL * top)) if top > 0 else 0
    return InvarianceResult(rank, float(s[-1]), tuple(float(x) for x in s), top, algebra.names, len(points))
