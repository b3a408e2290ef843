"""Command-line driver: parse a run configuration, run checks, emit a report.

Usage::

    heavenlift verify     --config run.toml [--out report.json] [--csv values.csv] [--seed N] [--jobs N]
    heavenlift geometry   --config run.toml
    heavenlift dispersion [--config run.toml]
    heavenlift lift-demo  [--pipeline helmholtz|bf]
    heavenlift sample     --config run.toml --csv grid.csv

Exit codes: 0 when every check passes, 1 when any check fails, 2 for
configuration errors.  The configuration grammar and report schema are
described in ``docs/config.md``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import __version__, geometry, legendre, pde
from .errors import HeavenliftError, LegendreError, SingularPointError
from .funcspace import HolomorphicPoly, RealSmoothFn
from .pde import EquationId
from .solutions import (
    BFLiftParams,
    Chart,
    FieldEvaluator,
    HelmholtzLiftParams,
    HelmholtzMode,
    SeedKind,
    SeedParams,
    WaveLiftParams,
    WaveMode,
    bf_backlund_partner,
    bf_lift,
    helmholtz_lift,
    helmholtz_w,
    seed,
    wave_lift,
)

log = logging.getLogger("heavenlift")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
MAX_RESAMPLE = 10

GROUPS = {
    "LINV_ALL": pde.LINV_ALL,
    "VEQ_ALL": pde.VEQ_ALL,
    "PARTSYM_ALL": pde.PARTSYM_ALL,
    "ROT_CONSTRAINTS": pde.ROT_CONSTRAINTS,
    "ROT_CONSTRAINTS_XY": pde.ROT_CONSTRAINTS_XY,
}

DEFAULT_BOX = {
    "helmholtz_lift": [[-0.3, 0.3]] * 4,
    "wave_lift": [[-1.0, 1.0]] * 4,
    "bf_lift": [[0.6, 1.2], [-0.5, 0.5], [0.6, 1.4], [-0.5, 0.5]],
    "seed": [[0.6, 1.2], [-0.5, 0.5], [0.6, 1.4], [-0.5, 0.5]],
}


class ConfigError(HeavenliftError, ValueError):
    """Configuration problems, each as (path, message)."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{p}: {m}" for p, m in problems))


# -- configuration ---------------------------------------------------------------------


@dataclass
class CheckSpec:
    kind: str
    options: dict


@dataclass
class RunConfig:
    family: str
    params: dict
    suite: list[CheckSpec]
    box: list[tuple[float, float]]
    margin: float = 0.0
    samples: int = 20
    rng_seed: int = 0
    name: str = ""
    raw: dict = field(default_factory=dict)


CHECK_KINDS = ("residual", "consequence", "geometry", "invariance", "legendre_roundtrip", "dispersion")


class _Problems:
    def __init__(self):
        self.items: list[tuple[str, str]] = []

    def add(self, path: str, msg: str):
        self.items.append((path, msg))

    def raise_if_any(self):
        if self.items:
            raise ConfigError(self.items)


def _complex(value, path: str, probs: _Problems) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    probs.add(path, f"expected a number or an [re, im] pair, got {value!r}")
    return 0j


def _real(value, path: str, probs: _Problems, positive=False) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        probs.add(path, f"expected a number, got {value!r}")
        return 1.0
    if positive and not value > 0:
        probs.add(path, f"must be > 0, got {value!r}")
    return float(value)


def _equations(names, path: str, probs: _Problems) -> list[EquationId]:
    if isinstance(names, str):
        names = [names]
    if not isinstance(names, list) or not names:
        probs.add(path, "expected a non-empty list of equation names")
        return []
    out = []
    for i, n in enumerate(names):
        if n in GROUPS:
            out.extend(GROUPS[n])
        elif n in EquationId.__members__:
            out.append(EquationId[n])
        else:
            probs.add(f"{path}[{i}]", f"unknown equation {n!r}")
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration; raises ConfigError listing every problem."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("<document>", f"parse error: {exc}")]) from exc
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> RunConfig:
    probs = _Problems()
    fam = doc.get("family")
    if not isinstance(fam, dict):
        probs.add("family", "missing [family] table")
        probs.raise_if_any()
    kind = fam.get("kind")
    if kind not in DEFAULT_BOX:
        probs.add("family.kind", f"expected one of {sorted(DEFAULT_BOX)}, got {kind!r}")
        probs.raise_if_any()
    params = fam.get("params", {})
    if not isinstance(params, dict):
        probs.add("family.params", "expected a table")
        params = {}
    _validate_family(kind, params, probs)

    samples = doc.get("samples", 20)
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
        probs.add("samples", f"must be an integer >= 1, got {samples!r}")
        samples = 1
    rng_seed = doc.get("rng_seed", 0)
    if not isinstance(rng_seed, int) or isinstance(rng_seed, bool) or rng_seed < 0:
        probs.add("rng_seed", f"must be an unsigned integer, got {rng_seed!r}")
        rng_seed = 0

    domain = doc.get("domain", {})
    if not isinstance(domain, dict):
        probs.add("domain", "expected a table")
        domain = {}
    box = domain.get("box", DEFAULT_BOX[kind])
    if not (isinstance(box, list) and len(box) == 4):
        probs.add("domain.box", "expected four [min, max] pairs")
        box = DEFAULT_BOX[kind]
    clean_box = []
    for i, pair in enumerate(box):
        if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(v, (int, float)) for v in pair)):
            probs.add(f"domain.box[{i}]", f"expected [min, max], got {pair!r}")
            clean_box.append((0.0, 1.0))
            continue
        lo, hi = float(pair[0]), float(pair[1])
        if not lo <= hi:
            probs.add(f"domain.box[{i}]", f"min {lo} exceeds max {hi}")
        clean_box.append((lo, hi))
    margin = domain.get("margin", 0.0)
    margin = _real(margin, "domain.margin", probs) if margin != 0.0 else 0.0
    if kind == "bf_lift" or (kind == "seed" and params.get("seed_kind") == "bf_seed"):
        if clean_box[2][0] <= max(margin, 0.0) / 2:
            probs.add("domain.box[2]", "Re z must stay positive so that z + zbar > 0 (and above the margin)")

    suite_raw = doc.get("suite", [])
    if not isinstance(suite_raw, list) or not suite_raw:
        probs.add("suite", "expected at least one [[suite]] entry")
        suite_raw = []
    suite = []
    for i, entry in enumerate(suite_raw):
        path = f"suite[{i}]"
        if not isinstance(entry, dict):
            probs.add(path, "expected a table")
            continue
        ck = entry.get("check")
        if ck not in CHECK_KINDS:
            probs.add(f"{path}.check", f"expected one of {list(CHECK_KINDS)}, got {ck!r}")
            continue
        suite.append(CheckSpec(ck, _validate_check(ck, entry, kind, params, path, probs)))
    _validate_charts(kind, params, suite, probs)
    probs.raise_if_any()
    return RunConfig(kind, params, suite, clean_box, margin, samples, rng_seed, doc.get("name", ""), doc)


_SEED_CHARTS = {
    "helmholtz_mode": Chart.LEGENDRE_CMA,
    "laplace3_mode": Chart.LEGENDRE_CMA,
    "wave3_mode": Chart.LEGENDRE_HCMA,
    "bf_seed": Chart.ROT_LEGENDRE,
}
_FAMILY_CHARTS = {
    "helmholtz_lift": Chart.LEGENDRE_CMA,
    "wave_lift": Chart.LEGENDRE_HCMA,
    "bf_lift": Chart.ROT_LEGENDRE,
}


def _validate_charts(kind: str, params: dict, suite: list[CheckSpec], probs: _Problems) -> None:
    """Every equation must live in the family's chart and need only fields it provides."""
    chart = _FAMILY_CHARTS.get(kind) or _SEED_CHARTS.get(params.get("seed_kind"))
    has_omega = kind == "bf_lift" and "constrained_alpha" in params and params.get("variant") in ("A", "B")
    for i, spec in enumerate(suite):
        eqs = list(spec.options.get("equations", [])) + list(spec.options.get("premises", []))
        if spec.options.get("consequence") is not None:
            eqs.append(spec.options["consequence"])
        for eq in eqs:
            path = f"suite[{i}]"
            if chart is not None and eq.chart is not chart:
                probs.add(path, f"{eq.value} lives in chart {eq.chart.value}, the {kind} family in {chart.value}")
            elif eq.n_aux > 1 or (eq.n_aux == 1 and not has_omega):
                probs.add(path, f"{eq.value} needs auxiliary fields the {kind} family does not provide")


def _validate_family(kind: str, params: dict, probs: _Problems) -> None:
    base = "family.params"
    if kind == "helmholtz_lift":
        modes = params.get("modes")
        if not isinstance(modes, list) or not modes:
            probs.add(f"{base}.modes", "expected a non-empty list of {alpha, F, G} tables")
            return
        for i, m in enumerate(modes):
            p = f"{base}.modes[{i}]"
            if not isinstance(m, dict):
                probs.add(p, "expected a table")
                continue
            for key in ("alpha", "F", "G"):
                if key not in m:
                    probs.add(f"{p}.{key}", "missing")
            a = _complex(m.get("alpha", 1.0), f"{p}.alpha", probs)
            if abs(a) < 1:
                probs.add(f"{p}.alpha", f"|alpha_j| >= 1 is required, got |alpha| = {abs(a):.6g}")
        if params.get("z2_factor", "per_mode") not in ("per_mode", "common"):
            probs.add(f"{base}.z2_factor", "expected 'per_mode' or 'common'")
    elif kind == "wave_lift":
        modes = params.get("modes")
        if not isinstance(modes, list) or not modes:
            probs.add(f"{base}.modes", "expected a non-empty list of {alpha, beta, amplitude, branch} tables")
            return
        for i, m in enumerate(modes):
            p = f"{base}.modes[{i}]"
            if not isinstance(m, dict):
                probs.add(p, "expected a table")
                continue
            _real(m.get("alpha", 0.0), f"{p}.alpha", probs)
            beta = _real(m.get("beta", 0.0), f"{p}.beta", probs)
            if beta == 0:
                probs.add(f"{p}.beta", "beta must be non-zero (degenerate mode)")
            if m.get("branch", "plus") not in ("plus", "minus"):
                probs.add(f"{p}.branch", "expected 'plus' or 'minus'")
            _complex(m.get("amplitude", 1.0), f"{p}.amplitude", probs)
    elif kind == "bf_lift":
        variant = params.get("variant")
        if variant not in ("A", "B", "C"):
            probs.add(f"{base}.variant", f"expected 'A', 'B' or 'C', got {variant!r}")
        b = params.get("b")
        if not isinstance(b, list) or not b:
            probs.add(f"{base}.b", "expected a list of polynomial coefficients")
        else:
            if len(b) > 9:
                probs.add(f"{base}.b", "degree must be at most 8")
            for i, c in enumerate(b):
                _complex(c, f"{base}.b[{i}]", probs)
        for key in ("r", "k"):
            if key in params:
                vals = params[key]
                if not isinstance(vals, list) or not vals:
                    probs.add(f"{base}.{key}", "expected a list of real coefficients")
                else:
                    for i, c in enumerate(vals):
                        _real(c, f"{base}.{key}[{i}]", probs)
        if variant == "C" and "k" not in params:
            probs.add(f"{base}.k", "variant C needs k(y)")
        if "constrained_alpha" in params:
            a = _real(params["constrained_alpha"], f"{base}.constrained_alpha", probs)
            if not 0 <= a < 2 * math.pi:
                probs.add(f"{base}.constrained_alpha", "must lie in [0, 2 pi)")
            if variant == "C":
                probs.add(f"{base}.constrained_alpha", "constrained r is defined for variants A and B")
    elif kind == "seed":
        sk = params.get("seed_kind")
        if sk not in [k.value for k in SeedKind]:
            probs.add(f"{base}.seed_kind", f"expected one of {[k.value for k in SeedKind]}, got {sk!r}")
            return
        if sk == "bf_seed":
            b = params.get("b")
            if not isinstance(b, list) or not b:
                probs.add(f"{base}.b", "expected a list of polynomial coefficients")
        elif not isinstance(params.get("modes"), list) or not params["modes"]:
            probs.add(f"{base}.modes", "expected a non-empty list of modes")


def _validate_check(ck: str, entry: dict, kind: str, params: dict, path: str, probs: _Problems) -> dict:
    opts = {k: v for k, v in entry.items() if k != "check"}
    if "tolerance" in opts:
        opts["tolerance"] = _real(opts["tolerance"], f"{path}.tolerance", probs, positive=True)
    if "lam" in opts:
        opts["lam"] = _complex(opts["lam"], f"{path}.lam", probs)
    if "samples" in opts and (not isinstance(opts["samples"], int) or opts["samples"] < 1):
        probs.add(f"{path}.samples", "must be an integer >= 1")
    if ck == "residual":
        opts["equations"] = _equations(opts.get("equations"), f"{path}.equations", probs)
        opts.setdefault("tolerance", 1e-9)
    elif ck == "consequence":
        opts["premises"] = _equations(opts.get("premises"), f"{path}.premises", probs)
        cons = _equations(opts.get("consequence"), f"{path}.consequence", probs)
        if len(cons) > 1:
            probs.add(f"{path}.consequence", "expected a single equation")
        opts["consequence"] = cons[0] if cons else None
        opts.setdefault("tolerance", 1e-9)
    elif ck in ("geometry", "invariance", "legendre_roundtrip"):
        if kind not in ("helmholtz_lift", "bf_lift"):
            probs.add(f"{path}.check", f"{ck} needs a push-forward; family {kind!r} has none")
        if ck == "invariance":
            names = opts.get("algebra")
            try:
                opts["algebra"] = (
                    geometry.CandidateAlgebra.from_names(names) if names else geometry.CandidateAlgebra.default()
                )
            except ValueError as exc:
                probs.add(f"{path}.algebra", str(exc))
            if opts.get("expect", "full_rank") not in ("full_rank", "deficient"):
                probs.add(f"{path}.expect", "expected 'full_rank' or 'deficient'")
    elif ck == "dispersion":
        pairs = opts.get("pairs")
        if pairs is None and kind != "wave_lift":
            probs.add(f"{path}.pairs", "needed unless the family is wave_lift")
        for i, pr in enumerate(pairs or []):
            if not (isinstance(pr, list) and len(pr) == 2):
                probs.add(f"{path}.pairs[{i}]", "expected [alpha, beta]")
            elif pr[1] == 0:
                probs.add(f"{path}.pairs[{i}]", "beta must be non-zero")
        opts.setdefault("tolerance", 1e-12)
    return opts


# -- family construction ---------------------------------------------------------------


@dataclass
class Family:
    kind: str
    chart: Chart
    fields: dict[str, FieldEvaluator]
    lam: complex = 1j
    transform: legendre.TransformKind | None = None
    expected_det: float | None = None

    @property
    def primary(self) -> FieldEvaluator:
        return self.fields["primary"]

    def image(self, point) -> tuple:
        """Target of the push-forward reached from a family-chart point."""
        if self.transform is legendre.TransformKind.ROT:
            return legendre.rot_image(self.primary, point)
        J = self.primary.fn(tuple(point), 1)
        vp = 0.5 * (J.coeff((1, 0, 0, 0)) - 1j * J.coeff((0, 1, 0, 0)))
        return (-vp.real, -vp.imag, point[2], point[3])

    def pushed(self, seeds: dict) -> FieldEvaluator:
        spec = legendre.TransformSpec(self.transform)
        return FieldEvaluator(
            Chart.ORIGINAL,
            lambda p, k: legendre.legendre_transform(spec, self.primary, p, k, seeds[tuple(p)]),
            None,
            f"pushed[{self.primary.name}]",
        )


def _cx_list(values) -> tuple[complex, ...]:
    return tuple(complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in values)


def build_family(cfg: RunConfig) -> Family:
    p = cfg.params
    if cfg.family == "helmholtz_lift":
        modes = tuple(HelmholtzMode(*_cx_list([m["alpha"], m["F"], m["G"]])) for m in p["modes"])
        hp = HelmholtzLiftParams(modes, p.get("z2_factor", "per_mode"), float(p.get("z2_scale", 1.0)))
        return Family(
            cfg.family,
            Chart.LEGENDRE_CMA,
            {"primary": helmholtz_lift(hp), "w": helmholtz_w(hp)},
            transform=legendre.TransformKind.TWO_VAR,
            expected_det=1.0,
        )
    if cfg.family == "wave_lift":
        modes = tuple(
            WaveMode(float(m.get("alpha", 0.0)), float(m["beta"]), _cx_list([m.get("amplitude", 1.0)])[0],
                     m.get("branch", "plus"))
            for m in p["modes"]
        )  # fmt: skip
        return Family(cfg.family, Chart.LEGENDRE_HCMA, {"primary": wave_lift(WaveLiftParams(modes, p.get("realize", False)))})
    if cfg.family == "bf_lift":
        bp = BFLiftParams(
            p["variant"],
            HolomorphicPoly(_cx_list(p["b"])),
            RealSmoothFn(tuple(p.get("r", [0.0]))),
            RealSmoothFn(tuple(p["k"])) if "k" in p else None,
            p.get("constrained_alpha"),
            float(p.get("r0", 0.0)),
        )
        fields = {"primary": bf_lift(bp)}
        if bp.constrained_alpha is not None and bp.variant in ("A", "B"):
            fields["omega"] = bf_backlund_partner(bp)
        return Family(cfg.family, Chart.ROT_LEGENDRE, fields, bp.lam, legendre.TransformKind.ROT, -1.0)
    sk = SeedKind(p["seed_kind"])
    if sk is SeedKind.BF_SEED:
        sp = SeedParams(b=HolomorphicPoly(_cx_list(p["b"])))
    elif sk is SeedKind.WAVE3_MODE:
        sp = SeedParams(tuple((m[0], m[1], _cx_list([m[2]])[0], m[3]) for m in p["modes"]))
    else:
        sp = SeedParams(tuple((m[0], _cx_list([m[1]])[0]) for m in p["modes"]))
    ev = seed(sk, sp)
    return Family(cfg.family, ev.chart, {"primary": ev})


# -- sampling ---------------------------------------------------------------------------


def _rng(seed_value: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed_value, stream]))


@dataclass
class SampleLog:
    resampled: int = 0
    failed: int = 0


def draw_points(
    cfg: RunConfig, n: int, stream: int, valid: Callable[[tuple], bool], slog: SampleLog
) -> list[tuple]:
    """n points from the domain box; invalid draws are redrawn up to 10 times each."""
    rng = _rng(cfg.rng_seed, stream)
    lo = np.array([b[0] for b in cfg.box])
    hi = np.array([b[1] for b in cfg.box])
    out = []
    for i in range(n):
        for attempt in range(MAX_RESAMPLE + 1):
            p = tuple(float(x) for x in lo + (hi - lo) * rng.random(4))
            if valid(p):
                out.append(p)
                break
            slog.resampled += 1
            log.info("point %d: singular draw %s, resampling (%d)", i, p, attempt + 1)
        else:
            slog.failed += 1
            log.warning("point %d: no valid draw after %d attempts", i, MAX_RESAMPLE)
    return out


def _valid_for(fam: Family, cfg: RunConfig):
    def valid(p):
        if fam.chart is Chart.ROT_LEGENDRE and 2 * p[2] <= cfg.margin:
            return False
        try:
            for f in fam.fields.values():
                f(p, 1)
        except SingularPointError:
            return False
        return True

    return valid


def _pmap(fn, items, jobs: int):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- checks -------------------------------------------------------------------------------


def _stat_row(kind: str, name: str, values: Sequence[float], tol: float, **extra) -> dict:
    vals = [float(v) for v in values]
    row = {
        "check": kind,
        "name": name,
        "points": len(vals),
        "max": max(vals) if vals else float("nan"),
        "mean": float(np.mean(vals)) if vals else float("nan"),
        "tolerance": tol,
        "pass": bool(vals) and max(vals) < tol,
    }
    row.update(extra)
    return row


def _field_for(fam: Family, eq: EquationId) -> tuple[FieldEvaluator, list[FieldEvaluator]]:
    if eq.n_aux == 0:
        if eq.quantity == "w" and "w" in fam.fields:
            return fam.fields["w"], []
        return fam.primary, []
    if eq.n_aux == 1 and "omega" in fam.fields:
        return fam.primary, [fam.fields["omega"]]
    raise ConfigError([("suite", f"{eq.value} needs auxiliary fields the {fam.kind} family does not provide")])


def _residual_values(fam, eq, points, lam, jobs):
    u, aux = _field_for(fam, eq)
    if u.chart != eq.chart:
        raise ConfigError([("suite", f"{eq.value} lives in chart {eq.chart.value}, family in {u.chart.value}")])

    def one(p):
        if aux:
            return pde.residual_pair(eq, u, aux, p, lam).normalized
        return pde.residual(eq, u, p, lam).normalized

    return _pmap(one, points, jobs)


def check_residual(fam, cfg, opts, points, jobs) -> list[dict]:
    lam = opts.get("lam", fam.lam)
    tol = opts["tolerance"]
    return [_stat_row("residual", eq.value, _residual_values(fam, eq, points, lam, jobs), tol) for eq in opts["equations"]]


def check_consequence(fam, cfg, opts, points, jobs) -> list[dict]:
    lam = opts.get("lam", fam.lam)
    tol = opts["tolerance"]
    prem = {eq.value: max(_residual_values(fam, eq, points, lam, jobs)) for eq in opts["premises"]}
    cons = _residual_values(fam, opts["consequence"], points, lam, jobs)
    row = _stat_row("consequence", opts["consequence"].value, cons, tol, premises=prem)
    premise_ok = all(v < tol for v in prem.values())
    row["status"] = "premise_violation" if not premise_ok else ("pass" if row["pass"] else "consequence_violation")
    row["pass"] = row["pass"] and premise_ok
    return [row]


def _pushed_points(fam: Family, points) -> tuple[list[tuple], dict]:
    targets, seeds = [], {}
    for p in points:
        t = tuple(float(x) for x in fam.image(p))
        targets.append(t)
        seeds[t] = p
    return targets, seeds


def check_geometry(fam, cfg, opts, points, jobs) -> list[dict]:
    targets, seeds = _pushed_points(fam, points)
    u = fam.pushed(seeds)
    data = _pmap(lambda t: geometry.kahler_from_jet(u(t, 4)), targets, jobs)
    det_tol = float(opts.get("det_tol", 1e-8 if fam.expected_det > 0 else 1e-6))
    ricci_tol = float(opts.get("ricci_tol", 1e-6))
    want = geometry.Signature.EUCLIDEAN if fam.expected_det > 0 else geometry.Signature.ULTRA_HYPERBOLIC
    rows = [
        _stat_row("geometry", "det_g", [abs(d.det_g - fam.expected_det) for d in data], det_tol),
        _stat_row("geometry", "ricci_trace", [d.ricci_normalized("trace") for d in data], ricci_tol),
        _stat_row("geometry", "ricci_logdet", [d.ricci_normalized("logdet") for d in data], ricci_tol),
        _stat_row("geometry", "signature", [float(d.signature is not want) for d in data], 0.5, expected=want.value),
    ]
    cert = [geometry.nonflatness_certificate(d) for d in data]
    if "nonflat_min" in opts:
        thr = float(opts["nonflat_min"])
        rows.append(
            {"check": "geometry", "name": "nonflatness", "points": len(cert), "min": min(cert),
             "max": max(cert), "threshold": thr, "pass": min(cert) > thr}
        )  # fmt: skip
    else:
        rows.append({"check": "geometry", "name": "nonflatness", "points": len(cert), "min": min(cert),
                     "max": max(cert), "pass": True})  # fmt: skip
    return rows


def check_invariance(fam, cfg, opts, points, jobs) -> list[dict]:
    algebra = opts["algebra"]
    targets, seeds = _pushed_points(fam, points)
    res = geometry.invariance_rank(fam.pushed(seeds), algebra, targets, jobs)
    ratio = float(opts.get("min_ratio", 1e-6))
    full = res.rank == len(algebra) and res.min_singular_value > ratio * res.norm
    expect = opts.get("expect", "full_rank")
    return [
        {
            "check": "invariance",
            "name": "rank",
            "points": res.points,
            "algebra": list(res.columns),
            "rank": res.rank,
            "min_singular_value": res.min_singular_value,
            "norm": res.norm,
            "min_ratio": ratio,
            "expect": expect,
            "pass": full if expect == "full_rank" else not full,
        }
    ]


def check_roundtrip(fam, cfg, opts, points, jobs) -> list[dict]:
    order = int(opts.get("order", 3))
    tol = float(opts.get("tolerance", 1e-8))

    def one(p):
        t = tuple(float(x) for x in fam.image(p))
        spec = legendre.TransformSpec(fam.transform)
        U = legendre.legendre_transform(spec, fam.primary, t, order, seed=p)
        if fam.transform is legendre.TransformKind.TWO_VAR:
            u = FieldEvaluator(Chart.ORIGINAL, lambda x, k: legendre.legendre_transform(spec, fam.primary, x, k, seed=p))
            back = legendre.forward_two_var(u, p, order, seed=t)
            return float(np.max(np.abs(back.coeffs - fam.primary(p, order).coeffs)))
        # rot: z1 u_1 must equal q at the preimage
        z1 = complex(t[0], t[1])
        u1 = 0.5 * (U.coeff((1, 0, 0, 0)) - 1j * U.coeff((0, 1, 0, 0)))
        return abs(z1 * u1 - complex(p[0], p[1]))

    return [_stat_row("legendre_roundtrip", fam.transform.value, _pmap(one, points, jobs), tol)]


def check_dispersion(fam, cfg, opts, points, jobs) -> list[dict]:
    pairs = opts.get("pairs")
    if pairs is None:
        pairs = [[m.alpha, m.beta] for m in fam.primary.params.modes]
    table, errs = [], []
    for a, b in pairs:
        dp = pde.dispersion_delta(a, b, "plus")
        dm = pde.dispersion_delta(a, b, "minus")
        err = abs(dp * dm - (a * a + b * b)) / max(1.0, a * a + b * b)
        table.append({"alpha": float(a), "beta": float(b), "delta_plus": dp, "delta_minus": dm})
        errs.append(err)
    return [_stat_row("dispersion", "delta_product", errs, opts["tolerance"], table=table)]


CHECKS = {
    "residual": check_residual,
    "consequence": check_consequence,
    "geometry": check_geometry,
    "invariance": check_invariance,
    "legendre_roundtrip": check_roundtrip,
    "dispersion": check_dispersion,
}
DEFAULT_COUNTS = {"geometry": 5, "legendre_roundtrip": 3}


# -- run ---------------------------------------------------------------------------------


def run(cfg: RunConfig, jobs: int = 1, csv_rows: list | None = None) -> dict:
    """Execute every suite entry; returns the report (verdict 'pass' or 'fail')."""
    fam = build_family(cfg)
    valid = _valid_for(fam, cfg)
    slog = SampleLog()
    checks = []
    for i, spec in enumerate(cfg.suite):
        n = spec.options.get("samples")
        if n is None:
            n = 4 * len(spec.options["algebra"]) if spec.kind == "invariance" else DEFAULT_COUNTS.get(spec.kind, cfg.samples)
        points = [] if spec.kind == "dispersion" else draw_points(cfg, n, i, valid, slog)
        try:
            rows = CHECKS[spec.kind](fam, cfg, spec.options, points, jobs)
        except (SingularPointError, LegendreError) as exc:
            rows = [{"check": spec.kind, "name": "error", "points": len(points), "error": str(exc), "pass": False}]
        if csv_rows is not None and spec.kind == "residual":
            _collect_csv(csv_rows, fam, spec.options, points)
        checks.extend(rows)
    ok = all(r["pass"] for r in checks) and slog.failed == 0
    report = {
        "name": cfg.name,
        "family": cfg.family,
        "checks": checks,
        "sampling": {"resampled": slog.resampled, "failed": slog.failed},
        "environment": {"version": __version__, "rng_seed": cfg.rng_seed},
        "verdict": "pass" if ok else "fail",
    }
    if fam.transform is not None:
        report["transform"] = {"kind": fam.transform.value}
        if fam.transform is legendre.TransformKind.ROT:
            report["transform"]["zeta_branch"] = "principal"
    return report


def _collect_csv(rows: list, fam: Family, opts: dict, points) -> None:
    lam = opts.get("lam", fam.lam)
    eqs = opts["equations"]
    for p in points:
        v = fam.primary(p, 0).value
        res = []
        for eq in eqs:
            u, aux = _field_for(fam, eq)
            r = pde.residual_pair(eq, u, aux, p, lam) if aux else pde.residual(eq, u, p, lam)
            res.append((eq.value, r.normalized))
        rows.append((p, v, res))


def write_csv(rows: list, stream) -> None:
    names = [n for n, _ in rows[0][2]] if rows else []
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["c0", "c1", "c2", "c3", "value_re", "value_im"] + [f"residual_{n}" for n in names])
    for p, v, res in rows:
        w.writerow([_fmt(x) for x in p] + [_fmt(v.real), _fmt(v.imag)] + [_fmt(r) for _, r in res])


# -- report formatting ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps_report(obj: Any, indent: int = 0) -> str:
    """JSON with sorted keys and every float at 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_report(obj[k], indent + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps_report(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = _fmt(obj)
        return s if s[0].isdigit() or s[0] == "-" and s[1].isdigit() else json.dumps(s)
    if isinstance(obj, complex):
        return dumps_report([obj.real, obj.imag], indent)
    return json.dumps(str(obj))


# -- built-in demo pipelines ---------------------------------------------------------------

DEMO_PIPELINES: dict[str, list[dict]] = {
    "helmholtz": [
        {
            "name": "helmholtz seed",
            "family": {"kind": "seed", "params": {"seed_kind": "helmholtz_mode", "modes": [[1.7, [1.0, 0.0]], [-0.6, [0.3, 0.2]]]}},
            "domain": {"box": [[-0.5, 0.5]] * 4},
            "suite": [{"check": "residual", "equations": ["HELMHOLTZ"], "tolerance": 1e-11}],
        },
        {
            "name": "laplace seed",
            "family": {"kind": "seed", "params": {"seed_kind": "laplace3_mode", "modes": [[1.7, [1.0, 0.0]]]}},
            "domain": {"box": [[-0.5, 0.5]] * 4},
            "suite": [{"check": "residual", "equations": ["LAPLACE3"], "tolerance": 1e-11}],
        },
        {
            "name": "helmholtz lift",
            "family": {
                "kind": "helmholtz_lift",
                "params": {"modes": [{"alpha": [1.3, 0.4], "F": [0.7, 0.2], "G": [0.3, -0.1]},
                                     {"alpha": [1.0, 0.0], "F": [0.5, 0.0], "G": [0.2, 0.0]}]},
            },  # fmt: skip
            "suite": [
                {"check": "residual", "equations": ["LINV_ALL", "W_WAVE", "LAPLACE3_W"], "tolerance": 1e-10},
                {"check": "residual", "equations": ["VEQ_ALL", "VEQ_UNIT", "CMA_LEGENDRE"], "tolerance": 1e-9},
                {"check": "consequence", "premises": ["LINV_ALL"], "consequence": "CMA_LEGENDRE", "tolerance": 1e-9},
                {"check": "legendre_roundtrip", "tolerance": 1e-8},
                {"check": "geometry", "det_tol": 1e-8, "ricci_tol": 1e-6, "nonflat_min": 1e-3},
            ],
        },
    ],
    "bf": [
        {
            "name": "boyer-finley seed",
            "family": {"kind": "seed", "params": {"seed_kind": "bf_seed", "b": [[0.0, 0.0], [1.0, 0.0]]}},
            "suite": [{"check": "residual", "equations": ["BF_V"], "tolerance": 1e-10}],
        },
        *[
            {
                "name": f"bf lift {v}",
                "family": {"kind": "bf_lift", "params": {"variant": v, "b": [[0.1, 0.0], [1.0, 0.2]],
                                                         "r": [0.3, 0.2, -0.1], **({"k": [0.1, 0.05]} if v == "C" else {})}},
                "suite": [{"check": "residual", "equations": ["HCMA_LEG_ROT", "BF_REAL"], "tolerance": 1e-9}],
            }  # fmt: skip
            for v in ("A", "B", "C")
        ],
        {
            "name": "bf lift constrained",
            "family": {"kind": "bf_lift", "params": {"variant": "A", "b": [[0.0, 0.0], [1.0, 0.0]], "constrained_alpha": 0.7}},
            "suite": [
                {"check": "residual", "equations": ["ROT_CONSTRAINTS", "ROT_CONSTRAINTS_XY"], "tolerance": 1e-9},
                {"check": "consequence", "premises": ["ROT_CONSTRAINTS", "HCMA_LEG_ROT"], "consequence": "BF_COMBINED", "tolerance": 1e-9},
                {"check": "residual", "equations": ["BACKLUND_1", "BACKLUND_2", "OMEGA_SYM", "LIE_Y"], "tolerance": 1e-9},
            ],
        },
        {
            "name": "bf push-forward",
            "family": {"kind": "bf_lift", "params": {"variant": "A", "b": [[0.0, 0.0], [1.0, 0.0]], "r": [0.3, 0.2, -0.1]}},
            "domain": {"box": [[0.6, 1.0], [-0.3, 0.3], [0.8, 1.2], [-0.3, 0.3]]},
            "suite": [
                {"check": "legendre_roundtrip", "tolerance": 1e-8},
                {"check": "geometry", "det_tol": 1e-6, "ricci_tol": 1e-6, "nonflat_min": 1e-3},
                {"check": "invariance", "min_ratio": 1e-6},
            ],
        },
    ],
}


def lift_demo(pipeline: str, seed_value: int, jobs: int = 1) -> dict:
    stages = []
    for doc in DEMO_PIPELINES[pipeline]:
        cfg = config_from_dict({**doc, "rng_seed": seed_value, "samples": 10})
        rep = run(cfg, jobs)
        chain = [r["name"] for r in rep["checks"]]
        log.info("%s: %s -> %s", cfg.name, ", ".join(chain), rep["verdict"])
        stages.append(rep)
    ok = all(s["verdict"] == "pass" for s in stages)
    return {
        "pipeline": pipeline,
        "stages": stages,
        "environment": {"version": __version__, "rng_seed": seed_value},
        "verdict": "pass" if ok else "fail",
    }


def dispersion_report(cfg: RunConfig | None) -> dict:
    if cfg is None:
        pairs = [[a, b] for a in (-2.0, -1.0, 0.0, 1.0, 2.0) for b in (0.5, 1.0, 2.0)]
        opts = {"pairs": pairs, "tolerance": 1e-12}
        fam = None
    else:
        specs = [s for s in cfg.suite if s.kind == "dispersion"]
        opts = specs[0].options if specs else {"tolerance": 1e-12}
        fam = build_family(cfg)
    rows = check_dispersion(fam, cfg, opts, [], 1)
    return {"checks": rows, "environment": {"version": __version__}, "verdict": "pass" if rows[0]["pass"] else "fail"}


def sample_grid(cfg: RunConfig, grid: Sequence[int]) -> list:
    fam = build_family(cfg)
    eqs = [eq for s in cfg.suite if s.kind == "residual" for eq in s.options["equations"]]
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(cfg.box, grid)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    valid = _valid_for(fam, cfg)
    rows: list = []
    pts = [tuple(float(x) for x in p) for p in mesh if valid(tuple(float(x) for x in p))]
    _collect_csv(rows, fam, {"equations": eqs}, pts)
    return rows


# -- entry point ----------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heavenlift", description="Verify lifted Monge-Ampere solution families.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("verify", "geometry", "dispersion", "lift-demo", "sample"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name in ("verify", "geometry", "sample"))
        sp.add_argument("--out")
        sp.add_argument("--csv")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "lift-demo":
            sp.add_argument("--pipeline", choices=sorted(DEMO_PIPELINES), default="helmholtz")
        if name == "sample":
            sp.add_argument("--grid", type=int, nargs=4, default=[3, 3, 3, 3])
    return ap


def _load(path: str, seed_override: int | None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([("--config", f"cannot read {path}: {exc.strerror}")]) from exc
    cfg = parse_config(text)
    if seed_override is not None:
        cfg.rng_seed = seed_override
    return cfg


def _emit(report: dict, out: str | None) -> None:
    text = dumps_report(report) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.jobs < 1:
        sys.stderr.write("error: --jobs must be >= 1\n")
        return EXIT_CONFIG
    try:
        if args.command == "lift-demo":
            report = lift_demo(args.pipeline, args.seed if args.seed is not None else 0, args.jobs)
        elif args.command == "dispersion":
            report = dispersion_report(_load(args.config, args.seed) if args.config else None)
        elif args.command == "sample":
            cfg = _load(args.config, args.seed)
            rows = sample_grid(cfg, args.grid)
            buf = io.StringIO()
            write_csv(rows, buf)
            if args.csv:
                with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                    fh.write(buf.getvalue())
            else:
                sys.stdout.write(buf.getvalue())
            return EXIT_PASS
        else:
            cfg = _load(args.config, args.seed)
            if args.command == "geometry":
                kept = [s for s in cfg.suite if s.kind in ("geometry", "invariance")]
                if not kept:
                    problems = [("suite", "no geometry or invariance entries")]
                    if cfg.family in ("helmholtz_lift", "bf_lift"):
                        cfg.suite = [
                            CheckSpec("geometry", {}),
                            CheckSpec("invariance", {"algebra": geometry.CandidateAlgebra.default()}),
                        ]
                    else:
                        raise ConfigError(problems)
                else:
                    cfg.suite = kept
            rows: list | None = [] if args.csv else None
            report = run(cfg, args.jobs, rows)
            if args.csv:
                with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                    write_csv(rows, fh)
    except ConfigError as exc:
        for path, msg in exc.problems:
            sys.stderr.write(f"config error: {path}: {msg}\n")
        return EXIT_CONFIG
    _emit(report, args.out)
    for stage in report.get("stages", [report]):
        for r in stage.get("checks", []):
            if not r["pass"]:
                log.warning("FAIL %s %s", r["check"], r["name"])
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
