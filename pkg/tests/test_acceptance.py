"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import json
import math
import operator
import time

import mpmath
import numpy as np
import pytest

from conftest import BF_BOX, SMALL_BOX, domain_points, pushed_jets, rand_points
from heavenlift import cli, jets, pde
from heavenlift import funcspace as fs
from heavenlift import geometry as G
from heavenlift import legendre as L
from heavenlift import solutions as S
from heavenlift.jets import Jet
from heavenlift.pde import EquationId as E
from heavenlift.pde import residual, residual_pair
from heavenlift.solutions import Chart, FieldEvaluator
from test_jets import _jet_and_mp, fd_partial

N_POINTS = 100
TIME_BUDGET = 10.0
LT, GT = ("<", operator.lt), (">", operator.gt)


@pytest.fixture
def verdict(capsys, request):
    """Collect (label, value, comparison, threshold) rows and print one summary line."""
    rows = []
    start = time.perf_counter()
    yield rows
    elapsed = time.perf_counter() - start
    failed = [f"{lab}={val:.3g} (want {op[0]} {thr:g})" for lab, val, op, thr in rows if not op[1](val, thr)]
    if elapsed >= TIME_BUDGET:
        failed.append(f"time {elapsed:.1f}s over budget")
    with capsys.disabled():
        status = "PASS" if rows and not failed else "FAIL"
        detail = "; ".join(failed) if failed else ", ".join(f"{lab}={val:.2e}" for lab, val, _, _ in rows)
        print(f"\n[acceptance] {request.node.name}: {status} ({elapsed:.2f}s) {detail}")
    assert rows and not failed, failed


def _max(values):
    return float(max(values))


def _orig(expr):
    def f(X):
        return expr(X[0] + 1j * X[1], X[0] - 1j * X[1], X[2] + 1j * X[3], X[2] - 1j * X[3])

    return FieldEvaluator.from_expression(Chart.ORIGINAL, f)


FLAT = _orig(lambda a, ab, b, bb: a * ab + b * bb)
FLAT_H = _orig(lambda a, ab, b, bb: a * ab - b * bb)
HELMHOLTZ = S.HelmholtzLiftParams(((1.3 + 0.4j, 0.7 + 0.2j, 0.3 - 0.1j), (1.0, 0.5, 0.2), (-1.1 + 0.6j, 0.2j, 0.4)))
R_GENERIC = fs.RealSmoothFn((0.3, 0.2, -0.1))
K_GENERIC = fs.RealSmoothFn((0.1, 0.05))
B_CHOICES = {"1": (1,), "z": (0, 1), "z^2": (0, 0, 1)}


# -- 1. jets -----------------------------------------------------------------------------


def _random_jet(rng, order=3):
    n = len(jets.multi_indices(4, order))
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    c[0] = 1.5 + 0.3j  # keep the inverse identities off their branch cuts
    return Jet(c, 4, order)


def test_criterion_1_jets(verdict):
    rng = np.random.default_rng(1)
    fd_idx = [m for m in jets.multi_indices(4, 2) if sum(m) >= 1]
    worst = 0.0
    for x in rng.uniform(-0.4, 0.4, size=(200, 4)):
        xm = [mpmath.mpf(float(v)) for v in x]
        for name in ("exp", "ln", "sqrt", "composite"):
            jf, mf = _jet_and_mp(name)
            J = jf(jets.variables(tuple(x), 2))
            for m in fd_idx:
                ref = complex(fd_partial(mf, xm, m))
                worst = max(worst, abs(jets.extract(J, m) - ref) / max(1.0, abs(ref)))
    verdict.append(("fd_rel_err", worst, LT, 1e-6))

    ring = inv = 0.0
    for _ in range(200):
        a, b, c = (_random_jet(rng) for _ in range(3))
        scale = max(np.max(np.abs(t.coeffs)) for t in (a * b * c, a * (b + c)))
        for lhs, rhs in [((a * b) * c, a * (b * c)), (a * (b + c), a * b + a * c), (a * b, b * a),
                         ((a + b) + c, a + (b + c)), (a - a, 0 * a), (a * 1.0, a)]:  # fmt: skip
            ring = max(ring, np.max(np.abs((lhs - rhs).coeffs)) / max(1.0, scale))
        one = jets.constant(1.0, 4, 3)
        for lhs, rhs in [(a * (1 / a), one), (jets.exp(jets.log(a)), a), (jets.sqrt(a) * jets.sqrt(a), a),
                         (jets.log(jets.exp(a)) - a, 0 * a)]:  # fmt: skip
            inv = max(inv, np.max(np.abs((lhs - rhs).coeffs)) / max(1.0, np.max(np.abs(rhs.coeffs))))
    verdict.append(("ring_axioms", ring, LT, 1e-12))
    verdict.append(("inverse_identities", inv, LT, 1e-12))


# -- 2. Helmholtz lift ---------------------------------------------------------------------


def test_criterion_2_helmholtz_lift(verdict):
    rng = np.random.default_rng(2)
    w = S.helmholtz_w(HELMHOLTZ)
    v = S.helmholtz_lift(HELMHOLTZ)
    pts = domain_points(rng, N_POINTS, SMALL_BOX, v)
    verdict.append(("linear_8", _max(residual(eq, w, p).normalized for eq in pde.LINV_ALL for p in pts), LT, 1e-10))
    verdict.append(("CMA_LEGENDRE", _max(residual(E.CMA_LEGENDRE, v, p).normalized for p in pts), LT, 1e-9))
    verdict.append(("VEQ_UNIT", _max(residual(E.VEQ_UNIT, v, p).normalized for p in pts), LT, 1e-9))
    bad = S.helmholtz_w(S.HelmholtzLiftParams(HELMHOLTZ.modes, z2_scale=1.01))
    control = _max(residual(eq, bad, p).normalized for eq in pde.LINV_ALL for p in pts[:10])
    verdict.append(("negative_control", control, GT, 1e-4))


# -- 3. wave lift --------------------------------------------------------------------------


def test_criterion_3_wave_lift(verdict):
    rng = np.random.default_rng(3)
    modes = ((0.7, 1.1, 1.0, "plus"), (-0.4, 0.6, 0.5j, "minus"), (1.5, -0.8, 0.3 - 0.2j, "plus"))
    f = S.wave_lift(S.WaveLiftParams(modes, realize=True))
    pts = rand_points(rng, N_POINTS, [(-1, 1)] * 4)
    for eq in (E.PARTNER_A, E.PARTNER_B, E.PARTNER_C):
        verdict.append((eq.value, _max(residual(eq, f, p).normalized for p in pts), LT, 1e-11))
    verdict.append(("HCMA_LEGENDRE", _max(residual(E.HCMA_LEGENDRE, f, p).normalized for p in pts), LT, 1e-10))
    err = 0.0
    for a, b in zip(rng.uniform(-3, 3, N_POINTS), rng.uniform(0.05, 3, N_POINTS) * rng.choice([-1, 1], N_POINTS)):
        dp, dm = pde.dispersion_delta(a, b, "plus"), pde.dispersion_delta(a, b, "minus")
        err = max(err, abs(dp * dm - (a * a + b * b)) / max(1.0, a * a + b * b))
    verdict.append(("dispersion_product", err, LT, 1e-12))


# -- 4. Boyer-Finley lifts -----------------------------------------------------------------


def test_criterion_4_bf_lift(verdict):
    rng = np.random.default_rng(4)
    pts = rand_points(rng, N_POINTS, BF_BOX)
    worst = 0.0
    for b in B_CHOICES.values():
        for variant in "ABC":
            f = S.bf_lift(S.BFLiftParams(variant, fs.HolomorphicPoly(b), R_GENERIC, K_GENERIC if variant == "C" else None))
            worst = max(worst, _max(residual(eq, f, p).normalized for eq in (E.HCMA_LEG_ROT, E.BF_REAL) for p in pts))
    verdict.append(("HCMA_LEG_ROT+BF_REAL", worst, LT, 1e-9))

    b = fs.HolomorphicPoly((0.2, 1.0, 0.1))
    fb = S.bf_lift(S.BFLiftParams("B", b, R_GENERIC))
    fc = S.bf_lift(S.BFLiftParams("C", b, R_GENERIC, fs.RealSmoothFn((0.0,))))
    verdict.append(("B_vs_C_k0", _max(np.max(np.abs(fb(p, 2).coeffs - fc(p, 2).coeffs)) for p in pts), LT, 1e-12))

    cons = generic = 0.0
    lam_eqs = pde.ROT_CONSTRAINTS + pde.ROT_CONSTRAINTS_XY
    for bc in B_CHOICES.values():
        for variant in "AB":
            bp = S.BFLiftParams(variant, fs.HolomorphicPoly(bc), constrained_alpha=0.7, r0=0.2)
            psi = S.bf_lift(bp)
            cons = max(cons, _max(residual(eq, psi, p, lam=bp.lam).normalized for eq in lam_eqs for p in pts))
            gp = S.bf_lift(S.BFLiftParams(variant, fs.HolomorphicPoly(bc), R_GENERIC))
            generic_fail = _max(residual(eq, gp, p, lam=bp.lam).normalized for eq in pde.ROT_CONSTRAINTS for p in pts)
            generic = generic_fail if generic == 0.0 else min(generic, generic_fail)
    verdict.append(("ROT_CONSTRAINT_constrained", cons, LT, 1e-9))
    verdict.append(("ROT_CONSTRAINT_generic", generic, GT, 1e-3))


# -- 5. Legendre machinery -----------------------------------------------------------------


def test_criterion_5_legendre(verdict):
    rng = np.random.default_rng(5)
    v = S.helmholtz_lift(HELMHOLTZ)
    rt = 0.0
    for p in domain_points(rng, 10, SMALL_BOX, v):
        J = v(p, 1)
        z = (-0.5 * J.deriv(0).value.real, 0.5 * J.deriv(1).value.real, p[2], p[3])
        u = FieldEvaluator(Chart.ORIGINAL, lambda x, k, p=p: L.invert_two_var(v, x, k, seed=p))
        back = L.forward_two_var(u, p, 3, seed=z)
        rt = max(rt, np.max(np.abs(back.coeffs - v(p, 3).coeffs)))
    verdict.append(("two_var_roundtrip", rt, LT, 1e-8))

    eu = FieldEvaluator.from_expression(Chart.REAL_XYZT, lambda X: jets.exp(X[1]))
    ev = FieldEvaluator.from_expression(Chart.REAL_XYZT, lambda X: X[1] * (1 - jets.log(X[1])))
    one = 0.0
    for y in np.linspace(-1.5, 1.5, 13):
        q = math.exp(y)
        fwd = L.forward_one_var(eu, (0, q, 0, 0), 3, seed=(0, 0.5 * y, 0, 0))
        inv = L.invert_one_var(ev, (0, y, 0, 0), 3, seed=(0, 1.2 * q, 0, 0))
        one = max(one, np.max(np.abs(fwd.coeffs - ev((0, q, 0, 0), 3).coeffs)),
                  np.max(np.abs(inv.coeffs - eu((0, y, 0, 0), 3).coeffs)))  # fmt: skip
    verdict.append(("one_var_exp", one, LT, 1e-10))

    psi = S.bf_lift(S.BFLiftParams("A", fs.HolomorphicPoly((0, 1)), R_GENERIC))
    pts = [p for p in rand_points(rng, 10, BF_BOX) if residual(E.HCMA_LEG_ROT, psi, p).normalized < 1e-9]
    cma = 0.0
    for p in pts:
        z = L.rot_image(psi, p)
        u = FieldEvaluator(Chart.ORIGINAL, lambda x, k, p=p: L.push_forward_rot(psi, x, k, seed=p))
        cma = max(cma, residual(E.CMA_HYPERBOLIC, u, z).normalized)
    verdict.append(("verified_points", float(len(pts)), GT, 0))
    verdict.append(("rot_push_forward_CMA_HYPERBOLIC", cma, LT, 1e-6))


# -- 6. geometry ---------------------------------------------------------------------------


def test_criterion_6_geometry(verdict):
    rng = np.random.default_rng(6)
    flat = 0.0
    for u in (FLAT, FLAT_H):
        for p in rand_points(rng, 10, SMALL_BOX):
            k = G.kahler_from_jet(u(p, 4))
            flat = max(flat, G.nonflatness_certificate(k), np.max(np.abs(k.ricci)), np.max(np.abs(k.ricci_logdet)))
    verdict.append(("flat_curvature", flat, LT, 1e-12))

    v = S.helmholtz_lift(HELMHOLTZ)
    ell = [G.kahler_from_jet(u) for _, u in pushed_jets(v, domain_points(rng, 10, SMALL_BOX, v))]
    verdict.append(("elliptic_|det-1|", _max(abs(k.det_g - 1) for k in ell), LT, 1e-8))
    verdict.append(("elliptic_signature_mismatch", _max(k.signature is not G.Signature.EUCLIDEAN for k in ell), LT, 0.5))

    hyp, cert = [], []
    for b in ((0, 1), (0, 0, 1)):
        psi = S.bf_lift(S.BFLiftParams("A", fs.HolomorphicPoly(b), R_GENERIC))
        ks = [G.kahler_from_jet(u) for _, u in pushed_jets(psi, rand_points(rng, 5, BF_BOX))]
        hyp += ks
        cert.append(min(G.nonflatness_certificate(k) for k in ks))
    verdict.append(("hyperbolic_|det+1|", _max(abs(k.det_g + 1) for k in hyp), LT, 1e-6))
    verdict.append(("hyperbolic_signature_mismatch",
                    _max(k.signature is not G.Signature.ULTRA_HYPERBOLIC for k in hyp), LT, 0.5))  # fmt: skip
    verdict.append(("ricci_trace", _max(k.ricci_normalized("trace") for k in ell + hyp), LT, 1e-6))
    verdict.append(("ricci_logdet", _max(k.ricci_normalized("logdet") for k in ell + hyp), LT, 1e-6))
    verdict.append(("nonflatness_min", min(cert), GT, 1e-3))


# -- 7. invariance rank --------------------------------------------------------------------


def test_criterion_7_invariance(verdict):
    rng = np.random.default_rng(7)
    alg = G.CandidateAlgebra.default()
    flat = G.invariance_rank(FLAT, alg, rand_points(rng, 24, SMALL_BOX))
    verdict.append(("flat_rank_deficit", float(len(alg) - flat.rank), GT, 0))
    worst = math.inf
    for b in ((0, 1), (0, 0, 1)):
        psi = S.bf_lift(S.BFLiftParams("A", fs.HolomorphicPoly(b), R_GENERIC))
        table = dict(pushed_jets(psi, rand_points(rng, 24, BF_BOX), order=1))
        u = FieldEvaluator(Chart.ORIGINAL, lambda p, k, t=table: t[tuple(p)])
        res = G.invariance_rank(u, alg, list(table))
        worst = min(worst, res.min_singular_value / res.norm if res.rank == len(alg) else 0.0)
    verdict.append(("bf_sigma_min/norm", worst, GT, 1e-6))


# -- 8. command line -----------------------------------------------------------------------


NEG_CONTROL = """
rng_seed = 3
samples = 8
[family]
kind = "bf_lift"
[family.params]
variant = "A"
b = [[0.0, 0.0], [1.0, 0.0]]
r = [0.3, 0.2, -0.1]
[[suite]]
check = "residual"
equations = ["HCMA_LEG_ROT", "BF_REAL"]
tolerance = 1e-9
"""


def test_criterion_8_cli(verdict, tmp_path, capsys):
    ok = tmp_path / "ok.toml"
    ok.write_text(NEG_CONTROL)
    bad = tmp_path / "fail.toml"
    bad.write_text(NEG_CONTROL + '[[suite]]\ncheck = "residual"\nequations = ["ROT_CONSTRAINTS"]\n')
    broken = tmp_path / "broken.toml"
    broken.write_text(NEG_CONTROL.replace('variant = "A"', 'variant = "C"'))
    codes = [cli.main(["verify", "--config", str(f), "--out", str(tmp_path / f"{f.stem}.json")]) for f in (ok, bad, broken)]
    verdict.append(("exit_code_mismatches", float(sum(c != e for c, e in zip(codes, (0, 1, 2)))), LT, 0.5))

    outs = []
    for i in range(2):
        out = tmp_path / f"det{i}.json"
        cli.main(["verify", "--config", str(bad), "--out", str(out), "--seed", "5"])
        outs.append(out.read_bytes())
    verdict.append(("nondeterministic_reports", float(outs[0] != outs[1]), LT, 0.5))

    failing = 0
    for pipeline in ("helmholtz", "bf"):
        code = cli.main(["lift-demo", "--pipeline", pipeline])
        rep = json.loads(capsys.readouterr().out)
        failing += int(code != 0 or rep["verdict"] != "pass")
    verdict.append(("failing_demos", float(failing), LT, 0.5))
