import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavenlift import jets
from heavenlift.errors import SingularPointError
from heavenlift.jets import Jet

mpmath.mp.dps = 60
FD_STEP = mpmath.mpf("1e-10")


def fd_partial(f, x, m):
    """Cascaded central differences of an mpmath function at high precision."""
    m = list(m)
    for i, k in enumerate(m):
        if k:
            m[i] -= 1

            def g(y, i=i, m=tuple(m)):
                return fd_partial(f, y, m)

            def shifted(s, i=i):
                y = list(x)
                y[i] += s
                return y

            return (g(shifted(FD_STEP)) - g(shifted(-FD_STEP))) / (2 * FD_STEP)
    return f(x)


def _jet_and_mp(name):
    """Test functions as (jet expression, mpmath expression) pairs in four variables."""
    table = {
        "exp": (lambda X: jets.exp(X[0] * X[1] + 0.5 * X[2] - X[3]),
                lambda x: mpmath.exp(x[0] * x[1] + x[2] / 2 - x[3])),
        "ln": (lambda X: jets.log(1.5 + X[0] ** 2 + X[1] * X[2] + 0.3 * X[3]),
               lambda x: mpmath.log(mpmath.mpf("1.5") + x[0] ** 2 + x[1] * x[2] + mpmath.mpf("0.3") * x[3])),
        "sqrt": (lambda X: jets.sqrt(2.0 + X[0] + X[1] * X[3] - 0.4 * X[2] ** 2),
                 lambda x: mpmath.sqrt(2 + x[0] + x[1] * x[3] - mpmath.mpf("0.4") * x[2] ** 2)),
        "composite": (
            lambda X: jets.exp(jets.sqrt(1.2 + X[0] ** 2 + X[1] ** 2)) * jets.log(2.0 + X[2] - X[3] * X[0]) / (1.5 + X[1]),
            lambda x: mpmath.exp(mpmath.sqrt(mpmath.mpf("1.2") + x[0] ** 2 + x[1] ** 2))
            * mpmath.log(2 + x[2] - x[3] * x[0]) / (mpmath.mpf("1.5") + x[1]),
        ),
    }  # fmt: skip
    return table[name]


FD_INDICES = [m for m in jets.multi_indices(4, 3) if sum(m) >= 1]


@pytest.mark.parametrize("name", ["exp", "ln", "sqrt", "composite"])
def test_partials_match_finite_differences(name):
    jf, mf = _jet_and_mp(name)
    rng = np.random.default_rng(7)
    for x in rng.uniform(-0.4, 0.4, size=(8, 4)):
        J = jf(jets.variables(tuple(x), 3))
        xm = [mpmath.mpf(float(v)) for v in x]
        for m in FD_INDICES:
            ref = complex(fd_partial(mf, xm, m))
            got = jets.extract(J, m)
            assert abs(got - ref) <= 1e-6 * max(1.0, abs(ref)), (name, m, got, ref)


def test_fourth_order_partial_matches_finite_differences():
    jf, mf = _jet_and_mp("composite")
    x = (0.1, -0.2, 0.15, 0.05)
    J = jf(jets.variables(x, 4))
    xm = [mpmath.mpf(v) for v in x]
    for m in [(4, 0, 0, 0), (1, 1, 1, 1), (2, 0, 2, 0), (0, 3, 0, 1)]:
        ref = complex(fd_partial(mf, xm, m))
        assert abs(jets.extract(J, m) - ref) <= 1e-6 * max(1.0, abs(ref))


def test_jet_variable_examples():
    j = jets.jet_variable(0, 2.0, 2, 2)
    assert j.coeff((0, 0)) == 2 and j.coeff((1, 0)) == 1
    assert all(j.coeff(m) == 0 for m in j.basis.indices if sum(m) == 2) and j.coeff((0, 1)) == 0
    k = jets.jet_variable(1, 0.0, 1, 2)
    assert k.coeff((0, 0)) == 0 and k.coeff((0, 1)) == 1 and k.coeff((1, 0)) == 0
    w = jets.jet_variable(3, 1j, 4, 4)
    assert w.value == 1j and w.coeff((0, 0, 0, 1)) == 1


@pytest.mark.parametrize("args", [(2, 0.0, 1, 2), (0, 0.0, 5, 1), (0, 0.0, 1, 5)])
def test_jet_variable_rejects_bad_shapes(args):
    with pytest.raises(ValueError):
        jets.jet_variable(*args)


def test_multi_indices_are_graded_and_complete():
    idx = jets.multi_indices(3, 4)
    assert len(idx) == math.comb(3 + 4, 4)
    assert [sum(m) for m in idx] == sorted(sum(m) for m in idx)
    assert set(idx) == {m for m in itertools.product(range(5), repeat=3) if sum(m) <= 4}


def _brute_product(a: Jet, b: Jet) -> np.ndarray:
    out = dict.fromkeys(a.basis.indices, 0j)
    for ma in a.basis.indices:
        for mb in b.basis.indices:
            m = tuple(x + y for x, y in zip(ma, mb))
            if sum(m) <= a.order:
                out[m] += a.coeff(ma) * b.coeff(mb)
    return np.array([out[m] for m in a.basis.indices])


def _jets(nvars, order):
    size = len(jets.multi_indices(nvars, order))
    parts = st.floats(-2, 2, allow_nan=False)
    return st.lists(st.tuples(parts, parts), min_size=size, max_size=size).map(
        lambda cs: Jet([complex(*c) for c in cs], nvars, order)
    )


def _unit_jets(nvars, order):
    """Jets whose constant term stays well away from zero."""
    return _jets(nvars, order).map(lambda j: j + (3.0 - j.value.real))


shapes = st.sampled_from([(1, 4), (2, 3), (3, 2), (4, 4), (4, 1)])


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_ring_axioms(data):
    nv, k = data.draw(shapes)
    a, b, c = (data.draw(_jets(nv, k)) for _ in range(3))
    close = lambda x, y: np.max(np.abs(x.coeffs - y.coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(y.coeffs)))
    assert close(a + b, b + a)
    assert close((a + b) + c, a + (b + c))
    assert close(a * b, b * a)
    assert close((a * b) * c, a * (b * c))
    assert close(a * (b + c), a * b + a * c)
    assert close(a - a, jets.constant(0, nv, k))
    assert close(a * 1.0, a)
    assert np.allclose((a * b).coeffs, _brute_product(a, b), rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_inverse_identities(data):
    nv, k = data.draw(shapes)
    a = data.draw(_unit_jets(nv, k))
    b = data.draw(_unit_jets(nv, k))
    close = lambda x, y: np.max(np.abs(x.coeffs - y.coeffs)) <= 1e-12 * max(1.0, np.max(np.abs(y.coeffs)))
    assert close((a * b) / b, a)
    assert close(jets.log(jets.exp(a - a.value)), a - a.value)
    assert close(jets.exp(jets.log(a)), a)
    assert close(jets.sqrt(a) * jets.sqrt(a), a)
    assert close(jets.power(a, 3), a * a * a)
    assert close(jets.power(a, -2) * a * a, jets.constant(1.0, nv, k))
    assert close(jets.sin(a) ** 2 + jets.cos(a) ** 2, jets.constant(1.0, nv, k))


def test_mixed_order_truncates_and_nvars_mismatch_raises():
    a = jets.jet_variable(0, 1.0, 4, 2)
    b = jets.jet_variable(1, 1.0, 2, 2)
    assert (a * b).order == 2
    with pytest.raises(ValueError):
        a + jets.jet_variable(0, 1.0, 2, 3)


@pytest.mark.parametrize("fn, arg", [("ln", 0.0), ("ln", -1.0), ("sqrt", -2.0), ("sqrt", 0.0)])
def test_branch_cut_and_zero_raise(fn, arg):
    a = jets.jet_variable(0, arg, 2, 1)
    with pytest.raises(SingularPointError) as err:
        jets.analytic(fn, a)
    assert err.value.value == arg


def test_integer_power_of_zero_is_allowed():
    a = jets.jet_variable(0, 0.0, 3, 1)
    assert jets.power(a, 2).coeff((2,)) == 1
    with pytest.raises(SingularPointError):
        jets.power(a, -1)


def test_extract_applies_factorials():
    X = jets.variables((0.0, 0.0), 4)
    f = X[0] ** 3 * X[1]
    assert jets.extract(f, (3, 1)) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        jets.extract(f.truncate(3), (3, 1))


def test_wirtinger_of_zzbar():
    X = jets.variables((0.3, -0.2), 2)
    z, zb = X[0] + 1j * X[1], X[0] - 1j * X[1]
    f = z * z * zb
    assert jets.wirtinger(f, [(0, 1)], (1, 0)) == pytest.approx(2 * (0.3 - 0.2j) * (0.3 + 0.2j))
    assert jets.wirtinger(f, [(0, 1)], (1, 1)) == pytest.approx(2 * (0.3 - 0.2j))
    assert jets.wirtinger(f, [(0, 1)], (0, 2)) == pytest.approx(0)


def test_wirtinger_deriv_commutes_with_partial():
    X = jets.variables((0.1, 0.2, -0.3, 0.4), 4)
    f = jets.exp((X[0] + 1j * X[1]) * (X[2] - 1j * X[3])) + X[0] ** 2 * X[3]
    dz = jets.wirtinger_deriv(f, (0, 1))
    direct = jets.wirtinger(f, [(0, 1), (2, 3)], (1, 0, 0, 1))
    assert jets.wirtinger(dz, [(0, 1), (2, 3)], (0, 0, 0, 1)) == pytest.approx(direct, abs=1e-13)


def test_compose_matches_direct_evaluation():
    Y = jets.variables((0.2, -0.1), 4)
    inner = [jets.sin(Y[0]) + 0.5, Y[0] * Y[1] + 1.0]
    X = jets.variables((inner[0].value, inner[1].value), 4)
    outer = jets.exp(X[0]) * jets.log(X[1] + 1)
    direct = jets.exp(inner[0]) * jets.log(inner[1] + 1)
    assert np.allclose(jets.compose(outer, inner).coeffs, direct.coeffs, atol=1e-13)


def test_integrate_gradient_recovers_function():
    X = jets.variables((0.2, 0.4, -0.1), 3)
    f = jets.exp(X[0] * X[1]) + X[2] ** 3 * X[0]
    rebuilt = jets.integrate_gradient([f.deriv(i) for i in range(3)], f.value)
    assert np.allclose(rebuilt.coeffs, f.coeffs, atol=1e-14)


def test_prefix_property():
    X4 = jets.variables((0.1, 0.2), 4)
    X2 = jets.variables((0.1, 0.2), 2)
    f4 = jets.log(2 + X4[0] * X4[1])
    f2 = jets.log(2 + X2[0] * X2[1])
    assert np.allclose(f4.coeffs[: f2.coeffs.size], f2.coeffs)


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
def test_arith_matches_operators(op):
    a = jets.variables((1.0, 2.0), 3)
    x, y = a[0] + 2, a[1] * a[0] + 1
    expect = {"add": x + y, "sub": x - y, "mul": x * y, "div": x / y}[op]
    assert np.allclose(jets.arith(op, x, y).coeffs, expect.coeffs)


def test_numpy_scalar_times_jet_is_jet():
    x = jets.jet_variable(0, 1.0, 2, 1)
    assert isinstance(np.float64(2.0) * x, Jet)
    assert isinstance(np.complex128(1j) * x, Jet)
