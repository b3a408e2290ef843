import numpy as np
import pytest

from heavenlift import funcspace as fs
from heavenlift import solutions as S
from heavenlift.errors import SingularPointError


def rand_points(rng, n, box):
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return [tuple(float(x) for x in lo + (hi - lo) * rng.random(4)) for _ in range(n)]


def domain_points(rng, n, box, field, max_tries=50):
    """Random points at which ``field`` evaluates without a SingularPointError."""
    out = []
    for _ in range(max_tries * n):
        (p,) = rand_points(rng, 1, box)
        try:
            field(p, 0)
        except SingularPointError:
            continue
        out.append(p)
        if len(out) == n:
            return out
    raise RuntimeError(f"only {len(out)} of {n} points in the domain")


BF_BOX = [(0.6, 1.2), (-0.5, 0.5), (0.6, 1.4), (-0.5, 0.5)]
SMALL_BOX = [(-0.3, 0.3)] * 4


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def helmholtz_params():
    return S.HelmholtzLiftParams(((1.3 + 0.4j, 0.7 + 0.2j, 0.3 - 0.1j), (1.0, 0.5, 0.2)))


@pytest.fixture(scope="session")
def generic_r():
    return fs.RealSmoothFn((0.3, 0.2, -0.1))


@pytest.fixture(scope="session")
def generic_k():
    return fs.RealSmoothFn((0.1, 0.05))


def pushed_jets(field, points, order=4):
    """(image point, potential jet there) for a LEGENDRE_CMA or ROT_LEGENDRE field."""
    from heavenlift import legendre as L
    from heavenlift.solutions import Chart

    out = []
    for p in points:
        if field.chart is Chart.ROT_LEGENDRE:
            z = L.rot_image(field, p)
            out.append((z, L.push_forward_rot(field, z, order, seed=p)))
        else:
            J = field(p, 1)
            z = (-0.5 * J.deriv(0).value.real, 0.5 * J.deriv(1).value.real, p[2], p[3])
            out.append((z, L.invert_two_var(field, z, order, seed=p)))
    return out
