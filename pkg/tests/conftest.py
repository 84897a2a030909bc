import numpy as np
import pytest

from foldparity.families import FamilySpec, ParamBox, builtin
from foldparity.settings import Settings
from foldparity.szparity import theorem_verdict

DEFAULT = Settings()


@pytest.fixture(scope="session")
def settings():
    return DEFAULT


@pytest.fixture(scope="session")
def cusp1():
    return builtin("cusp1")


@pytest.fixture(scope="session")
def quintic3():
    return builtin("quintic3")


@pytest.fixture(scope="session")
def bt2():
    return builtin("bt2")


@pytest.fixture(scope="session")
def fh3():
    return builtin("fh3")


@pytest.fixture(scope="session")
def dualcusp1():
    return builtin("dualcusp1")


@pytest.fixture(scope="session")
def dwell_grad():
    return builtin("dwell_grad")


# full pipeline runs are expensive; share them across the suite
@pytest.fixture(scope="session")
def cusp1_verdict(cusp1):
    import time

    t0 = time.perf_counter()
    verdict = theorem_verdict(cusp1, DEFAULT)
    verdict.resolution["wall_s"] = time.perf_counter() - t0
    return verdict


@pytest.fixture(scope="session")
def quintic3_verdict(quintic3):
    import time

    t0 = time.perf_counter()
    verdict = theorem_verdict(quintic3, DEFAULT)
    verdict.resolution["wall_s"] = time.perf_counter() - t0
    return verdict


@pytest.fixture(scope="session")
def dwell_verdict(dwell_grad):
    return theorem_verdict(dwell_grad, DEFAULT)


@pytest.fixture(scope="session")
def fh3_verdict(fh3):
    return theorem_verdict(fh3, DEFAULT)


@pytest.fixture(scope="session")
def bt2_curves(bt2):
    from foldparity.continuation import enumerate_fold_curves

    return enumerate_fold_curves(bt2, DEFAULT)


def make_isola2():
    """Cusp in x plus a y-subsystem carrying an isolated fold circle.

    The circle sits over the disk |theta - c| < rho with c = (-0.5, 0.5),
    rho = 0.35, disjoint from the cusp wedge; its saddle side is an island,
    so the curve is a non-member while the main cusp curve is a member.
    """
    C1, C2, RHO = -0.5, 0.5, 0.35

    def r_of(t):
        return RHO ** 2 - (t[0] - C1) ** 2 - (t[1] - C2) ** 2

    def rhs(x, t):
        return np.array([
            t[1] + t[0] * x[0] - x[0] ** 3,
            -(x[1] - 2.0) * (x[1] ** 2 - r_of(t)),
        ])

    def jac(x, t):
        return np.array([
            [t[0] - 3 * x[0] ** 2, 0.0],
            [0.0, -(x[1] ** 2 - r_of(t)) - (x[1] - 2.0) * 2 * x[1]],
        ])

    def jac_t(x, t):
        return np.array([
            [x[0], 1.0],
            [(x[1] - 2.0) * (-2 * (t[0] - C1)),
             (x[1] - 2.0) * (-2 * (t[1] - C2))],
        ])

    def d2(x, t, u, v):
        return np.array([
            -6 * x[0] * u[0] * v[0],
            (4.0 - 6.0 * x[1]) * u[1] * v[1],
        ])

    def d3(x, t, u, v, w):
        return np.array([
            -6.0 * u[0] * v[0] * w[0],
            -6.0 * u[1] * v[1] * w[1],
        ])

    return FamilySpec(dim=2, box=ParamBox((-1.0, -1.0), (1.0, 1.0), "right"),
                      rhs=rhs, jac_x=jac, jac_theta=jac_t, d2=d2, d3=d3,
                      name="isola2")


@pytest.fixture(scope="session")
def isola2():
    return make_isola2()


@pytest.fixture(scope="session")
def isola2_verdict(isola2):
    return theorem_verdict(isola2, DEFAULT)
