import numpy as np
import pytest

from foldparity.errors import EvaluationError, UnknownFamily
from foldparity.families import (
    BUILTIN_NAMES,
    FamilySpec,
    ParamBox,
    builtin,
    derivative_bundle,
    directional_B,
    directional_C,
    eval_rhs,
    fd_jacobian_x,
    gradient_family_from_potential,
    jacobian_theta,
    jacobian_x,
)


class TestParamBox:
    def test_invariants(self):
        with pytest.raises(ValueError):
            ParamBox((1.0, 0.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            ParamBox((0.0, 0.0), (1.0, 1.0), sz_edge="diagonal")

    def test_contains_and_edges(self):
        box = ParamBox((-1.0, -1.0), (1.0, 1.0), "right")
        assert box.contains((0.5, -0.5))
        assert not box.contains((1.5, 0.0))
        assert box.contains((1.0 + 1e-13, 0.0))  # refinement tolerance
        a, b = box.edge_endpoints("right")
        assert np.allclose(a, [1.0, -1.0]) and np.allclose(b, [1.0, 1.0])
        assert box.edge_of_point((1.0, 0.3)) == "right"
        assert box.edge_of_point((0.0, 0.0)) is None


class TestEvalRhs:
    def test_cusp_normal_form_origin(self, cusp1):
        assert eval_rhs(cusp1, [0.0], (0.0, 0.0))[0] == 0.0

    def test_cusp_equilibrium_on_fold_set(self, cusp1):
        # t2 = x^3 - t1 x at x = 1, t1 = 1
        assert eval_rhs(cusp1, [1.0], (1.0, 0.0))[0] == pytest.approx(0.0, abs=1e-14)

    def test_quintic_equilibrium(self, quintic3):
        # t2 = x^5 - 2x^3 - t1 x at x = 1, t1 = -1 gives t2 = 0
        assert eval_rhs(quintic3, [1.0], (-1.0, 0.0))[0] == pytest.approx(0.0, abs=1e-14)

    def test_deterministic(self, cusp1):
        a = eval_rhs(cusp1, [0.37], (0.21, -0.4))
        b = eval_rhs(cusp1, [0.37], (0.21, -0.4))
        assert a[0] == b[0]

    def test_nonfinite_raises(self):
        box = ParamBox((-1.0, -1.0), (1.0, 1.0))
        fam = FamilySpec(dim=1, box=box,
                         rhs=lambda x, t: np.array([1.0 / x[0]]))
        with pytest.raises(EvaluationError):
            eval_rhs(fam, [0.0], (0.0, 0.0))


class TestJacobians:
    def test_cusp_origin(self, cusp1):
        assert jacobian_x(cusp1, [0.0], (0.0, 0.0))[0, 0] == 0.0

    def test_cusp_at_one(self, cusp1):
        assert jacobian_x(cusp1, [1.0], (1.0, 0.3))[0, 0] == pytest.approx(-2.0)

    def test_bt_linear_part(self, bt2):
        J = jacobian_x(bt2, [0.0, 0.0], (0.0, 0.0))
        assert np.allclose(J, [[0.0, 1.0], [0.0, 0.0]])

    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_fd_matches_analytic_everywhere(self, name):
        fam = builtin(name)
        rng = np.random.default_rng(11)
        for _ in range(100):
            x = rng.uniform(-1.2, 1.2, size=fam.dim)
            theta = rng.uniform(fam.box.lo, fam.box.hi)
            Ja = jacobian_x(fam, x, theta)
            Jf = fd_jacobian_x(fam, x, theta)
            denom = max(np.linalg.norm(Ja), 1.0)
            assert np.linalg.norm(Ja - Jf) / denom < 1e-6

    def test_jacobian_theta_fd_path(self, cusp1):
        fd_twin = cusp1.without_analytic()
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.uniform(-1, 1, size=1)
            th = rng.uniform(-1, 1, size=2)
            assert np.allclose(jacobian_theta(cusp1, x, th),
                               jacobian_theta(fd_twin, x, th), atol=1e-6)


class TestDirectionalDerivatives:
    def test_cusp_B_at_origin(self, cusp1):
        q = np.array([1.0])
        assert directional_B(cusp1, [0.0], (0.0, 0.0), q, q)[0] == 0.0

    def test_cusp_B_at_one(self, cusp1):
        q = np.array([1.0])
        assert directional_B(cusp1, [1.0], (0.5, 0.0), q, q)[0] == pytest.approx(-6.0)

    def test_cusp_C_everywhere(self, cusp1):
        q = np.array([1.0])
        for x in (-0.7, 0.0, 1.3):
            got = directional_C(cusp1, [x], (0.2, 0.1), q, q, q)[0]
            assert got == pytest.approx(-6.0)

    def test_fd_path_symmetry(self, bt2):
        fd_twin = bt2.without_analytic()
        rng = np.random.default_rng(5)
        for _ in range(10):
            x = rng.uniform(-1, 1, size=2)
            th = rng.uniform(-1, 1, size=2)
            u = rng.standard_normal(2)
            v = rng.standard_normal(2)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            Buv = directional_B(fd_twin, x, th, u, v)
            Bvu = directional_B(fd_twin, x, th, v, u)
            assert np.linalg.norm(Buv - Bvu) < 1e-5
            w = rng.standard_normal(2)
            w /= np.linalg.norm(w)
            Cuvw = directional_C(fd_twin, x, th, u, v, w)
            Cwvu = directional_C(fd_twin, x, th, w, v, u)
            assert np.linalg.norm(Cuvw - Cwvu) < 1e-5

    def test_fd_matches_analytic_B(self, quintic3):
        fd_twin = quintic3.without_analytic()
        q = np.array([1.0])
        for x in (-0.9, 0.3, 0.8):
            a = directional_B(quintic3, [x], (0.0, 0.0), q, q)[0]
            b = directional_B(fd_twin, [x], (0.0, 0.0), q, q)[0]
            assert abs(a - b) < 1e-6 * (1 + abs(a))

    def test_bundle(self, cusp1):
        bundle = derivative_bundle(cusp1, [1.0], (1.0, 0.0))
        assert bundle.J[0, 0] == pytest.approx(-2.0)
        q = np.array([1.0])
        assert bundle.B(q, q)[0] == pytest.approx(-6.0)
        assert bundle.C(q, q, q)[0] == pytest.approx(-6.0)


class TestGradientFamilies:
    def test_quartic_potential_matches_cusp(self, cusp1, dwell_grad):
        rng = np.random.default_rng(6)
        for _ in range(25):
            x = rng.uniform(-1.4, 1.4, size=1)
            th = rng.uniform(-1, 1, size=2)
            assert eval_rhs(dwell_grad, x, th)[0] == pytest.approx(
                eval_rhs(cusp1, x, th)[0], abs=1e-12)
        assert dwell_grad.kind == "gradient"

    def test_fd_gradient_matches_analytic(self):
        box = ParamBox((-1.0, -1.0), (1.0, 1.0))

        def pot(x, t):
            return x[0] ** 4 / 4 - t[0] * x[0] ** 2 / 2 - t[1] * x[0]

        fam = gradient_family_from_potential(pot, box)
        rng = np.random.default_rng(7)
        for _ in range(20):
            x = rng.uniform(-1, 1, size=1)
            th = rng.uniform(-1, 1, size=2)
            expected = th[1] + th[0] * x[0] - x[0] ** 3
            assert eval_rhs(fam, x, th)[0] == pytest.approx(expected, abs=1e-7)

    def test_single_attractor(self):
        box = ParamBox((-1.0, -1.0), (1.0, 1.0))
        fam = gradient_family_from_potential(lambda x, t: x[0] ** 2 / 2, box)
        assert eval_rhs(fam, [0.5], (0.0, 0.0))[0] == pytest.approx(-0.5, abs=1e-8)

    def test_single_repeller(self):
        box = ParamBox((-1.0, -1.0), (1.0, 1.0))
        fam = gradient_family_from_potential(lambda x, t: -x[0] ** 2 / 2, box)
        assert eval_rhs(fam, [0.5], (0.0, 0.0))[0] == pytest.approx(0.5, abs=1e-8)

    def test_hessian_symmetry_2d(self):
        box = ParamBox((-1.0, -1.0), (1.0, 1.0))

        def pot(x, t):
            return (x[0] ** 4 / 4 + x[1] ** 4 / 4 + t[0] * x[0] * x[1]
                    - t[1] * x[0] + 0.3 * x[0] ** 2 * x[1])

        fam = gradient_family_from_potential(pot, box, dim=2)
        rng = np.random.default_rng(8)
        for _ in range(15):
            x = rng.uniform(-1, 1, size=2)
            th = rng.uniform(-1, 1, size=2)
            J = jacobian_x(fam, x, th)
            assert np.linalg.norm(J - J.T) < 1e-6 * (1 + np.linalg.norm(J))


class TestBuiltins:
    def test_names(self):
        assert set(BUILTIN_NAMES) == {
            "cusp1", "quintic3", "bt2", "fh3", "dualcusp1", "dwell_grad"}

    def test_unknown(self):
        with pytest.raises(UnknownFamily):
            builtin("does-not-exist")

    def test_cusp1_config(self, cusp1):
        assert cusp1.box.sz_edge == "right"
        assert cusp1.box.lo == (-1.0, -1.0) and cusp1.box.hi == (1.0, 1.0)

    def test_quintic3_config(self, quintic3):
        assert quintic3.box.lo == (-3.0, -3.0) and quintic3.box.hi == (1.0, 3.0)
        assert quintic3.box.sz_edge == "right"

    def test_bt2_field(self, bt2):
        out = eval_rhs(bt2, [0.5, 0.2], (0.1, -0.3))
        assert out[0] == pytest.approx(0.2)
        assert out[1] == pytest.approx(0.1 - 0.15 + 0.25 + 0.1)

    def test_fh3_eigenstructure(self, fh3):
        # on the fold curve x=0, t1=0 the spectrum is {2x, t2 +- i}
        J = jacobian_x(fh3, [0.0, 0.0, 0.0], (0.0, 0.4))
        evs = sorted(np.linalg.eigvals(J), key=lambda z: (z.real, z.imag))
        assert np.allclose(evs, [0.0, 0.4 - 1j, 0.4 + 1j])
