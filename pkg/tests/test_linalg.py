import numpy as np
import pytest

from foldparity.errors import AmbiguousKernel, MaxIter, SingularMatrix
from foldparity.linalg import (
    NullPair,
    newton_solve,
    null_pair,
    smallest_singular_vector,
    solve_linear,
    spectrum,
)


class TestSolveLinear:
    def test_identity(self):
        x = solve_linear(np.eye(2), [1.0, 2.0])
        assert np.allclose(x, [1.0, 2.0])

    def test_diagonal(self):
        x = solve_linear([[2.0, 0.0], [0.0, 4.0]], [2.0, 4.0])
        assert np.allclose(x, [1.0, 1.0])

    def test_permutation(self):
        # row pivoting handles the zero diagonal
        x = solve_linear([[0.0, 1.0], [1.0, 0.0]], [3.0, 5.0])
        assert np.allclose(x, [5.0, 3.0])

    def test_singular_raises(self):
        with pytest.raises(SingularMatrix):
            solve_linear([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])

    def test_residual_bound_bulk(self):
        # 1000 random well-conditioned systems
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            A = rng.standard_normal((n, n)) + n * np.eye(n)
            b = rng.standard_normal(n)
            x = solve_linear(A, b)
            lhs = np.linalg.norm(A @ x - b)
            bound = 1e-10 * (np.linalg.norm(A) * np.linalg.norm(x)
                             + np.linalg.norm(b))
            assert lhs <= max(bound, 1e-14)


class TestSpectrum:
    def test_diagonal(self):
        spec = spectrum(np.diag([-2.0, -1.0]))
        assert spec.eigenvalues == (-2.0 + 0j, -1.0 + 0j)

    def test_double_zero_jordan(self):
        spec = spectrum([[0.0, 1.0], [0.0, 0.0]])
        assert spec.eigenvalues == (0j, 0j)

    def test_rotation_generator(self):
        spec = spectrum([[0.0, -1.0], [1.0, 0.0]])
        assert np.allclose(spec.eigenvalues, (-1j, 1j))

    def test_ordering_deterministic(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((6, 6))
        a = spectrum(A).eigenvalues
        b = spectrum(A.copy()).eigenvalues
        assert a == b
        reals = [ev.real for ev in a]
        assert reals == sorted(reals)

    def test_length_matches_dimension(self):
        for n in (1, 2, 5):
            assert spectrum(np.eye(n)).dim == n

    def test_gap_ratio(self):
        spec = spectrum(np.diag([-0.1, -2.0]))
        assert spec.gap_ratio == pytest.approx(20.0)
        assert spectrum(np.diag([0.0, -1.0])).gap_ratio == np.inf


class TestNullPair:
    def test_simple_kernel(self):
        np_pair = null_pair(np.diag([0.0, -1.0]))
        assert np.allclose(np_pair.q, [1.0, 0.0])
        assert np.allclose(np_pair.p, [1.0, 0.0])
        assert not np_pair.bt_flag

    def test_jordan_block_ambiguous(self):
        with pytest.raises(AmbiguousKernel):
            null_pair([[0.0, 1.0], [0.0, 0.0]])

    def test_jordan_block_override(self):
        np_pair = null_pair([[0.0, 1.0], [0.0, 0.0]], allow_double=True)
        assert np_pair.bt_flag
        assert np.allclose(np.abs(np_pair.q), [1.0, 0.0], atol=1e-8)
        assert np.allclose(np.abs(np_pair.p_unit), [0.0, 1.0], atol=1e-8)
        assert abs(np_pair.pq) < 1e-8

    def test_one_dimensional_fold(self):
        np_pair = null_pair(np.array([[0.0]]))
        assert np.allclose(np_pair.q, [1.0])
        assert np.allclose(np_pair.p, [1.0])

    def test_residual_bound(self):
        A = np.array([[1e-11, 0.3], [0.0, -2.0]])
        np_pair = null_pair(A)
        assert np.linalg.norm(A @ np_pair.q) <= 1e-8 * np.linalg.norm(A, np.inf)

    def test_sign_reference(self):
        A = np.diag([1e-12, -1.0])
        a = null_pair(A, q0=np.array([-1.0, 0.0]))
        assert a.q[0] < 0


class TestNewton:
    def test_square_root(self):
        root = newton_solve(lambda x: np.array([x[0] ** 2 - 1.0]),
                            lambda x: np.array([[2.0 * x[0]]]),
                            np.array([2.0]))
        assert abs(root[0] - 1.0) <= 1e-10

    def test_cubic_matches_bisection_oracle(self):
        # largest real root of x^3 - x - 0.3, oracle = bisection
        def f(x):
            return x ** 3 - x - 0.3

        lo, hi = 1.0, 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(lo) * f(mid) <= 0:
                hi = mid
            else:
                lo = mid
        oracle = 0.5 * (lo + hi)
        assert oracle == pytest.approx(1.1254187827, abs=1e-9)

        root = newton_solve(lambda x: np.array([f(x[0])]),
                            lambda x: np.array([[3.0 * x[0] ** 2 - 1.0]]),
                            np.array([1.0]))
        assert abs(root[0] - oracle) <= 1e-10

    def test_maxiter(self):
        with pytest.raises(MaxIter):
            newton_solve(lambda x: np.array([x[0] ** 2 + 1.0]),
                         lambda x: np.array([[2.0 * x[0]]]),
                         np.array([1.0]), maxit=30)

    def test_fold_system_on_cusp_manifold(self, cusp1, settings):
        # seed near (x, t1, t2) = (1, 3, -2); the exact fold is t1 = 3x^2,
        # t2 = -2x^3 at x = 1 (outside the box, raw solve only)
        from foldparity.continuation import refine_fold_free_param

        u = refine_fold_free_param(cusp1, np.array([1.05]),
                                   np.array([2.8, -2.0]), settings)
        assert u is not None
        x, t1, t2 = u[0], u[2], u[3]
        assert abs(x - 1.0) < 1e-8
        assert abs(t1 - 3.0) < 1e-8
        assert abs(t2 + 2.0) < 1e-8


def test_smallest_singular_vector_is_tangent():
    M = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    v = smallest_singular_vector(M)
    assert np.allclose(np.abs(v), [0.0, 0.0, 1.0], atol=1e-12)
