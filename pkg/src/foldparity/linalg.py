"""Dense linear-algebra and root-finding kernels.

Everything here is desk scale (n <= 50): LU with partial pivoting behind
:func:`solve_linear`, LAPACK eigenvalues behind :func:`spectrum` with a
deterministic ordering, inverse iteration with a fixed near-zero shift for
null directions, and a damped Newton.  Kernels encountered on fold curves are
near one-dimensional by construction, so three inverse-iteration sweeps (or
an early residual exit) are enough.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AmbiguousKernel, MaxIter, NoConvergence, SingularMatrix

_PIVOT_GATE = 1e-14


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted ascending by real part, ties by imaginary part.

    ``gap_ratio`` is |Re lambda_next| / |Re lambda_min| with the eigenvalues
    ranked by |Re|; it measures the pseudo-hyperbolic separation between the
    slowest direction and the rest (inf when the slowest is exactly critical
    or the matrix is 1x1).
    """

    eigenvalues: tuple[complex, ...]
    gap_ratio: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def min_abs(self) -> float:
        return min(abs(ev) for ev in self.eigenvalues)

    def count_positive(self, gate: float) -> int:
        return sum(1 for ev in self.eigenvalues if ev.real > gate)

    def count_within(self, gate: float) -> int:
        return sum(1 for ev in self.eigenvalues if abs(ev.real) <= gate)


@dataclass(frozen=True)
class NullPair:
    """Right/left null directions of a near-singular matrix.

    ``q`` is unit.  When |<p_unit, q>| clears the BT gate, ``p`` is rescaled
    so <p, q> = 1; otherwise ``p`` stays unit and ``bt_flag`` is set (the
    rescaling would divide by a near-zero).  ``p_unit`` and the raw inner
    product ``pq`` are kept for transport-based bookkeeping.
    """

    q: np.ndarray
    p: np.ndarray
    p_unit: np.ndarray
    pq: float
    bt_flag: bool


def solve_linear(A, b):
    """Solve Ax = b by LU with row pivoting; SingularMatrix on tiny pivots."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in linear system")
    if A.shape == (1, 1):
        piv = abs(A[0, 0])
        if piv <= _PIVOT_GATE * max(piv, 1e-300) or piv == 0.0:
            raise SingularMatrix("1x1 pivot is zero")
        return b / A[0, 0]
    norm = np.linalg.norm(A, np.inf)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - exact zeros
        raise SingularMatrix(str(exc)) from exc
    pivots = np.abs(np.diag(lu))
    if pivots.min() < _PIVOT_GATE * max(norm, 1e-300):
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below gate for |A|={norm:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def spectrum(A) -> Spectrum:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        evs = np.array([complex(A[0, 0])])
    else:
        try:
            evs = np.linalg.eigvals(A)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(str(exc)) from exc
    order = np.lexsort((evs.imag, evs.real))
    evs = evs[order]
    re = np.sort(np.abs(evs.real))
    if n == 1 or re[0] == 0.0:
        gap = np.inf
    else:
        gap = float(re[1] / re[0])
    return Spectrum(tuple(complex(ev) for ev in evs), gap)


def _lex_positive(v: np.ndarray) -> np.ndarray:
    """Fix the sign so the first component of visible size is positive."""
    for comp in v:
        if abs(comp) > 1e-12:
            return -v if comp < 0 else v
    return v


def _inverse_iterate(A, v0, sweeps=3, tol=1e-13):
    """Inverse iteration with fixed shift ~0 toward the smallest eigenvalue.

    When the factorization dies of genuine singularity the shift climbs a
    geometric ladder; if no usable shift exists (Jordan-type kernels pin the
    pivot to the shift scale) the smallest right singular vector is taken
    directly, sign-aligned with the start vector.
    """
    n = A.shape[0]
    norm = max(np.linalg.norm(A, np.inf), 1.0)
    v = np.asarray(v0, dtype=float)
    v = v / np.linalg.norm(v)
    for _ in range(sweeps):
        w = None
        shift = 0.0
        for _ in range(6):
            try:
                w = solve_linear(A - shift * np.eye(n), v)
                break
            except SingularMatrix:
                shift = 1e-13 * norm if shift == 0.0 else shift * 316.0
        if w is None:
            w = np.linalg.svd(A)[2][-1]
            if float(w @ v) < 0:
                w = -w
            return w
        wn = np.linalg.norm(w)
        if wn == 0.0:
            break
        v = w / wn
        if np.linalg.norm(A @ v) <= tol * norm:
            break
    return v


def null_pair(
    A,
    null_gate: float = 1e-6,
    bt_gate: float = 1e-4,
    allow_double: bool = False,
    q0=None,
    p0=None,
) -> NullPair:
    """Right/left null directions of the smallest-modulus eigenvalue.

    Raises AmbiguousKernel when a second eigenvalue passes the gate unless
    the caller opts in with ``allow_double`` (curve continuation must sail
    through BT/fH candidates).  ``q0``/``p0`` give starting vectors and the
    sign reference for transport continuity; without them signs are fixed
    lexicographically.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    norm = max(np.linalg.norm(A, np.inf), 1e-300)
    mods = np.sort(np.abs(np.asarray(spectrum(A).eigenvalues)))
    passing = int(np.sum(mods <= null_gate * max(norm, 1.0)))
    if passing >= 2 and not allow_double:
        raise AmbiguousKernel(
            f"{passing} eigenvalues below gate {null_gate:.1e}*|A|"
        )

    rng_free = np.ones(n) / np.sqrt(n)
    q_start = rng_free if q0 is None else np.asarray(q0, dtype=float)
    p_start = rng_free if p0 is None else np.asarray(p0, dtype=float)
    q = _inverse_iterate(A, q_start)
    p = _inverse_iterate(A.T, p_start)

    q = _lex_positive(q) if q0 is None else (q if q @ np.asarray(q0) >= 0 else -q)
    p = _lex_positive(p) if p0 is None else (p if p @ np.asarray(p0) >= 0 else -p)

    pq = float(p @ q)
    if abs(pq) > bt_gate:
        return NullPair(q=q, p=p / pq, p_unit=p, pq=pq, bt_flag=False)
    return NullPair(q=q, p=p.copy(), p_unit=p, pq=pq, bt_flag=True)


def newton_solve(
    residual,
    jacobian,
    x0,
    tol: float = 1e-10,
    maxit: int = 50,
    max_halvings: int = 20,
):
    """Damped Newton: full step, halved up to ``max_halvings`` times whenever
    it fails to reduce the residual norm.  Returns the root; raises MaxIter.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(residual(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise MaxIter("non-finite residual at start")
    rn = np.linalg.norm(r)
    for _ in range(maxit):
        if rn <= tol:
            return x
        J = np.asarray(jacobian(x), dtype=float)
        step = solve_linear(J, -r)
        lam = 1.0
        for _ in range(max_halvings + 1):
            x_try = x + lam * step
            r_try = np.asarray(residual(x_try), dtype=float)
            if np.all(np.isfinite(r_try)):
                rn_try = np.linalg.norm(r_try)
                if rn_try < rn or rn_try <= tol:
                    break
            lam *= 0.5
        else:
            raise MaxIter(f"damping failed at |r|={rn:.3e}")
        x, r, rn = x_try, r_try, rn_try
    if rn <= tol:
        return x
    raise MaxIter(f"no convergence after {maxit} iterations, |r|={rn:.3e}")


def fd_jacobian(func, x, step: float = 1e-6):
    """Central finite-difference Jacobian of a vector map."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(func(x), dtype=float)
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        h = step * (1.0 + abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (np.asarray(func(xp)) - np.asarray(func(xm))) / (2.0 * h)
    return J


def smallest_singular_vector(M):
    """Right null vector of a (m x m+1) matrix via SVD: the curve tangent."""
    _, _, vt = np.linalg.svd(np.asarray(M, dtype=float))
    return vt[-1]
