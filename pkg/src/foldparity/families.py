"""Two-parameter ODE families and their derivative evaluators.

A family is a pure evaluator bundle over a rectangular parameter box: the
right-hand side, optional analytic Jacobians, and optional analytic second
and third directional derivatives.  Missing derivatives fall back to central
finite differences with a step scaled by (1 + |x|).  Families are immutable
and reentrant.

The S/Z edge is configuration, not detection: the box records which of its
four edges is expected to carry the bistable branch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError, UnknownFamily

EDGES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class ParamBox:
    """Closed rectangle [lo1,hi1] x [lo2,hi2] with a designated S/Z edge."""

    lo: tuple[float, float]
    hi: tuple[float, float]
    sz_edge: str = "right"

    def __post_init__(self):
        if not (self.lo[0] < self.hi[0] and self.lo[1] < self.hi[1]):
            raise ValueError("box lower corner must be strictly below upper")
        if self.sz_edge not in EDGES:
            raise ValueError(f"sz_edge must be one of {EDGES}")

    @property
    def widths(self) -> np.ndarray:
        return np.array([self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]])

    @property
    def diagonal(self) -> float:
        return float(np.hypot(*self.widths))

    def contains(self, theta, tol: float = 1e-12) -> bool:
        t = np.asarray(theta, dtype=float)
        return bool(
            np.all(t >= np.array(self.lo) - tol)
            and np.all(t <= np.array(self.hi) + tol)
        )

    def clip(self, theta) -> np.ndarray:
        return np.clip(np.asarray(theta, dtype=float), self.lo, self.hi)

    def scale_theta(self, theta) -> np.ndarray:
        """Coordinates rescaled so each box edge has unit length."""
        return (np.asarray(theta, dtype=float) - np.array(self.lo)) / self.widths

    def edge_endpoints(self, edge: str) -> tuple[np.ndarray, np.ndarray]:
        lo1, lo2 = self.lo
        hi1, hi2 = self.hi
        pts = {
            "left": ((lo1, lo2), (lo1, hi2)),
            "right": ((hi1, lo2), (hi1, hi2)),
            "bottom": ((lo1, lo2), (hi1, lo2)),
            "top": ((lo1, hi2), (hi1, hi2)),
        }
        a, b = pts[edge]
        return np.array(a, dtype=float), np.array(b, dtype=float)

    def edge_of_point(self, theta, tol: float = 1e-7) -> Optional[str]:
        """Name of the edge a boundary point sits on (None if interior)."""
        t = np.asarray(theta, dtype=float)
        scaled_tol = tol * max(self.widths)
        if abs(t[0] - self.lo[0]) <= scaled_tol:
            return "left"
        if abs(t[0] - self.hi[0]) <= scaled_tol:
            return "right"
        if abs(t[1] - self.lo[1]) <= scaled_tol:
            return "bottom"
        if abs(t[1] - self.hi[1]) <= scaled_tol:
            return "top"
        return None


@dataclass(frozen=True)
class FamilySpec:
    """Immutable evaluator bundle for a 2-parameter ODE family.

    ``rhs(x, theta) -> (n,) array`` is mandatory; ``jac_x``, ``jac_theta``
    and the directional derivative hooks ``d2``/``d3`` are optional analytic
    accelerators.  ``kind`` is "general" or "gradient"; gradient families may
    carry their potential evaluator for slope-based tests.
    """

    dim: int
    box: ParamBox
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jac_x: Optional[Callable] = None
    jac_theta: Optional[Callable] = None
    d2: Optional[Callable] = None  # (x, theta, u, v) -> n-vector
    d3: Optional[Callable] = None  # (x, theta, u, v, w) -> n-vector
    fd_step: float = 1e-5
    kind: str = "general"
    potential: Optional[Callable] = None
    name: str = ""

    def without_analytic(self) -> "FamilySpec":
        """Finite-difference twin used to cross-check the analytic hooks."""
        return replace(self, jac_x=None, jac_theta=None, d2=None, d3=None)


def _as_state(x, dim):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (dim,):
        raise ValueError(f"state must have shape ({dim},), got {x.shape}")
    return x


def eval_rhs(family: FamilySpec, x, theta) -> np.ndarray:
    x = _as_state(x, family.dim)
    theta = np.asarray(theta, dtype=float)
    out = np.atleast_1d(np.asarray(family.rhs(x, theta), dtype=float))
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"rhs non-finite at x={x.tolist()}, theta={theta.tolist()}")
    return out


def _step(family, x):
    return family.fd_step * (1.0 + float(np.linalg.norm(x, np.inf)))


def jacobian_x(family: FamilySpec, x, theta) -> np.ndarray:
    x = _as_state(x, family.dim)
    theta = np.asarray(theta, dtype=float)
    if family.jac_x is not None:
        J = np.asarray(family.jac_x(x, theta), dtype=float).reshape(family.dim, family.dim)
        if not np.all(np.isfinite(J)):
            raise EvaluationError("analytic state Jacobian non-finite")
        return J
    return fd_jacobian_x(family, x, theta)


def fd_jacobian_x(family: FamilySpec, x, theta) -> np.ndarray:
    """Central-difference state Jacobian regardless of analytic hooks."""
    x = _as_state(x, family.dim)
    theta = np.asarray(theta, dtype=float)
    h = _step(family, x)
    J = np.empty((family.dim, family.dim))
    for j in range(family.dim):
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        J[:, j] = (eval_rhs(family, xp, theta) - eval_rhs(family, xm, theta)) / (2 * h)
    return J


def jacobian_theta(family: FamilySpec, x, theta) -> np.ndarray:
    x = _as_state(x, family.dim)
    theta = np.asarray(theta, dtype=float)
    if family.jac_theta is not None:
        Jt = np.asarray(family.jac_theta(x, theta), dtype=float).reshape(family.dim, 2)
        if not np.all(np.isfinite(Jt)):
            raise EvaluationError("analytic parameter Jacobian non-finite")
        return Jt
    h = family.fd_step * (1.0 + float(np.linalg.norm(theta, np.inf)))
    Jt = np.empty((family.dim, 2))
    for j in range(2):
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += h
        tm[j] -= h
        Jt[:, j] = (eval_rhs(family, x, tp) - eval_rhs(family, x, tm)) / (2 * h)
    return Jt


def directional_B(family: FamilySpec, x, theta, q1, q2) -> np.ndarray:
    """Second directional derivative B(q1, q2) of the field at (x, theta)."""
    if family.d2 is not None:
        return np.atleast_1d(np.asarray(family.d2(x, theta, q1, q2), dtype=float))
    x = _as_state(x, family.dim)
    q2 = np.asarray(q2, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    h = _step(family, x)
    Jp = jacobian_x(family, x + h * q2, theta)
    Jm = jacobian_x(family, x - h * q2, theta)
    return (Jp @ q1 - Jm @ q1) / (2 * h)


def directional_C(family: FamilySpec, x, theta, q1, q2, q3) -> np.ndarray:
    """Third directional derivative C(q1, q2, q3) of the field."""
    if family.d3 is not None:
        return np.atleast_1d(np.asarray(family.d3(x, theta, q1, q2, q3), dtype=float))
    x = _as_state(x, family.dim)
    q3 = np.asarray(q3, dtype=float)
    # differencing B (itself O(h^2) accurate) needs a larger step to keep
    # the amplified noise below the truncation error
    h = max(_step(family, x), 1e-4 * (1.0 + float(np.linalg.norm(x, np.inf))))
    Bp = directional_B(family, x + h * q3, theta, q1, q2)
    Bm = directional_B(family, x - h * q3, theta, q1, q2)
    return (Bp - Bm) / (2 * h)


@dataclass(frozen=True)
class DerivativeBundle:
    """State Jacobian plus bilinear/trilinear directional derivative closures."""

    J: np.ndarray
    B: Callable[[np.ndarray, np.ndarray], np.ndarray]
    C: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def derivative_bundle(family: FamilySpec, x, theta) -> DerivativeBundle:
    J = jacobian_x(family, x, theta)
    return DerivativeBundle(
        J=J,
        B=lambda u, v: directional_B(family, x, theta, u, v),
        C=lambda u, v, w: directional_C(family, x, theta, u, v, w),
    )


def gradient_family_from_potential(
    potential: Callable,
    box: ParamBox,
    grad: Optional[Callable] = None,
    dim: int = 1,
    fd_step: float = 1e-5,
    name: str = "gradient",
) -> FamilySpec:
    """Family with rhs = -grad_x f; analytic gradient used when supplied."""

    if grad is not None:
        def rhs(x, theta):
            return -np.atleast_1d(np.asarray(grad(x, theta), dtype=float))
    else:
        def rhs(x, theta):
            x = np.asarray(x, dtype=float)
            h = fd_step * (1.0 + float(np.linalg.norm(x, np.inf)))
            out = np.empty(dim)
            for j in range(dim):
                xp = x.copy()
                xm = x.copy()
                xp[j] += h
                xm[j] -= h
                out[j] = -(potential(xp, theta) - potential(xm, theta)) / (2 * h)
            return out

    return FamilySpec(
        dim=dim, box=box, rhs=rhs, fd_step=fd_step, kind="gradient",
        potential=potential, name=name,
    )


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def _cusp1() -> FamilySpec:
    box = ParamBox(lo=(-1.0, -1.0), hi=(1.0, 1.0), sz_edge="right")
    return FamilySpec(
        dim=1, box=box,
        rhs=lambda x, t: np.array([t[1] + t[0] * x[0] - x[0] ** 3]),
        jac_x=lambda x, t: np.array([[t[0] - 3.0 * x[0] ** 2]]),
        jac_theta=lambda x, t: np.array([[x[0], 1.0]]),
        d2=lambda x, t, u, v: np.array([-6.0 * x[0] * u[0] * v[0]]),
        d3=lambda x, t, u, v, w: np.array([-6.0 * u[0] * v[0] * w[0]]),
        name="cusp1",
    )


def _dualcusp1() -> FamilySpec:
    box = ParamBox(lo=(-1.0, -1.0), hi=(1.0, 1.0), sz_edge="left")
    return FamilySpec(
        dim=1, box=box,
        rhs=lambda x, t: np.array([t[1] + t[0] * x[0] + x[0] ** 3]),
        jac_x=lambda x, t: np.array([[t[0] + 3.0 * x[0] ** 2]]),
        jac_theta=lambda x, t: np.array([[x[0], 1.0]]),
        d2=lambda x, t, u, v: np.array([6.0 * x[0] * u[0] * v[0]]),
        d3=lambda x, t, u, v, w: np.array([6.0 * u[0] * v[0] * w[0]]),
        name="dualcusp1",
    )


def _quintic3() -> FamilySpec:
    box = ParamBox(lo=(-3.0, -3.0), hi=(1.0, 3.0), sz_edge="right")
    return FamilySpec(
        dim=1, box=box,
        rhs=lambda x, t: np.array(
            [t[1] + t[0] * x[0] + 2.0 * x[0] ** 3 - x[0] ** 5]
        ),
        jac_x=lambda x, t: np.array([[t[0] + 6.0 * x[0] ** 2 - 5.0 * x[0] ** 4]]),
        jac_theta=lambda x, t: np.array([[x[0], 1.0]]),
        d2=lambda x, t, u, v: np.array(
            [(12.0 * x[0] - 20.0 * x[0] ** 3) * u[0] * v[0]]
        ),
        d3=lambda x, t, u, v, w: np.array(
            [(12.0 - 60.0 * x[0] ** 2) * u[0] * v[0] * w[0]]
        ),
        name="quintic3",
    )


def _bt2() -> FamilySpec:
    box = ParamBox(lo=(-1.0, -1.0), hi=(1.0, 1.0), sz_edge="right")

    def rhs(x, t):
        return np.array([
            x[1],
            t[0] + t[1] * x[0] + x[0] ** 2 + x[0] * x[1],
        ])

    def jac(x, t):
        return np.array([
            [0.0, 1.0],
            [t[1] + 2.0 * x[0] + x[1], x[0]],
        ])

    def d2(x, t, u, v):
        return np.array([0.0, 2.0 * u[0] * v[0] + u[0] * v[1] + u[1] * v[0]])

    return FamilySpec(
        dim=2, box=box, rhs=rhs, jac_x=jac,
        jac_theta=lambda x, t: np.array([[0.0, 0.0], [1.0, x[0]]]),
        d2=d2,
        d3=lambda x, t, u, v, w: np.zeros(2),
        name="bt2",
    )


def _fh3() -> FamilySpec:
    # zero eigenvalue from the scalar fold, rotation block giving t2 +/- i
    box = ParamBox(lo=(-1.0, -1.0), hi=(1.0, 1.0), sz_edge="right")

    def rhs(x, t):
        return np.array([
            t[0] + x[0] ** 2,
            t[1] * x[1] - x[2],
            x[1] + t[1] * x[2],
        ])

    def jac(x, t):
        return np.array([
            [2.0 * x[0], 0.0, 0.0],
            [0.0, t[1], -1.0],
            [0.0, 1.0, t[1]],
        ])

    def d2(x, t, u, v):
        return np.array([2.0 * u[0] * v[0], 0.0, 0.0])

    return FamilySpec(
        dim=3, box=box, rhs=rhs, jac_x=jac,
        jac_theta=lambda x, t: np.array([[1.0, 0.0], [0.0, x[1]], [0.0, x[2]]]),
        d2=d2,
        d3=lambda x, t, u, v, w: np.zeros(3),
        name="fh3",
    )


def _dwell_grad() -> FamilySpec:
    box = ParamBox(lo=(-1.0, -1.0), hi=(1.0, 1.0), sz_edge="right")

    def potential(x, t):
        return x[0] ** 4 / 4.0 - t[0] * x[0] ** 2 / 2.0 - t[1] * x[0]

    def grad(x, t):
        return np.array([x[0] ** 3 - t[0] * x[0] - t[1]])

    fam = gradient_family_from_potential(potential, box, grad=grad, dim=1,
                                         name="dwell_grad")
    # the gradient is polynomial, so attach the exact derivative hooks too
    return replace(
        fam,
        jac_x=lambda x, t: np.array([[t[0] - 3.0 * x[0] ** 2]]),
        jac_theta=lambda x, t: np.array([[x[0], 1.0]]),
        d2=lambda x, t, u, v: np.array([-6.0 * x[0] * u[0] * v[0]]),
        d3=lambda x, t, u, v, w: np.array([-6.0 * u[0] * v[0] * w[0]]),
    )


_BUILTINS: dict[str, Callable[[], FamilySpec]] = {
    "cusp1": _cusp1,
    "dualcusp1": _dualcusp1,
    "quintic3": _quintic3,
    "bt2": _bt2,
    "fh3": _fh3,
    "dwell_grad": _dwell_grad,
}

BUILTIN_NAMES = tuple(sorted(_BUILTINS))


def builtin(name: str) -> FamilySpec:
    try:
        make = _BUILTINS[name]
    except KeyError:
        raise UnknownFamily(
            f"unknown builtin {name!r}; available: {', '.join(BUILTIN_NAMES)}"
        ) from None
    return make()
