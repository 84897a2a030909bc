"""Pseudo-arclength continuation of equilibrium branches and fold curves.

Branches over a parameter path are continued in (x, s) so they pass folds of
the path coordinate without reparametrisation; fold curves are continued in
the extended unknowns (x, q, theta) of the defining system

    X(x, theta) = 0,   J(x, theta) q = 0,   <q, q> - 1 = 0,

which stays regular through cusp, BT and fold-Hopf candidates, so one smooth
curve carries all its codimension-2 points as markers.  Predictors are
secants (SVD tangent on the first step); correctors are Newton with the
pseudo-arclength constraint.  Steps adapt to corrector effort and to the
secant turn angle, which keeps stored polylines within discretisation error
of the true curve even near high curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import families as fam
from . import detect
from .errors import (
    BranchLost,
    FoldOnPath,
    FrameUnavailable,
    RefinementFailed,
    SeedDegenerate,
    StepCollapse,
)
from .linalg import (
    NullPair,
    Spectrum,
    _inverse_iterate,
    smallest_singular_vector,
    solve_linear,
    spectrum,
)
from .settings import Settings

_MAX_STEPS = 40000


# ---------------------------------------------------------------------------
# paths and basic records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Path:
    """Piecewise-linear parameter path, parametrised by arclength."""

    vertices: np.ndarray
    cum: np.ndarray

    @staticmethod
    def from_polyline(points) -> "Path":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) < 2:
            raise ValueError("path needs at least two vertices")
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        if cum[-1] == 0.0:
            raise ValueError("path has zero length")
        return Path(vertices=pts, cum=cum)

    @staticmethod
    def from_segment(a, b) -> "Path":
        return Path.from_polyline([a, b])

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    @property
    def closed(self) -> bool:
        return bool(np.linalg.norm(self.vertices[0] - self.vertices[-1])
                    <= 1e-12 * (1.0 + self.length))

    def _segment(self, s: float) -> int:
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        return min(max(i, 0), len(self.vertices) - 2)

    def theta(self, s: float) -> np.ndarray:
        """Point at arclength s; extrapolates linearly beyond the ends so
        correctors stay consistent while an end pin is being resolved."""
        s = float(s)
        i = self._segment(min(max(s, 0.0), self.length))
        seg_len = self.cum[i + 1] - self.cum[i]
        t = 0.0 if seg_len == 0 else (s - self.cum[i]) / seg_len
        return (1 - t) * self.vertices[i] + t * self.vertices[i + 1]

    def dtheta(self, s: float) -> np.ndarray:
        i = self._segment(float(min(max(s, 0.0), self.length)))
        d = self.vertices[i + 1] - self.vertices[i]
        n = np.linalg.norm(d)
        return d / n if n > 0 else d


@dataclass
class BranchPoint:
    x: np.ndarray
    theta: np.ndarray
    spectrum: Spectrum
    index: int
    stability_class: str
    path_s: float = 0.0


@dataclass
class FoldPoint:
    x: np.ndarray
    theta: np.ndarray
    nullpair: NullPair
    a_coeff: Optional[float]
    orientation: int
    codim2: Optional[detect.Codim2Point] = None
    testfns: dict = field(default_factory=dict)

    @property
    def u(self) -> np.ndarray:
        return np.concatenate([self.x, self.nullpair.q, self.theta])


@dataclass
class FoldCurveRecord:
    points: list  # of FoldPoint
    closed: bool
    endpoints: tuple  # edge names for open curves, () when closed
    arclength: float
    codim2_points: list  # of detect.Codim2Point
    curve_id: int = -1

    def theta_polyline(self) -> np.ndarray:
        return np.array([p.theta for p in self.points])

    def state_polyline(self) -> np.ndarray:
        return np.array([p.x for p in self.points])

    def cusp_markers(self) -> list:
        return [c for c in self.codim2_points
                if c.kind in ("cusp_standard", "cusp_dual")]


@dataclass
class BranchResult:
    points: list  # of BranchPoint
    fold_events: list  # of (FoldPoint, path_s)
    hopf_events: list  # of (path_s, theta)
    degenerate_events: list  # of (path_s, theta)
    status: str  # "path-end" | "boundary-exit" | "lost"


@dataclass
class LiftedCurve:
    base: np.ndarray      # (m, 2) parameter polyline
    fiber: np.ndarray     # (m, n) states
    classes: list         # stability class per sample
    simple: Optional[bool]
    max_step: float
    slope: float


# ---------------------------------------------------------------------------
# equilibrium Newton kernels
# ---------------------------------------------------------------------------

_INF = float("inf")


def newton_equilibrium(family, x0, theta, settings: Settings,
                       tol: Optional[float] = None):
    """Newton for X(., theta) = 0; returns the root or None.

    Hot path of every multi-start stage: plain float bookkeeping, scalar
    division for one-dimensional states.
    """
    tol2 = (settings.newton_tol if tol is None else tol) ** 2
    theta = np.asarray(theta, dtype=float)
    rhs = family.rhs
    jac = family.jac_x
    one_d = family.dim == 1
    x = np.array(x0, dtype=float)
    r = rhs(x, theta)
    rn2 = float(r @ r)
    if rn2 != rn2 or rn2 == _INF:
        return None
    for _ in range(settings.newton_maxit):
        if rn2 <= tol2:
            return x
        J = jac(x, theta) if jac is not None else fam.fd_jacobian_x(
            family, x, theta)
        if one_d:
            piv = float(J[0, 0]) if J.ndim == 2 else float(J)
            if piv == 0.0 or piv != piv:
                return None
            step = r * (-1.0 / piv)
        else:
            try:
                step = np.linalg.solve(J, -r)
            except np.linalg.LinAlgError:
                return None
        s2 = float(step @ step)
        if s2 != s2 or s2 == _INF:
            return None
        lam = 1.0
        for _ in range(10):
            x_try = x + lam * step
            r_try = rhs(x_try, theta)
            rt2 = float(r_try @ r_try)
            if rt2 == rt2 and rt2 != _INF and (rt2 < rn2 or rt2 <= tol2):
                break
            lam *= 0.5
        else:
            return None
        x, r, rn2 = x_try, r_try, rt2
    return x if rn2 <= tol2 else None


def _newton_deflated(family, x0, theta, roots, settings: Settings,
                     maxit: int = 20):
    """Newton on the deflated map M(x) F(x), M = prod(1/|x-r|^2 + 1).

    Rescues starts whose plain Newton fell into an already-known basin;
    bails out early on stalls since the deflated map often has no zero left.
    """
    theta = np.asarray(theta, dtype=float)
    rhs = family.rhs
    jac = family.jac_x
    tol2 = settings.newton_tol ** 2
    x = np.array(x0, dtype=float)
    n = family.dim
    one_d = n == 1
    for _ in range(maxit):
        F = rhs(x, theta)
        f2 = float(F @ F)
        if f2 != f2 or f2 == _INF:
            return None
        if f2 <= tol2:
            return x
        J = jac(x, theta) if jac is not None else fam.fd_jacobian_x(
            family, x, theta)
        M = 1.0
        grad_logM = np.zeros(n)
        for r in roots:
            d = x - r
            d2 = float(d @ d)
            if d2 < 1e-16:
                return None
            factor = 1.0 / d2 + 1.0
            M *= factor
            grad_logM += (-2.0 / d2 ** 2) * d / factor
        if one_d:
            piv = M * float(J[0, 0]) + M * float(F[0]) * float(grad_logM[0])
            if piv == 0.0 or piv != piv:
                return None
            step = F * (-M / piv)
        else:
            JG = M * J + np.outer(M * F, grad_logM)
            try:
                step = np.linalg.solve(JG, -M * F)
            except np.linalg.LinAlgError:
                return None
        s2 = float(step @ step)
        if s2 != s2 or s2 == _INF:
            return None
        if s2 > 1e6:
            step *= 1e3 / np.sqrt(s2)
        elif s2 < 1e-24 * (1.0 + float(x @ x)):
            return None
        x = x + step
    return None


def find_equilibria(family, theta, settings: Settings, rng,
                    warm_starts=()) -> list:
    """Multi-start equilibria at fixed theta with deflation against found roots.

    Deflated rescues are rationed: a wasted random start (converged into a
    known basin or diverged) spends one unit of a small budget that refills
    whenever deflation actually uncovers a new root.
    """
    theta = np.asarray(theta, dtype=float)
    cap = settings.state_cap_factor * (1.0 + family.box.diagonal)
    roots: list[np.ndarray] = []

    def accept(x):
        if x is None:
            return False
        xn2 = float(x @ x)
        if xn2 != xn2 or xn2 > cap * cap:
            return False
        for r in roots:
            d = x - r
            if float(d @ d) <= (1e-7 * (1.0 + np.linalg.norm(r))) ** 2:
                return False
        roots.append(x)
        return True

    for x0 in warm_starts:
        accept(newton_equilibrium(family, x0, theta, settings))
    deflate_budget = 2
    for _ in range(settings.restarts):
        x0 = rng.uniform(-settings.start_radius, settings.start_radius,
                         size=family.dim)
        fresh = accept(newton_equilibrium(family, x0, theta, settings))
        if not fresh and roots and deflate_budget > 0:
            deflate_budget -= 1
            if accept(_newton_deflated(family, x0, theta, roots, settings)):
                deflate_budget = 2
    order = np.lexsort(np.array(roots).T[::-1]) if roots else []
    return [roots[i] for i in order]


# ---------------------------------------------------------------------------
# fold defining system
# ---------------------------------------------------------------------------

def fold_residual(family, x, q, theta) -> np.ndarray:
    """(X, Jq, <q,q> - 1): zeros with one parameter freed are fold points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    theta = np.asarray(theta, dtype=float)
    X = fam.eval_rhs(family, x, theta)
    J = fam.jacobian_x(family, x, theta)
    return np.concatenate([X, J @ q, [float(q @ q) - 1.0]])


def _split_u(u, n):
    return u[:n], u[n:2 * n], u[2 * n:]


def _ext_residual(family, u):
    n = family.dim
    x, q, theta = _split_u(u, n)
    return fold_residual(family, x, q, theta)


def _ext_jacobian(family, u):
    """Jacobian of the extended system wrt (x, q, theta); analytic blocks
    where the family provides them, central differences for the B blocks."""
    n = family.dim
    x, q, theta = _split_u(u, n)
    J = fam.jacobian_x(family, x, theta)
    Jt = fam.jacobian_theta(family, x, theta)
    D = np.zeros((2 * n + 1, 2 * n + 2))
    D[:n, :n] = J
    D[:n, 2 * n:] = Jt
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        D[n:2 * n, k] = fam.directional_B(family, x, theta, q, e)
    D[n:2 * n, n:2 * n] = J
    ht = family.fd_step * (1.0 + float(np.linalg.norm(theta, np.inf)))
    for j in range(2):
        tp = theta.copy()
        tm = theta.copy()
        tp[j] += ht
        tm[j] -= ht
        Jp = fam.jacobian_x(family, x, tp)
        Jm = fam.jacobian_x(family, x, tm)
        D[n:2 * n, 2 * n + j] = (Jp @ q - Jm @ q) / (2 * ht)
    D[2 * n, n:2 * n] = 2.0 * q
    return D


def _corrector(family, u_pred, tangent, settings: Settings,
               maxit: Optional[int] = None):
    """Newton on the extended system with the pseudo-arclength constraint."""
    maxit = settings.corrector_maxit if maxit is None else maxit
    u = np.array(u_pred, dtype=float)
    for it in range(maxit):
        r = _ext_residual(family, u)
        rn = np.linalg.norm(r)
        con = float(tangent @ (u - u_pred))
        if rn <= settings.accept_tol and abs(con) <= settings.accept_tol * 10:
            return u, it
        D = _ext_jacobian(family, u)
        A = np.vstack([D, tangent])
        b = -np.concatenate([r, [con]])
        try:
            step = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            return None, it
        if not np.all(np.isfinite(step)):
            return None, it
        u = u + step
        if np.linalg.norm(step) > 10.0 * (1.0 + np.linalg.norm(u_pred)):
            return None, it
    r = _ext_residual(family, u)
    if np.linalg.norm(r) <= settings.accept_tol:
        return u, maxit
    return None, maxit


def _pinned_solve(family, u0, pin_index, pin_value, settings: Settings):
    """Solve the extended system with one u-component pinned (edge landing)."""
    u = np.array(u0, dtype=float)
    for _ in range(30):
        r = _ext_residual(family, u)
        con = u[pin_index] - pin_value
        if np.linalg.norm(r) <= settings.accept_tol and abs(con) <= settings.accept_tol:
            return u
        D = _ext_jacobian(family, u)
        row = np.zeros(u.size)
        row[pin_index] = 1.0
        A = np.vstack([D, row])
        b = -np.concatenate([r, [con]])
        try:
            step = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            return None
        u = u + step
        if not np.all(np.isfinite(u)):
            return None
    return None


def make_fold_point(family, u, settings: Settings,
                    p_ref=None) -> FoldPoint:
    """FoldPoint with transported left vector and all three test functions."""
    n = family.dim
    x, q, theta = _split_u(np.asarray(u, dtype=float), n)
    q = q / np.linalg.norm(q)
    J = fam.jacobian_x(family, x, theta)
    p_start = q if p_ref is None else np.asarray(p_ref, dtype=float)
    p = _inverse_iterate(J.T, p_start)
    if p_ref is not None and float(p @ p_ref) < 0:
        p = -p
    elif p_ref is None:
        from .linalg import _lex_positive

        p = _lex_positive(p)
    pq = float(p @ q)
    bt_flag = abs(pq) <= settings.bt_gate
    Bqq = fam.directional_B(family, x, theta, q, q)
    psi_cusp = float(p @ Bqq)
    if bt_flag:
        a = None
        orientation = 0
        p_norm = p.copy()
    else:
        p_norm = p / pq
        a = 0.5 * float(p_norm @ Bqq)
        orientation = 0 if a == 0 else (1 if a > 0 else -1)
    np_pair = NullPair(q=q, p=p_norm, p_unit=p, pq=pq, bt_flag=bt_flag)
    psi_fh = detect.psi_fold_hopf(J, settings.hopf_gate)
    return FoldPoint(
        x=x, theta=theta, nullpair=np_pair, a_coeff=a, orientation=orientation,
        testfns={"cusp": psi_cusp, "bt": pq, "fh": psi_fh},
    )


def refine_fold_free_param(family, x0, theta0, settings: Settings,
                           q0=None) -> Optional[np.ndarray]:
    """Newton on the square fold system with one parameter freed.

    Tries freeing theta1 then theta2; returns the extended vector u or None.
    """
    n = family.dim
    theta0 = np.asarray(theta0, dtype=float)
    J = fam.jacobian_x(family, x0, theta0)
    if q0 is None:
        q0 = _inverse_iterate(J, np.ones(n) / np.sqrt(n))
    for free in (0, 1):
        fixed = 1 - free
        u = np.concatenate([np.asarray(x0, float), q0, theta0])
        ok = True
        for _ in range(settings.newton_maxit):
            r = _ext_residual(family, u)
            if np.linalg.norm(r) <= settings.accept_tol:
                break
            D = _ext_jacobian(family, u)
            cols = [c for c in range(2 * n + 2) if c != 2 * n + fixed]
            A = D[:, cols]
            try:
                step = np.linalg.solve(A, -r)
            except np.linalg.LinAlgError:
                ok = False
                break
            if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1e3:
                ok = False
                break
            for ci, c in enumerate(cols):
                u[c] += step[ci]
        else:
            ok = False
        if ok and np.linalg.norm(_ext_residual(family, u)) <= settings.accept_tol:
            u[n:2 * n] /= np.linalg.norm(u[n:2 * n])
            return u
    return None


# ---------------------------------------------------------------------------
# fold-curve continuation
# ---------------------------------------------------------------------------

def _xt_part(u, n):
    """(x, theta) block used for geometric bookkeeping (angles, closure)."""
    return np.concatenate([u[:n], u[2 * n:]])


def _edge_crossing(box, t_in, t_out):
    """First box edge crossed by the parameter segment t_in -> t_out."""
    lo, hi = np.array(box.lo), np.array(box.hi)
    best = None
    for j in range(2):
        for val, name in ((lo[j], "left" if j == 0 else "bottom"),
                          (hi[j], "right" if j == 0 else "top")):
            d = t_out[j] - t_in[j]
            if d == 0.0:
                continue
            tau = (val - t_in[j]) / d
            if -1e-12 <= tau <= 1.0 + 1e-12:
                other = t_in[1 - j] + tau * (t_out[1 - j] - t_in[1 - j])
                if lo[1 - j] - 1e-9 <= other <= hi[1 - j] + 1e-9:
                    if best is None or tau < best[0]:
                        best = (tau, j, val, name)
    return best


def _trace_fold_direction(family, u0, t0, settings: Settings, box,
                          check_closure: bool):
    """One direction of fold-curve continuation; returns (us, exit_edge, closed)."""
    n = family.dim
    diag = box.diagonal
    h_lo = settings.h_min * diag
    h_hi = settings.h_max * diag
    us = [np.array(u0)]
    tangent = np.array(t0)
    h = 0.25 * h_hi
    exit_edge = None
    closed = False
    arclen = 0.0
    fails = 0
    xt0 = _xt_part(u0, n)
    prev_sec = None
    while len(us) < _MAX_STEPS:
        u = us[-1]
        u_pred = u + h * tangent
        u_new, iters = _corrector(family, u_pred, tangent, settings)
        reject = u_new is None
        if not reject:
            # corrector displacement must stay small against the step, else
            # the solve hopped to a different sheet of the defining system
            moved = np.linalg.norm(u_new - u_pred)
            if moved > max(0.5 * h, 1e-12):
                reject = True
        angle = 0.0
        if not reject and prev_sec is not None:
            sec = _xt_part(u_new, n) - _xt_part(u, n)
            ns = np.linalg.norm(sec)
            nprev = np.linalg.norm(prev_sec)
            if ns > 0 and nprev > 0:
                cosang = float(sec @ prev_sec) / (ns * nprev)
                angle = float(np.arccos(np.clip(cosang, -1.0, 1.0)))
                # an egregious turn is a wrong-sheet symptom; moderate turns
                # are accepted and only steer the next step size (the stored
                # polyline is re-densified at sharp turns afterwards)
                if angle > 0.35 and h > 4.0 * h_lo:
                    reject = True
        if reject:
            h *= settings.h_shrink
            fails += 1
            if h < h_lo:
                raise StepCollapse(
                    f"fold continuation step collapsed below h_min at "
                    f"theta={u[2 * n:].tolist()}"
                )
            continue
        fails = 0
        # boundary exit
        t_prev, t_new = u[2 * n:], u_new[2 * n:]
        if not box.contains(t_new, tol=1e-9 * diag):
            hit = _edge_crossing(box, t_prev, t_new)
            if hit is None:
                hit = (0.0, 0, np.clip(t_new[0], box.lo[0], box.hi[0]), "left")
            tau, j, val, name = hit
            u_guess = u + max(tau, 1e-3) * (u_new - u)
            u_edge = _pinned_solve(family, u_guess, 2 * n + j, val, settings)
            if u_edge is None:
                u_edge = _pinned_solve(family, u_new, 2 * n + j, val, settings)
            if u_edge is not None and box.contains(u_edge[2 * n:], tol=1e-6 * diag):
                us.append(u_edge)
                exit_edge = name
            else:
                exit_edge = name
            break
        sec = _xt_part(u_new, n) - _xt_part(u, n)
        arclen += float(np.linalg.norm(sec))
        us.append(u_new)
        prev_sec = sec
        # closure against the seed
        if (check_closure and len(us) > settings.min_circle_points
                and arclen > 4.0 * settings.closure_tol * diag):
            gap = np.linalg.norm(_xt_part(u_new, n) - xt0)
            if gap < max(settings.closure_tol * diag, 1.5 * h):
                heading = float((xt0 - _xt_part(u, n)) @ sec)
                if heading > 0:
                    us.append(np.array(u0))
                    closed = True
                    break
        tangent_new = u_new - u
        tangent = tangent_new / np.linalg.norm(tangent_new)
        if angle > settings.angle_max:
            h = max(h * max(0.3, settings.angle_max / angle), h_lo)
        elif iters <= 3:
            h = min(h * settings.h_grow, h_hi)
        elif iters >= settings.corrector_maxit - 1:
            h = max(h * settings.h_shrink, h_lo)
    else:
        raise StepCollapse("fold continuation exceeded the step budget")
    return us, exit_edge, closed


def _refine_polyline_turns(family, us, settings: Settings, box):
    """Bisect polyline intervals until every chord hugs the curve.

    The criterion couples the turn angle with the box-scaled chord length
    (their product bounds the chord sagitta), so flat stretches keep long
    chords while bends get subdivided.  Intervals below the length floor
    (the cusp apex, where the parameter image has unbounded curvature) are
    left to the marker densification pass.
    """
    n = family.dim
    widths = box.widths
    len_floor = 1e-5
    cap = 5e-4  # angle * scaled length; sagitta <= cap / 8
    for _ in range(12):
        th = np.array([u[2 * n:] for u in us]) / widths
        secs = np.diff(th, axis=0)
        lens = np.linalg.norm(secs, axis=1)
        bad: set[int] = set()
        for i in range(1, len(secs)):
            la, lb = lens[i - 1], lens[i]
            if la < len_floor or lb < len_floor:
                continue
            c = float(secs[i - 1] @ secs[i]) / (la * lb)
            angle = float(np.arccos(np.clip(c, -1.0, 1.0)))
            if angle * max(la, lb) > cap:
                bad.add(i - 1)
                bad.add(i)
        if not bad:
            break
        for i in sorted(bad, reverse=True):
            ua, ub = us[i], us[i + 1]
            chord = ub - ua
            cn = float(np.linalg.norm(chord))
            if cn <= 1e-12:
                continue
            t = chord / cn
            u_new, _ = _corrector(family, 0.5 * (ua + ub), t, settings,
                                  maxit=20)
            if u_new is None:
                continue
            if np.linalg.norm(u_new - 0.5 * (ua + ub)) > 0.6 * cn:
                continue
            us[i + 1:i + 1] = [u_new]
    return us


def _sign(v: float) -> int:
    return 0 if v == 0 else (1 if v > 0 else -1)


def _left_vector_bordered(J, q_ref, p_ref):
    """Left near-null vector from a fixed bordering: smooth in J, scaled so
    <p_ref, p> = 1.  Regular on fold curves and across BT points."""
    n = J.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = J.T
    M[:n, n] = q_ref
    M[n, :n] = p_ref
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    sol = np.linalg.solve(M, rhs)
    return sol[:n]


def _refine_codim2(family, fp_a: FoldPoint, fp_b: FoldPoint, kind: str,
                   settings: Settings):
    """Augmented Newton for a bracketed test-function zero on the curve.

    The left vector in the augmentation comes from a bordered solve with
    the bracket's (q, p) as fixed borders, which keeps the test function a
    smooth (finite-difference friendly) function of the unknowns even at BT
    where inverse iteration branches.
    """
    n = family.dim
    p_ref = fp_a.nullpair.p_unit
    q_ref = fp_a.nullpair.q

    def g(u):
        x, q, theta = _split_u(u, n)
        J = fam.jacobian_x(family, x, theta)
        if kind == "fh":
            val = detect.psi_fold_hopf(J, settings.hopf_gate)
            return 0.0 if val is None else val
        p = _left_vector_bordered(J, q_ref, p_ref)
        if kind == "bt":
            return float(p @ q) / np.linalg.norm(q)
        Bqq = fam.directional_B(family, x, theta, q, q)
        return float(p @ Bqq)

    def residual(u):
        return np.concatenate([_ext_residual(family, u), [g(u)]])

    ua, ub = fp_a.u, fp_b.u
    if float(ua[n:2 * n] @ ub[n:2 * n]) < 0:
        ub = ub.copy()
        ub[n:2 * n] *= -1.0
    va = fp_a.testfns[kind]
    vb = fp_b.testfns[kind]
    frac = 0.5 if va is None or vb is None or va == vb else abs(va) / (abs(va) + abs(vb))
    u = ua + frac * (ub - ua)
    u[n:2 * n] /= np.linalg.norm(u[n:2 * n])
    scale_u = 1.0 + np.linalg.norm(u)
    for _ in range(40):
        r = residual(u)
        if np.linalg.norm(r) <= max(settings.accept_tol, 1e-12 * scale_u):
            break
        Jr = np.empty((r.size, u.size))
        for j in range(u.size):
            hj = 1e-7 * (1.0 + abs(u[j]))
            up = u.copy()
            um = u.copy()
            up[j] += hj
            um[j] -= hj
            Jr[:, j] = (residual(up) - residual(um)) / (2 * hj)
        try:
            step = np.linalg.solve(Jr, -r)
        except np.linalg.LinAlgError:
            raise RefinementFailed(
                f"singular augmented system refining {kind}",
                bracket=(fp_a.theta.tolist(), fp_b.theta.tolist()),
            )
        if not np.all(np.isfinite(step)):
            raise RefinementFailed(
                f"non-finite update refining {kind}",
                bracket=(fp_a.theta.tolist(), fp_b.theta.tolist()),
            )
        sn = np.linalg.norm(step)
        if sn > np.linalg.norm(ub - ua) * 4.0 + 1.0:
            step *= (np.linalg.norm(ub - ua) * 4.0 + 1.0) / sn
        u = u + step
    else:
        raise RefinementFailed(
            f"augmented Newton for {kind} did not converge",
            bracket=(fp_a.theta.tolist(), fp_b.theta.tolist()),
        )
    u[n:2 * n] /= np.linalg.norm(u[n:2 * n])
    return u


def _tangent_at(family, u):
    return smallest_singular_vector(_ext_jacobian(family, u))


def _densify_near(family, u_star, u_a, u_b, settings: Settings):
    """Pinned sub-steps on both sides of a refined marker point.

    The parameter image of a fold curve turns sharply at a cusp; a handful of
    geometrically spaced points on each side keeps the stored polyline within
    discretisation tolerance there.
    """
    t_star = _tangent_at(family, u_star)
    out_a, out_b = [], []
    dir_b = u_b - u_star
    if float(t_star @ dir_b) < 0:
        t_star = -t_star
    for side, u_ref, bucket in ((-1.0, u_a, out_a), (1.0, u_b, out_b)):
        gap = np.linalg.norm(u_ref - u_star)
        if gap == 0:
            continue
        for frac in (0.5, 0.25, 0.125, 0.0625, 0.03125):
            u_pred = u_star + side * frac * gap * t_star
            u_new, _ = _corrector(family, u_pred, t_star, settings, maxit=20)
            if u_new is None:
                continue
            if np.linalg.norm(u_new - u_star) > 1.5 * gap:
                continue
            bucket.append((frac, u_new))
    left = [u for frac, u in sorted(out_a, key=lambda fu: -fu[0])]
    right = [u for frac, u in sorted(out_b, key=lambda fu: fu[0])]
    return left, right


def continue_fold_curve(family, seed, settings: Settings) -> FoldCurveRecord:
    """Trace the fold curve through a seed fold point across the box.

    The seed may be a FoldPoint or an extended vector (x, q, theta).  Both
    directions are traced and merged for open curves; closed curves are
    detected against the seed and returned with the closure point appended.
    Codimension-2 markers come from sign changes of the three test functions
    between accepted points, each refined by a dedicated augmented solve.
    """
    n = family.dim
    box = family.box
    u0 = seed.u if isinstance(seed, FoldPoint) else np.asarray(seed, dtype=float)
    if u0.size != 2 * n + 2:
        raise SeedDegenerate(f"seed has size {u0.size}, expected {2 * n + 2}")
    res0 = np.linalg.norm(_ext_residual(family, u0))
    if res0 > 1e-8 * (1.0 + np.linalg.norm(u0)):
        raise SeedDegenerate(f"seed residual {res0:.2e} above 1e-8")
    J0 = fam.jacobian_x(family, u0[:n], u0[2 * n:])
    mods = np.sort(np.abs(np.asarray(spectrum(J0).eigenvalues)))
    if n > 1 and mods[1] <= settings.null_gate * max(np.linalg.norm(J0, np.inf), 1.0):
        raise SeedDegenerate("seed kernel is ambiguous (double eigenvalue)")

    t0 = _tangent_at(family, u0)
    on_edge = box.edge_of_point(u0[2 * n:], tol=1e-7)
    seed_edge = None
    if on_edge is not None:
        # head inward: pick the tangent sign pointing into the box
        inward = {"left": np.array([1.0, 0.0]), "right": np.array([-1.0, 0.0]),
                  "bottom": np.array([0.0, 1.0]), "top": np.array([0.0, -1.0])}
        if float(t0[2 * n:] @ inward[on_edge]) < 0:
            t0 = -t0
        seed_edge = on_edge
        us_fwd, exit_fwd, closed = _trace_fold_direction(
            family, u0, t0, settings, box, check_closure=False)
        us = us_fwd
        endpoints = (seed_edge, exit_fwd) if exit_fwd else (seed_edge, seed_edge)
    else:
        us_fwd, exit_fwd, closed = _trace_fold_direction(
            family, u0, t0, settings, box, check_closure=True)
        if closed:
            us = us_fwd
            endpoints = ()
        else:
            us_bwd, exit_bwd, _ = _trace_fold_direction(
                family, u0, -t0, settings, box, check_closure=False)
            us = list(reversed(us_bwd[1:])) + us_fwd
            endpoints = (exit_bwd, exit_fwd)
    us = _refine_polyline_turns(family, us, settings, box)

    # attach fold data with transported left vectors
    fps: list[FoldPoint] = []
    p_ref = None
    for u in us:
        fp = make_fold_point(family, u, settings, p_ref=p_ref)
        p_ref = fp.nullpair.p_unit
        fps.append(fp)

    # codim-2 markers from test-function sign changes
    events = []
    for i in range(len(fps) - 1):
        for kind in ("cusp", "bt", "fh"):
            va = fps[i].testfns.get(kind)
            vb = fps[i + 1].testfns.get(kind)
            if va is None or vb is None:
                continue
            scale = max(abs(va), abs(vb))
            if scale == 0.0:
                continue
            if _sign(va) * _sign(vb) < 0:
                events.append((i, kind))
    markers: list[detect.Codim2Point] = []
    for i, kind in sorted(events, key=lambda e: -e[0]):
        fp_a, fp_b = fps[i], fps[i + 1]
        u_star = _refine_codim2(family, fp_a, fp_b, kind, settings)
        fp_star = make_fold_point(family, u_star, settings,
                                  p_ref=fp_a.nullpair.p_unit)
        c2 = _classify_marker(family, fp_star, kind, settings)
        fp_star.codim2 = c2
        markers.append(c2)
        left, right = _densify_near(family, u_star, fp_a.u, fp_b.u, settings)
        p_ref_local = fp_a.nullpair.p_unit
        insert = []
        for u in left + [u_star] + right:
            fpi = (fp_star if u is u_star
                   else make_fold_point(family, u, settings, p_ref=p_ref_local))
            p_ref_local = fpi.nullpair.p_unit
            insert.append(fpi)
        fps[i + 1:i + 1] = insert

    xt = np.array([np.concatenate([fp.x, fp.theta]) for fp in fps])
    arclength = float(np.sum(np.linalg.norm(np.diff(xt, axis=0), axis=1)))
    markers.sort(key=lambda c2: tuple(c2.theta))
    return FoldCurveRecord(
        points=fps, closed=closed, endpoints=endpoints,
        arclength=arclength, codim2_points=markers,
    )


def _classify_marker(family, fp: FoldPoint, kind: str,
                     settings: Settings) -> detect.Codim2Point:
    J = fam.jacobian_x(family, fp.x, fp.theta)
    spec = spectrum(J)
    if kind == "cusp":
        kind_name, c, frame = detect.classify_cusp(
            family, fp.x, fp.theta, fp.nullpair, settings, newton_equilibrium)
        a_res = (abs(fp.a_coeff) if fp.a_coeff is not None
                 else abs(fp.testfns["cusp"]))
        return detect.Codim2Point(
            kind=kind_name, x=fp.x, theta=fp.theta,
            residuals={"a_coeff": a_res, "c_coeff": c,
                       "pq": fp.nullpair.pq},
            frame=frame,
        )
    if kind == "bt":
        mods = np.sort(np.abs(np.asarray(spec.eigenvalues)))
        return detect.Codim2Point(
            kind="bogdanov_takens", x=fp.x, theta=fp.theta,
            residuals={"pq": fp.nullpair.pq,
                       "second_eigenvalue": float(mods[1]) if len(mods) > 1 else 0.0},
        )
    evs = np.asarray(spec.eigenvalues)
    pairs = evs[np.abs(evs.imag) > settings.hopf_gate]
    re_pair = float(np.min(np.abs(pairs.real))) if pairs.size else 0.0
    im_pair = float(np.max(np.abs(pairs.imag))) if pairs.size else 0.0
    return detect.Codim2Point(
        kind="fold_hopf", x=fp.x, theta=fp.theta,
        residuals={"pair_real_part": re_pair, "pair_imag_part": im_pair,
                   "pq": fp.nullpair.pq},
    )


def enumerate_fold_curves(family, settings: Settings,
                          rng=None) -> list[FoldCurveRecord]:
    """Multi-start discovery of all fold curves at the grid resolution.

    Every near-singular equilibrium on a G x G parameter grid spawns a fold
    refinement; refined folds seed curve continuation unless they already lie
    on a traced curve.  Curves are finally deduplicated by mutual Hausdorff
    distance.  Fold circles smaller than the grid resolution can be missed;
    the grid is part of the returned evidence upstream.
    """
    if rng is None:
        rng = np.random.default_rng(settings.seed)
    box = family.box
    diag = box.diagonal
    G = settings.grid_g
    t1s = np.linspace(box.lo[0], box.hi[0], G)
    t2s = np.linspace(box.lo[1], box.hi[1], G)
    curves: list[FoldCurveRecord] = []
    polylines: list[np.ndarray] = []  # (x, theta) stacked, for on-curve gate

    def on_existing(xt_point):
        gate = settings.on_curve_tol * diag * 10.0
        for poly in polylines:
            d = _point_polyline_distance(xt_point, poly)
            if d < max(gate, 1e-6):
                return True
        return False

    one_d = family.dim == 1
    for t1 in t1s:
        warm: list[np.ndarray] = []
        for t2 in t2s:
            theta = np.array([t1, t2])
            roots = find_equilibria(family, theta, settings, rng,
                                    warm_starts=warm)
            warm = roots
            for x in roots:
                J = fam.jacobian_x(family, x, theta)
                min_mod = (abs(float(J[0, 0])) if one_d
                           else float(np.min(np.abs(np.linalg.eigvals(J)))))
                if min_mod >= settings.seed_gate:
                    continue
                u = refine_fold_free_param(family, x, theta, settings)
                if u is None:
                    continue
                if not box.contains(u[2 * family.dim:], tol=1e-9 * diag):
                    continue
                xt = np.concatenate([u[:family.dim], u[2 * family.dim:]])
                if on_existing(xt):
                    continue
                try:
                    rec = continue_fold_curve(family, u, settings)
                except (SeedDegenerate, StepCollapse, RefinementFailed):
                    continue
                curves.append(rec)
                polylines.append(np.array(
                    [np.concatenate([fp.x, fp.theta]) for fp in rec.points]))

    curves = _dedup_curves(curves, family, settings)
    for i, rec in enumerate(curves):
        rec.curve_id = i
    return curves


def _point_polyline_distance(pt, poly) -> float:
    pt = np.asarray(pt, dtype=float)
    if len(poly) == 1:
        return float(np.linalg.norm(pt - poly[0]))
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", pt - a, ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(pt - proj, axis=1)))


def points_to_polyline_distances(points, poly) -> np.ndarray:
    """Distance from each point to a polyline, vectorised over points."""
    pts = np.asarray(points, dtype=float)
    poly = np.asarray(poly, dtype=float)
    if len(poly) == 1:
        return np.linalg.norm(pts - poly[0], axis=1)
    best = np.full(len(pts), np.inf)
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denoms = np.einsum("ij,ij->i", ab, ab)
    for i in range(len(a)):
        if denoms[i] == 0.0:
            d = np.linalg.norm(pts - a[i], axis=1)
        else:
            t = np.clip((pts - a[i]) @ ab[i] / denoms[i], 0.0, 1.0)
            proj = a[i] + t[:, None] * ab[i]
            d = np.linalg.norm(pts - proj, axis=1)
        np.minimum(best, d, out=best)
    return best


def polyline_hausdorff(poly_a, poly_b) -> float:
    """Symmetric Hausdorff distance between two polylines."""
    da = float(np.max(points_to_polyline_distances(poly_a, poly_b)))
    db = float(np.max(points_to_polyline_distances(poly_b, poly_a)))
    return max(da, db)


def _dedup_curves(curves, family, settings: Settings):
    box = family.box
    scale = np.concatenate([np.full(family.dim, 1.0 + box.diagonal),
                            box.widths])
    kept: list[FoldCurveRecord] = []
    for rec in curves:
        poly = np.array([np.concatenate([fp.x, fp.theta]) for fp in rec.points])
        poly_s = poly / scale
        dup = False
        for other in kept:
            opoly = np.array(
                [np.concatenate([fp.x, fp.theta]) for fp in other.points]) / scale
            if polyline_hausdorff(poly_s, opoly) < settings.dedup_tol:
                dup = True
                break
        if not dup:
            kept.append(rec)
    return kept


# ---------------------------------------------------------------------------
# equilibrium branches over parameter paths
# ---------------------------------------------------------------------------

def _branch_residual(family, path, u):
    n = family.dim
    return fam.eval_rhs(family, u[:n], path.theta(u[n]))


def _branch_jacobian(family, path, u):
    n = family.dim
    x, s = u[:n], u[n]
    theta = path.theta(s)
    J = fam.jacobian_x(family, x, theta)
    Jt = fam.jacobian_theta(family, x, theta)
    col = Jt @ path.dtheta(s)
    return np.column_stack([J, col])


def _branch_corrector(family, path, u_pred, tangent, settings: Settings):
    u = np.array(u_pred, dtype=float)
    for it in range(settings.corrector_maxit):
        r = _branch_residual(family, path, u)
        con = float(tangent @ (u - u_pred))
        if np.linalg.norm(r) <= settings.accept_tol and abs(con) <= 1e-9:
            return u, it
        A = np.vstack([_branch_jacobian(family, path, u), tangent])
        b = -np.concatenate([r, [con]])
        try:
            step = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            return None, it
        if not np.all(np.isfinite(step)):
            return None, it
        u = u + step
    r = _branch_residual(family, path, u)
    return (u, settings.corrector_maxit) if np.linalg.norm(r) <= settings.accept_tol else (None, settings.corrector_maxit)


def _branch_pinned(family, path, u0, s_value, settings: Settings):
    n = family.dim
    x = newton_equilibrium(family, u0[:n], path.theta(s_value), settings,
                           tol=settings.accept_tol)
    if x is None:
        return None
    return np.concatenate([x, [s_value]])


def _make_branch_point(family, path, u, settings: Settings) -> BranchPoint:
    n = family.dim
    x, s = u[:n], float(u[n])
    theta = path.theta(s)
    spec = spectrum(fam.jacobian_x(family, x, theta))
    cls = detect.classify_equilibrium(spec, settings.hyp_gate)
    idx = spec.count_positive(settings.hyp_gate)
    return BranchPoint(x=np.array(x), theta=theta, spectrum=spec,
                       index=idx, stability_class=cls, path_s=s)


def refine_fold_on_path(family, path, u_guess, settings: Settings,
                        q0=None) -> Optional[tuple[np.ndarray, FoldPoint]]:
    """Square extended fold system along a path: unknowns (x, q, s)."""
    n = family.dim
    x0, s0 = u_guess[:n], float(u_guess[n])
    theta0 = path.theta(s0)
    J = fam.jacobian_x(family, x0, theta0)
    q = _inverse_iterate(J, np.ones(n) / np.sqrt(n) if q0 is None else q0)
    v = np.concatenate([x0, q, [s0]])

    def residual(v):
        x, q, s = v[:n], v[n:2 * n], v[2 * n]
        return fold_residual(family, x, q, path.theta(s))

    for _ in range(settings.newton_maxit):
        r = residual(v)
        if np.linalg.norm(r) <= settings.accept_tol:
            break
        Jr = np.empty((2 * n + 1, 2 * n + 1))
        for j in range(2 * n + 1):
            hj = 1e-7 * (1.0 + abs(v[j]))
            vp = v.copy()
            vm = v.copy()
            vp[j] += hj
            vm[j] -= hj
            Jr[:, j] = (residual(vp) - residual(vm)) / (2 * hj)
        try:
            step = np.linalg.solve(Jr, -r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        v = v + step
    else:
        return None
    if not (-1e-9 <= v[2 * n] <= path.length + 1e-9):
        return None
    x, q, s = v[:n], v[n:2 * n], float(v[2 * n])
    q = q / np.linalg.norm(q)
    u_ext = np.concatenate([x, q, path.theta(s)])
    fp = make_fold_point(family, u_ext, settings)
    return np.concatenate([x, [s]]), fp


def continue_equilibria_along_path(family, path, seed_state,
                                   settings: Settings,
                                   s_start: float = 0.0,
                                   direction: int = +1) -> BranchResult:
    """Pseudo-arclength branch continuation in (x, s) along a parameter path.

    Fold events are flagged where the branch turns in the path coordinate
    with a near-zero eigenvalue and refined on the extended system; Hopf and
    other eigenvalue-axis crossings are recorded as events for the boundary
    hypothesis check.
    """
    if isinstance(path, np.ndarray) or isinstance(path, (list, tuple)):
        path = Path.from_polyline(path)
    n = family.dim
    diag = family.box.diagonal
    x0 = newton_equilibrium(family, np.asarray(seed_state, float),
                            path.theta(s_start), settings,
                            tol=settings.accept_tol)
    if x0 is None:
        raise BranchLost("seed failed to converge to an equilibrium")
    u = np.concatenate([x0, [s_start]])
    state_cap = settings.state_cap_factor * (1.0 + diag) + np.linalg.norm(x0)

    h_lo = settings.h_min * diag
    h_hi = settings.h_max * diag
    tangent = smallest_singular_vector(_branch_jacobian(family, path, u))
    if tangent[n] * direction < 0:
        tangent = -tangent
    if tangent[n] == 0 and direction < 0:
        tangent = -tangent
    # nothing to traverse when heading out of the path domain at an endpoint
    eps_s = 1e-12 * (1.0 + path.length)
    if ((s_start <= eps_s and tangent[n] < 0)
            or (s_start >= path.length - eps_s and tangent[n] > 0)):
        bp0 = _make_branch_point(family, path, u, settings)
        return BranchResult(points=[bp0], fold_events=[], hopf_events=[],
                            degenerate_events=[], status="path-end")

    pts = [_make_branch_point(family, path, u, settings)]
    us = [u]
    fold_hits: list[tuple[FoldPoint, float, int]] = []  # (fp, s*, interval)
    hopf_events: list[tuple[float, np.ndarray]] = []
    det_crossings: list[int] = []  # interval indices with det sign change
    turn_failures: list[int] = []
    status = "path-end"
    h = 0.25 * h_hi
    halvings_left = 4

    def det_of(bp):
        return float(np.prod(np.asarray(bp.spectrum.eigenvalues)).real)

    def hopf_fn(spec):
        pairs = [ev for ev in spec.eigenvalues
                 if ev.imag > settings.hopf_gate]
        if not pairs:
            return None
        return min(pairs, key=lambda ev: abs(ev.real)).real

    prev_det = det_of(pts[0])
    prev_hopf = hopf_fn(pts[0].spectrum)
    prev_ts = tangent[n]

    def try_refine(interval: int):
        guess = 0.5 * (us[interval] + us[interval + 1])
        ref = refine_fold_on_path(family, path, guess, settings)
        if ref is None:
            return False
        fold_hits.append((ref[1], float(ref[0][n]), interval))
        return True

    while len(us) < _MAX_STEPS:
        u = us[-1]
        u_pred = u + h * tangent
        u_new, iters = _branch_corrector(family, path, u_pred, tangent, settings)
        if u_new is not None and np.linalg.norm(u_new - u_pred) > max(0.5 * h, 1e-12):
            u_new = None  # corrector slid onto a different sheet
        if u_new is None:
            h *= settings.h_shrink
            halvings_left -= 1
            if h < h_lo or halvings_left < 0:
                status = "lost"
                if len(us) < 3:
                    raise BranchLost("branch lost near the seed")
                break
            continue
        halvings_left = 4
        if np.linalg.norm(u_new[:n]) > state_cap:
            status = "boundary-exit"
            break
        ended = False
        if u_new[n] > path.length or u_new[n] < 0.0:
            s_end = path.length if u_new[n] > path.length else 0.0
            u_end = _branch_pinned(family, path, u_new, s_end, settings)
            if u_end is None:
                status = "path-end"
                break
            u_new = u_end
            ended = True
        bp = _make_branch_point(family, path, u_new, settings)
        us.append(u_new)
        pts.append(bp)
        interval = len(us) - 2

        t_new = u_new - u
        tn = np.linalg.norm(t_new)
        if tn == 0.0:
            status = "path-end"
            break
        t_new = t_new / tn
        # events in the last interval: a fold shows up as a turn in the path
        # coordinate and (equivalently) a determinant sign change; the two
        # detectors can land one interval apart, so crossings are reconciled
        # against refined folds after the trace
        cur_det = det_of(bp)
        cur_hopf = hopf_fn(bp.spectrum)
        if prev_ts * t_new[n] < 0:
            if not try_refine(interval):
                turn_failures.append(interval)
        if _sign(prev_det) * _sign(cur_det) < 0:
            det_crossings.append(interval)
        if (prev_hopf is not None and cur_hopf is not None
                and _sign(prev_hopf) * _sign(cur_hopf) < 0):
            hopf_events.append((float(bp.path_s), bp.theta))
        prev_det, prev_hopf, prev_ts = cur_det, cur_hopf, t_new[n]
        tangent = t_new
        if ended:
            status = "path-end"
            break
        if iters <= 3:
            h = min(h * settings.h_grow, h_hi)
        elif iters >= settings.corrector_maxit - 1:
            h = max(h * settings.h_shrink, h_lo)
    else:
        raise BranchLost("branch continuation exceeded the step budget")

    degen_events: list[tuple[float, np.ndarray]] = []
    fold_intervals = {hit[2] for hit in fold_hits}
    for i in det_crossings:
        if any(abs(i - j) <= 2 for j in fold_intervals):
            continue
        if try_refine(i):
            fold_intervals.add(i)
            continue
        degen_events.append((float(pts[min(i + 1, len(pts) - 1)].path_s),
                             pts[min(i + 1, len(pts) - 1)].theta))
    for i in turn_failures:
        if not any(abs(i - j) <= 2 for j in fold_intervals):
            degen_events.append((float(pts[min(i + 1, len(pts) - 1)].path_s),
                                 pts[min(i + 1, len(pts) - 1)].theta))

    # one event per fold: collapse refinements that landed on the same point
    fold_events: list[tuple[FoldPoint, float]] = []
    for fp, s_star, _ in sorted(fold_hits, key=lambda fs: fs[1]):
        if any(abs(s_star - s_prev) < 1e-8 * (1.0 + path.length)
               and np.linalg.norm(fp.x - fp_prev.x) < 1e-6
               for fp_prev, s_prev in fold_events):
            continue
        fold_events.append((fp, s_star))
    return BranchResult(points=pts, fold_events=fold_events,
                        hopf_events=hopf_events,
                        degenerate_events=degen_events, status=status)


# ---------------------------------------------------------------------------
# lifts and approximating curves
# ---------------------------------------------------------------------------

def lift_curve(family, base, seed_state, settings: Settings) -> LiftedCurve:
    """Track the equilibrium sheet over a base polyline (regular lift).

    Raises FoldOnPath when the tracked sheet reaches a fold (the lift stops
    being a regular curve there) and BranchLost when Newton cannot follow the
    sheet even after local bisection of the base step.  Sheet hops are
    rejected by gating each state move against the running median of the
    accepted moves, which tolerates steep sheets while catching jumps to a
    different sheet an O(1) distance away.
    """
    base = np.asarray(base, dtype=float).reshape(-1, 2)
    diag = family.box.diagonal
    step_cap = settings.lift_step * diag
    # subdivide segments to the step cap
    pts = [base[0]]
    for a, b in zip(base[:-1], base[1:]):
        seg = np.linalg.norm(b - a)
        pieces = max(1, int(np.ceil(seg / step_cap)))
        for k in range(1, pieces + 1):
            pts.append(a + (b - a) * (k / pieces))
    targets = np.array(pts)

    x = newton_equilibrium(family, np.asarray(seed_state, float), targets[0],
                           settings, tol=settings.accept_tol)
    if x is None:
        raise BranchLost("lift seed is not an equilibrium over the base start")
    fiber = [x]
    classes = []
    max_step = 0.0
    moves: list[float] = []

    def classify(x, theta):
        spec = spectrum(fam.jacobian_x(family, x, theta))
        if spec.min_abs() < settings.fold_gate:
            raise FoldOnPath(
                f"lift reached a fold near theta={np.asarray(theta).tolist()}"
            )
        return detect.classify_equilibrium(spec, settings.hyp_gate)

    classes.append(classify(x, targets[0]))

    def move_gate(x_from):
        floor = 5e-2 * (1.0 + float(np.linalg.norm(x_from)))
        if not moves:
            return floor
        med = float(np.median(moves[-20:]))
        return max(8.0 * med, 1e-3 * (1.0 + float(np.linalg.norm(x_from))))

    def advance(x_from, t_from, t_to, depth=0):
        x_next = newton_equilibrium(family, x_from, t_to, settings,
                                    tol=settings.accept_tol)
        if x_next is not None:
            move = float(np.linalg.norm(x_next - x_from))
            if move <= move_gate(x_from):
                moves.append(move)
                return x_next
        if depth >= 10:
            raise BranchLost("lift lost the sheet despite bisection")
        t_mid = 0.5 * (t_from + t_to)
        x_mid = advance(x_from, t_from, t_mid, depth + 1)
        classify(x_mid, t_mid)
        return advance(x_mid, t_mid, t_to, depth + 1)

    for i in range(1, len(targets)):
        x_new = advance(fiber[-1], targets[i - 1], targets[i])
        classes.append(classify(x_new, targets[i]))
        max_step = max(max_step, float(np.linalg.norm(x_new - fiber[-1])))
        fiber.append(x_new)

    fiber = np.array(fiber)
    dx = np.linalg.norm(np.diff(fiber, axis=0), axis=1)
    dth = np.linalg.norm(np.diff(targets, axis=0), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.where(dth > 0, dx / np.where(dth > 0, dth, 1.0), 0.0)
    slope = float(np.median(slopes)) if len(slopes) else 0.0

    base_closed = bool(np.linalg.norm(targets[0] - targets[-1])
                       <= 1e-9 * (1.0 + diag))
    simple = None
    if base_closed:
        jump_gate = 10.0 * max(max_step, 1e-12) * max(slope, 1.0)
        gap = float(np.linalg.norm(fiber[0] - fiber[-1]))
        simple = gap < jump_gate
    return LiftedCurve(base=targets, fiber=fiber, classes=classes,
                       simple=simple, max_step=max_step, slope=slope)


def cusp_state_seed(family, cusp: detect.Codim2Point, u: float) -> np.ndarray:
    """State seed for the sheet over the approximating-curve sweep point u.

    The middle (u = x) sheet sits at x_c + (u / l) q with l = sqrt|c| and q
    the sign-canonicalised null direction; l comes from the stored cubic
    coefficient.
    """
    from .linalg import null_pair

    J = fam.jacobian_x(family, cusp.x, cusp.theta)
    np_pair = detect.canonical_null_signs(null_pair(J, allow_double=True))
    c = cusp.residuals.get("c_coeff")
    if c is None or c == 0.0:
        raise FrameUnavailable("cusp has no stored cubic coefficient")
    lam = np.sqrt(abs(c))
    return np.asarray(cusp.x, dtype=float) + (u / lam) * np_pair.q


def approximating_curve(cusp: detect.Codim2Point, phi_amplitude: float,
                        span: float, n_points: int = 401) -> np.ndarray:
    """Parameter-space approximating curve of a cusp through its local frame.

    Positive amplitude produces the looping curve (encircles the cusp point;
    its lift rides an attractor sheet at a standard cusp), negative the
    nudging curve (stays inside the three-sheet wedge; saddle lift).  The
    normal-form image is (3u^2 + f, -2u^3 - u f); the wedge-interior sign of
    f corresponds to negative amplitude, so the amplitude is negated before
    substitution.
    """
    if cusp.frame is None:
        raise FrameUnavailable("cusp has no local frame")
    if phi_amplitude == 0.0:
        phi = 0.0
    else:
        phi = -float(phi_amplitude)
    u = np.linspace(-span, span, n_points)
    nu = np.column_stack([3.0 * u ** 2 + phi, -2.0 * u ** 3 - u * phi])
    return np.asarray(cusp.theta) + nu @ np.asarray(cusp.frame).T


def closed_nudging_base(cusp: detect.Codim2Point, phi_amplitude: float,
                        span: float, n_points: int = 301) -> np.ndarray:
    """Closed base around a cusp: nudging arc plus an in-wedge closing chord.

    Requires a negative amplitude (nudging): the arc stays inside the wedge
    and the straight chord between its endpoints does too, so both the
    middle-sheet (saddle) and outer-sheet lifts close up over this base.
    """
    if phi_amplitude >= 0.0:
        raise ValueError("closed nudging base needs a negative amplitude")
    if cusp.frame is None:
        raise FrameUnavailable("cusp has no local frame")
    phi = -float(phi_amplitude)  # positive in normal-form coordinates
    arc_u = np.linspace(-span, span, n_points)
    nu_arc = np.column_stack([3.0 * arc_u ** 2 + phi,
                              -2.0 * arc_u ** 3 - arc_u * phi])
    b = 2.0 * span ** 3 + span * phi
    chord_t2 = np.linspace(-b, b, max(n_points // 3, 8))[1:]
    nu_chord = np.column_stack([np.full(chord_t2.size, 3.0 * span ** 2 + phi),
                                chord_t2])
    nu = np.vstack([nu_arc, nu_chord])
    pts = np.asarray(cusp.theta) + nu @ np.asarray(cusp.frame).T
    return np.vstack([pts, pts[0]])
