"""Closed-form fold-set oracle for parameter-linear scalar families.

For families of the shape xdot = t2 + t1 g(x) + h(x) (n = 1) the fold set
has the explicit parametrisation

    t1(x) = -h'(x) / g'(x),      t2(x) = -t1(x) g(x) - h(x),

and cusp candidates sit at sign changes of the second state derivative along
the sweep.  This is an independent check of the continuation machinery: it
never touches the predictor-corrector code path.  The sweep samples g and h
once on a dense uniform grid and differentiates on the grid, so the whole
fold set comes out vectorised; cusp candidates are then polished pointwise
by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .continuation import polyline_hausdorff
from .errors import NotParameterLinear
from .settings import Settings


@dataclass
class OracleResult:
    fold_polyline: np.ndarray   # (m, 2) clipped to the box
    fold_states: np.ndarray     # (m,) sweep states of the kept samples
    cusps: list                  # [(x, theta)] refined by bisection
    segments: int                # connected sweep pieces after clipping
    gaps: list = field(default_factory=list)  # x-intervals dropped (g' ~ 0)


def _extract_parameter_linear(family, tol: float = 1e-8):
    """Recover g and h from the evaluators; NotParameterLinear otherwise."""
    if family.dim != 1:
        raise NotParameterLinear("oracle requires a one-dimensional state")
    rhs = family.rhs

    def F(x, t1, t2):
        return float(rhs(np.array([x]), np.array([t1, t2]))[0])

    def g(x):
        return F(x, 1.0, 0.0) - F(x, 0.0, 0.0)

    def h(x):
        return F(x, 0.0, 0.0)

    rng = np.random.default_rng(7)
    for _ in range(12):
        x = float(rng.uniform(-2.0, 2.0))
        t1, t2 = rng.uniform(-2.0, 2.0, size=2)
        predicted = t2 + t1 * g(x) + h(x)
        actual = F(x, t1, t2)
        scale = 1.0 + abs(predicted) + abs(actual)
        if abs(predicted - actual) > tol * scale:
            raise NotParameterLinear(
                f"rhs is not of the form t2 + t1*g(x) + h(x) at x={x:.4f}")
    return g, h


def parameter_linear_oracle(family, settings: Settings = Settings()) -> OracleResult:
    """Sweep the closed-form fold set and locate cusps by bisection."""
    g, h = _extract_parameter_linear(family)
    box = family.box

    x_cap = 2.0 * (1.0 + box.diagonal)
    N = settings.oracle_sweep
    xs = np.linspace(-x_cap, x_cap, N)
    dx = xs[1] - xs[0]
    gv = np.fromiter((g(float(x)) for x in xs), dtype=float, count=N)
    hv = np.fromiter((h(float(x)) for x in xs), dtype=float, count=N)

    gp = np.gradient(gv, dx)
    hp = np.gradient(hv, dx)
    gpp = np.gradient(gp, dx)
    hpp = np.gradient(hp, dx)

    ok = np.abs(gp) > 1e-10 * (1.0 + np.abs(hp))
    t1 = np.where(ok, -hp / np.where(ok, gp, 1.0), np.nan)
    t2 = -t1 * gv - hv
    thetas = np.column_stack([t1, t2])

    gaps = []
    bad = np.flatnonzero(~ok)
    if bad.size:
        splits = np.split(bad, np.flatnonzero(np.diff(bad) > 1) + 1)
        gaps = [(float(xs[run[0]]), float(xs[run[-1]])) for run in splits]

    lo = np.array(box.lo) - 1e-9 * box.diagonal
    hi = np.array(box.hi) + 1e-9 * box.diagonal
    inside = ok & np.all((thetas >= lo) & (thetas <= hi), axis=1)
    kept = np.flatnonzero(inside)
    segments = 0
    if kept.size:
        segments = 1 + int(np.sum(np.diff(kept) > 1))

    def edge_point(i_in, i_out):
        """Exact box crossing between an inside and an outside sample."""
        a, b = thetas[i_in], thetas[i_out]
        if not np.all(np.isfinite(b)):
            return None
        tau_best = None
        for j in range(2):
            for val in (box.lo[j], box.hi[j]):
                d = b[j] - a[j]
                if d == 0.0:
                    continue
                tau = (val - a[j]) / d
                if 1e-12 < tau <= 1.0 and (tau_best is None or tau < tau_best):
                    tau_best = tau
        if tau_best is None:
            return None
        return a + tau_best * (b - a)

    # second state derivative of the field along the fold set; an isolated
    # exact zero (grid point on the cusp) must not mask the sign change
    fxx = t1 * gpp + hpp

    def fxx_point(x, th):
        s = max(1e-5 * (1.0 + abs(x)), dx)
        return (th[0] * (g(x + s) - 2 * g(x) + g(x - s))
                + (h(x + s) - 2 * h(x) + h(x - s))) / (s * s)

    def theta_point(x):
        s = 1e-6 * (1.0 + abs(x))
        gpv = (g(x + s) - g(x - s)) / (2 * s)
        hpv = (h(x + s) - h(x - s)) / (2 * s)
        if abs(gpv) < 1e-12:
            return None
        t1v = -hpv / gpv
        return np.array([t1v, -t1v * g(x) - h(x)])

    cusps = []
    signs = np.sign(fxx)
    prev_idx = None
    for i in kept:
        if not np.isfinite(fxx[i]) or signs[i] == 0.0:
            continue
        if (prev_idx is not None and i - prev_idx <= 3
                and signs[i] != signs[prev_idx]):
            lo_x, hi_x = float(xs[prev_idx]), float(xs[i])
            th_lo = thetas[prev_idx]
            v_lo = fxx[prev_idx]
            for _ in range(80):
                mid = 0.5 * (lo_x + hi_x)
                th_mid = theta_point(mid)
                if th_mid is None:
                    break
                vm = fxx_point(mid, th_mid)
                if vm == 0.0:
                    lo_x = hi_x = mid
                    break
                if (vm > 0) == (v_lo > 0):
                    lo_x, v_lo = mid, vm
                else:
                    hi_x = mid
                if hi_x - lo_x < 1e-12 * (1.0 + abs(mid)):
                    break
            x_c = 0.5 * (lo_x + hi_x)
            th_c = theta_point(x_c)
            if th_c is not None and family.box.contains(th_c, tol=1e-6):
                cusps.append((x_c, th_c))
        prev_idx = i

    # stitch the kept runs, extending each run to the exact box crossing so
    # the polyline reaches the boundary like the traced curves do
    if kept.size:
        runs = np.split(kept, np.flatnonzero(np.diff(kept) > 1) + 1)
        pieces = []
        for run in runs:
            pts = [thetas[i] for i in run]
            if run[0] > 0 and ok[run[0] - 1]:
                head = edge_point(run[0], run[0] - 1)
                if head is not None:
                    pts.insert(0, head)
            if run[-1] < N - 1 and ok[run[-1] + 1]:
                tail = edge_point(run[-1], run[-1] + 1)
                if tail is not None:
                    pts.append(tail)
            pieces.append(np.array(pts))
        poly = np.vstack(pieces)
    else:
        poly = np.zeros((0, 2))
    return OracleResult(fold_polyline=poly, fold_states=xs[kept],
                        cusps=cusps, segments=segments, gaps=gaps)


def diff_against_continuation(oracle: OracleResult, curves,
                              family) -> dict:
    """Box-scaled symmetric Hausdorff and cusp agreement vs traced curves."""
    box = family.box
    widths = box.widths
    cont_pts = []
    cont_cusps = []
    for rec in curves:
        cont_pts.append(rec.theta_polyline())
        cont_cusps.extend(c2.theta for c2 in rec.cusp_markers())
    if not cont_pts or oracle.fold_polyline.size == 0:
        return {
            "hausdorff": float("inf") if (cont_pts or oracle.fold_polyline.size)
            else 0.0,
            "cusp_count_oracle": len(oracle.cusps),
            "cusp_count_continuation": len(cont_cusps),
            "cusp_max_deviation": float("inf") if oracle.cusps or cont_cusps else 0.0,
        }
    cont = np.vstack(cont_pts) / widths
    orc = oracle.fold_polyline / widths
    # a strided copy bounds the segment count without hurting accuracy: the
    # sweep is so dense that chord error is negligible at stride ~10
    stride = max(1, len(orc) // 20000)
    haus = polyline_hausdorff(cont, orc[::stride])

    dev = 0.0
    if len(oracle.cusps) == len(cont_cusps) and oracle.cusps:
        used = set()
        for _, th in oracle.cusps:
            dists = [np.linalg.norm(np.asarray(th) - np.asarray(ct))
                     if j not in used else np.inf
                     for j, ct in enumerate(cont_cusps)]
            j = int(np.argmin(dists))
            used.add(j)
            dev = max(dev, float(dists[j]))
    elif oracle.cusps or cont_cusps:
        dev = float("inf")
    return {
        "hausdorff": float(haus),
        "cusp_count_oracle": len(oracle.cusps),
        "cusp_count_continuation": len(cont_cusps),
        "cusp_max_deviation": dev,
    }
