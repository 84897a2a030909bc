"""Test functions and normal-form coefficients for fold-curve classification.

The quadratic coefficient carries two flavours on purpose.  With the
conventional <p, q> = 1 scaling, ``a = <p, B(q,q)>/2`` gives the flow
direction on the centre manifold near a fold (xi' ~ a xi^2), but it has a
pole wherever <p, q> crosses zero, i.e. exactly at a BT point.  The
transported form ``<p_unit, B(q,q)>`` with sign-aligned unit vectors stays
continuous through BT (its nonvanishing there is precisely the BT
nondegeneracy condition), so sign changes of the transported form count
cusps and only cusps.  Curve traversal and the cusp test function use the
transported form; the per-point orientation API uses the conventional one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import families as fam
from .errors import (
    AtCusp,
    ClassificationConflict,
    DegenerateCusp,
    DegenerateNormalization,
    FrameUnavailable,
    NotPseudoHyperbolic,
)
from .linalg import NullPair, Spectrum, solve_linear, spectrum


@dataclass(frozen=True)
class OrientedTangent:
    """Unit centre tangent with an optional flow direction sign.

    ``direction`` is +1/-1 relative to ``q`` (0 when unset).  Flipping the
    sign of ``q`` flips the reported direction but represents the same
    oriented line; comparisons downstream always happen after transport
    alignment.
    """

    q: np.ndarray
    direction: int = 0


@dataclass
class Codim2Point:
    kind: str  # cusp_standard | cusp_dual | bogdanov_takens | fold_hopf
    x: np.ndarray
    theta: np.ndarray
    residuals: dict = field(default_factory=dict)
    frame: Optional[np.ndarray] = None


def classify_equilibrium(spec: Spectrum, hyp_gate: float = 1e-8) -> str:
    """attractor / k-saddle / nonhyperbolic from the spectrum."""
    res = [ev.real for ev in spec.eigenvalues]
    if any(abs(r) <= hyp_gate for r in res):
        return "nonhyperbolic"
    k = sum(1 for r in res if r > hyp_gate)
    if k == 0:
        return "attractor"
    return f"{k}-saddle"


def saddle_index(stability_class: str) -> int:
    if stability_class == "attractor":
        return 0
    if stability_class.endswith("-saddle"):
        return int(stability_class.split("-")[0])
    raise ValueError(f"no index for {stability_class!r}")


def quadratic_form(family, x, theta, q, p_unit) -> float:
    """<p_unit, B(q, q)> without the <p,q>=1 rescaling (BT-pole free)."""
    B = fam.directional_B(family, x, theta, q, q)
    return float(np.dot(p_unit, B))


def fold_coefficient_a(family, x, theta, nullpair: NullPair) -> float:
    """Fold normal-form coefficient a = <p, B(q,q)>/2 with <p,q> = 1.

    Invariant under q -> -q (B is quadratic) and, in sign, under positive
    rescaling of the vector field.
    """
    if nullpair.bt_flag:
        raise DegenerateNormalization(
            "<p,q> below bt_gate; fold coefficient undefined this close to BT"
        )
    B = fam.directional_B(family, x, theta, nullpair.q, nullpair.q)
    return 0.5 * float(np.dot(nullpair.p, B))


def bordered_solve(J, q, p_unit, rhs):
    """Solve the bordered system [[J, p],[q^T, 0]] [w; s] = [rhs; 0].

    Returns w, the component of the (pseudo-)inverse image orthogonal to the
    kernel; the bordering keeps the system regular when J is singular.
    """
    n = J.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = J
    M[:n, n] = p_unit
    M[n, :n] = q
    b = np.zeros(n + 1)
    b[:n] = np.asarray(rhs, dtype=float)
    sol = solve_linear(M, b)
    return sol[:n]


def cusp_coefficient_c(family, x, theta, nullpair: NullPair,
                       cusp_gate: float = 1e-8) -> float:
    """Cubic coefficient of the 1-D reduction at a fold with a ~ 0.

    c = <p, C(q,q,q) - 3 B(q, w)> / 6 with w the bordered-inverse image of
    B(q,q); the correction term is what makes the standard/dual call correct
    for n >= 2 (it vanishes identically for n = 1).  Negative c: standard
    cusp; positive: dual.
    """
    q = nullpair.q
    p = nullpair.p if not nullpair.bt_flag else nullpair.p_unit
    Bqq = fam.directional_B(family, x, theta, q, q)
    Cqqq = fam.directional_C(family, x, theta, q, q, q)
    J = fam.jacobian_x(family, x, theta)
    w = bordered_solve(J, q, nullpair.p_unit, Bqq)
    Bqw = fam.directional_B(family, x, theta, q, w)
    c = float(np.dot(p, Cqqq - 3.0 * Bqw)) / 6.0
    if abs(c) <= cusp_gate:
        raise DegenerateCusp(f"|c| = {abs(c):.2e} at the gate; higher-order point")
    return c


def centre_tangent(family, x, theta, reference=None,
                   gap_min: float = 5.0) -> OrientedTangent:
    """Unit tangent of the 1-D centre manifold at a pseudo-hyperbolic point.

    Requires a unique real eigenvalue of minimal |Re| separated from the rest
    by ``gap_min``; the eigenvector sign follows ``reference`` when given,
    else the first sizeable component is made positive.
    """
    J = fam.jacobian_x(family, x, theta)
    evs, vecs = np.linalg.eig(J)
    order = np.argsort(np.abs(evs.real))
    lead = evs[order[0]]
    if abs(lead.imag) > 1e-9 * max(1.0, abs(lead.real)):
        raise NotPseudoHyperbolic(
            f"leading eigenvalue {lead:.4g} is not real"
        )
    if len(evs) > 1:
        second = abs(evs[order[1]].real)
        leadmag = abs(lead.real)
        gap = np.inf if leadmag == 0.0 else second / leadmag
        if gap <= gap_min:
            raise NotPseudoHyperbolic(
                f"spectral gap ratio {gap:.3g} below {gap_min}"
            )
    v = vecs[:, order[0]]
    # simple real eigenvalue: rotate the phase out and take the real part
    pivot = v[np.argmax(np.abs(v))]
    v = (v / pivot).real
    v = v / np.linalg.norm(v)
    if reference is not None:
        if float(np.dot(v, reference)) < 0:
            v = -v
    else:
        for comp in v:
            if abs(comp) > 1e-12:
                if comp < 0:
                    v = -v
                break
    return OrientedTangent(q=v, direction=0)


def fold_orientation(family, fold_point, cusp_gate: float = 1e-8) -> OrientedTangent:
    """Flow direction on the centre manifold near a fold: sign(a) along q."""
    a = fold_point.a_coeff
    if a is None or fold_point.nullpair.bt_flag:
        raise DegenerateNormalization("orientation undefined at a BT-flagged fold")
    if abs(a) <= cusp_gate:
        raise AtCusp(f"|a| = {abs(a):.2e} at the cusp gate")
    return OrientedTangent(q=fold_point.nullpair.q, direction=1 if a > 0 else -1)


# ---------------------------------------------------------------------------
# cusp frame and sheet-based standard/dual classification
# ---------------------------------------------------------------------------

def canonical_null_signs(nullpair: NullPair) -> NullPair:
    """Flip (q, p) together so q is lexicographically positive.

    The fold data is invariant under the joint flip; fixing the sign removes
    the reflection ambiguity of the cusp frame, so the normal-form sweep
    coordinate u always advances along +q.
    """
    q = nullpair.q
    for comp in q:
        if abs(comp) > 1e-12:
            if comp < 0:
                from dataclasses import replace

                return replace(nullpair, q=-nullpair.q, p=-nullpair.p,
                               p_unit=-nullpair.p_unit)
            break
    return nullpair


def cusp_frame(family, x, theta, nullpair: NullPair, c: float) -> np.ndarray:
    """2x2 frame mapping normal-form coordinates (nu1, nu2) into the box.

    Built so that the standard parametrisation (nu1, nu2) = (3u^2, -2u^3) of
    the fold set maps onto the family's fold set near the cusp: with the
    reduced system xi' = b1 + b2 xi + c xi^3 and unfolding gradients
    v1 = d(b1)/dtheta, v2 = d(b2)/dtheta, the frame sends
    nu -> V^-1 (s2 nu2, s1 nu1) where s1 = -c/l^2, s2 = -c/l^3, l = sqrt|c|.
    The lifted state along the sweep is x_c + (u / l) q + O(u^2) with q
    sign-canonicalised, which pins down the otherwise free reflection.
    """
    nullpair = canonical_null_signs(nullpair)
    q = nullpair.q
    p = nullpair.p
    Jt = fam.jacobian_theta(family, x, theta)
    v1 = p @ Jt  # gradient of the constant unfolding term
    # gradient of the linear term: explicit theta-dependence of p^T J q plus
    # the equilibrium-sheet shift through B
    h = family.fd_step * (1.0 + float(np.linalg.norm(theta, np.inf)))
    v2 = np.empty(2)
    J = fam.jacobian_x(family, x, theta)
    for j in range(2):
        tp = np.array(theta, dtype=float)
        tm = np.array(theta, dtype=float)
        tp[j] += h
        tm[j] -= h
        Jp = fam.jacobian_x(family, x, tp)
        Jm = fam.jacobian_x(family, x, tm)
        v2[j] = float(p @ ((Jp - Jm) @ q)) / (2.0 * h)
        w = bordered_solve(J, q, nullpair.p_unit, Jt[:, j])
        v2[j] += float(p @ fam.directional_B(family, x, theta, q, -w))
    V = np.vstack([v1, v2])
    if abs(np.linalg.det(V)) < 1e-10 * max(np.linalg.norm(V), 1e-300) ** 2:
        raise FrameUnavailable("unfolding gradients are degenerate")
    lam = np.sqrt(abs(c))
    s1 = -c / lam ** 2
    s2 = -c / lam ** 3
    cols = np.column_stack([
        solve_linear(V, np.array([0.0, s1])),
        solve_linear(V, np.array([s2, 0.0])),
    ])
    return cols


def sheet_cusp_kind(family, x, theta, frame, q, settings, newton) -> Optional[str]:
    """Classify a cusp from the indices of the three colliding equilibria.

    Probes a parameter just inside the three-sheet wedge (along the frame's
    nu1 axis), re-converges equilibria from seeds spread along the null
    direction and reads off the collision pattern: two index-i plus one
    index-(i+1) is standard, the reverse is dual.  Returns None when fewer
    than three local sheets are recovered.
    """
    eps = 1e-3 * family.box.diagonal
    theta_probe = np.asarray(theta) + frame @ np.array([eps, 0.0])
    scale = np.sqrt(eps) * 2.0
    found = []
    for s in (-2.0, -1.2, -0.5, 0.0, 0.5, 1.2, 2.0):
        seed = np.asarray(x) + s * scale * q
        try:
            root = newton(family, seed, theta_probe, settings)
        except Exception:
            continue
        if np.linalg.norm(root - np.asarray(x)) > 10.0 * scale + 1e-6:
            continue
        if all(np.linalg.norm(root - r) > 1e-7 * (1 + np.linalg.norm(root))
               for r in found):
            found.append(root)
    if len(found) != 3:
        return None
    idx = []
    for root in found:
        spec = spectrum(fam.jacobian_x(family, root, theta_probe))
        cls = classify_equilibrium(spec, settings.hyp_gate)
        if cls == "nonhyperbolic":
            return None
        idx.append(saddle_index(cls))
    idx.sort()
    if idx[0] == idx[1] and idx[2] == idx[0] + 1:
        return "cusp_standard"
    if idx[1] == idx[2] and idx[0] == idx[1] - 1:
        return "cusp_dual"
    return None


def classify_cusp(family, x, theta, nullpair, settings, newton) -> tuple[str, float, Optional[np.ndarray]]:
    """Kind, cubic coefficient and frame for a refined cusp point.

    Sheet sampling is authoritative when it recovers all three sheets; the
    sign of c is the fallback.  A disagreement raises ClassificationConflict.
    """
    c = cusp_coefficient_c(family, x, theta, nullpair, settings.cusp_gate)
    coeff_kind = "cusp_standard" if c < 0 else "cusp_dual"
    frame = None
    sheet_kind = None
    try:
        frame = cusp_frame(family, x, theta, nullpair, c)
        sheet_kind = sheet_cusp_kind(family, x, theta, frame, nullpair.q,
                                     settings, newton)
    except FrameUnavailable:
        frame = None
    if sheet_kind is not None and sheet_kind != coeff_kind:
        raise ClassificationConflict(
            f"sheet pattern says {sheet_kind}, coefficient sign says "
            f"{coeff_kind} (c = {c:.3e}) at theta={np.asarray(theta).tolist()}"
        )
    return (sheet_kind or coeff_kind), c, frame


def psi_fold_hopf(J, hopf_gate: float = 1e-3, kernel_tol: float = 1e-6):
    """Signed distance of the closest complex pair to the imaginary axis.

    None when the spectrum has no complex pair with |Im| above the Hopf gate
    (after discarding the kernel eigenvalue); a sign change along a fold
    curve brackets a fold-Hopf point.
    """
    evs = np.asarray(spectrum(J).eigenvalues)
    norm = max(np.max(np.abs(evs)), 1.0)
    # drop the single near-kernel eigenvalue
    mods = np.abs(evs)
    kernel_idx = int(np.argmin(mods))
    rest = np.delete(evs, kernel_idx)
    pairs = rest[np.abs(rest.imag) > hopf_gate]
    if pairs.size == 0:
        return None
    best = pairs[np.argmin(np.abs(pairs.real))]
    return float(best.real)
