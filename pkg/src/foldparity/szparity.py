"""S/Z boundary verification, saddle-component membership and the parity verdict.

The pipeline mirrors the structure of the bistable-boundary claim: verify
that the designated box edge carries a single bistable branch with exactly
two opposed folds and that the rest of the boundary is event-free, trace all
interior fold curves, decide which ones bound the saddle component grown
from the boundary saddle arc, count their cusps, and cross-check the count
parity against orientation switches along the closed traversal built from
the main curve plus the saddle arc.

A fold-Hopf marker on a relevant curve short-circuits the verdict: the
disjunction is then satisfied regardless of parity (when the boundary
hypothesis itself fails but a fold-Hopf point is present, the verdict still
reports the first branch rather than failing outright).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from . import families as fam
from . import detect
from .continuation import (
    BranchPoint,
    BranchResult,
    FoldCurveRecord,
    FoldPoint,
    Path,
    _point_polyline_distance,
    continue_equilibria_along_path,
    enumerate_fold_curves,
    find_equilibria,
    newton_equilibrium,
)
from .errors import (
    BranchLost,
    CrossCheckFailure,
    InconclusiveMembership,
    SZViolation,
    TransportBroken,
)
from .linalg import spectrum
from .settings import Settings

_EDGE_ORDER = ("bottom", "right", "top", "left")


@dataclass
class Arc:
    points: list  # of BranchPoint
    stability: str


@dataclass
class SZReport:
    edge: str
    branch: BranchResult
    folds: tuple  # (FoldPoint, FoldPoint) ordered by edge coordinate
    fold_s: tuple  # path coordinates of the folds
    arcs: tuple  # (Arc, Arc, Arc): attractor / saddle / attractor
    opposed: bool
    opposed_method: str
    other_edges_clean: bool
    edge_events: dict = field(default_factory=dict)

    @property
    def saddle_arc(self) -> Arc:
        return self.arcs[1]


@dataclass
class MembershipEvidence:
    member: bool
    witness: Optional[tuple]
    path: list
    resolution: dict


@dataclass
class TraversalResult:
    switch_count: int          # total discontinuities around the closed loop
    curve_flips: int           # sign changes on the fold-curve leg
    arrival_flip: int          # discontinuity arriving back at the first fold
    flip_positions: list


@dataclass
class ParityVerdict:
    fh_found: bool
    fh_locations: list
    boundary_curves_of_MS: list
    cusp_count_total: int
    cusp_count_main: Optional[int]
    parity: Optional[str]
    switch_count: Optional[int]
    curve_flips: Optional[int]
    arrival_flip: Optional[int]
    theorem_satisfied: bool
    sz_valid: bool
    resolution: dict
    curves: list = field(default_factory=list)
    sz: Optional[SZReport] = None
    membership: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# boundary scan
# ---------------------------------------------------------------------------

def _edge_path(box, edge: str) -> Path:
    a, b = box.edge_endpoints(edge)
    return Path.from_segment(a, b)


def _trace_edge_branches(family, path, settings: Settings, rng):
    """All equilibrium branches over one edge, from multi-start seeds.

    Returns (branches, failures); a failure records a seed whose trace was
    lost, which invalidates the boundary hypothesis check.
    """
    L = path.length
    samples = np.linspace(0.0, L, settings.edge_samples)
    branches: list[BranchResult] = []
    branch_polys: list[np.ndarray] = []
    failures: list[tuple[float, list]] = []

    def on_known_branch(s, x):
        pt = np.concatenate([[s], np.atleast_1d(x)])
        gate = 0.75 * (L / (settings.edge_samples - 1))
        for poly in branch_polys:
            if _point_polyline_distance(pt, poly) < gate:
                return True
        return False

    warm: list = []
    for s_k in samples:
        theta = path.theta(s_k)
        roots = find_equilibria(family, theta, settings, rng, warm_starts=warm)
        warm = roots
        for x in roots:
            if on_known_branch(s_k, x):
                continue
            try:
                fwd = continue_equilibria_along_path(
                    family, path, x, settings, s_start=s_k, direction=+1)
                bwd = continue_equilibria_along_path(
                    family, path, x, settings, s_start=s_k, direction=-1)
            except BranchLost:
                failures.append((float(s_k), np.atleast_1d(x).tolist()))
                continue
            if "lost" in fwd.status or "lost" in bwd.status:
                failures.append((float(s_k), np.atleast_1d(x).tolist()))
            pts = list(reversed(bwd.points[1:])) + fwd.points
            merged = BranchResult(
                points=pts,
                fold_events=sorted(bwd.fold_events + fwd.fold_events,
                                   key=lambda fs: fs[1]),
                hopf_events=bwd.hopf_events + fwd.hopf_events,
                degenerate_events=bwd.degenerate_events + fwd.degenerate_events,
                status=f"{bwd.status}/{fwd.status}",
            )
            branches.append(merged)
            branch_polys.append(np.array(
                [np.concatenate([[bp.path_s], bp.x]) for bp in pts]))
    return branches, failures


def _arclength_positions(pts):
    poly = np.array([np.concatenate([bp.x, [bp.path_s]]) for bp in pts])
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    return poly, np.concatenate([[0.0], np.cumsum(seg)])


def _project_arclength(poly, cum, point):
    """Arclength position of the closest polyline point to ``point``."""
    best_t, best_d = 0.0, np.inf
    for i in range(len(poly) - 1):
        a, b = poly[i], poly[i + 1]
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0 else float(np.clip((point - a) @ ab / denom, 0, 1))
        proj = a + t * ab
        d = float(np.linalg.norm(point - proj))
        if d < best_d:
            best_d = d
            best_t = cum[i] + t * (cum[i + 1] - cum[i])
    return best_t


def _split_sz_arcs(branch: BranchResult, fold_s_pair, settings: Settings):
    """Split the S/Z branch points into the three arcs between the folds.

    Points are assigned by their arclength position along the branch
    relative to the projected fold positions, which avoids off-by-one
    assignments right at the folds.
    """
    pts = branch.points
    poly, cum = _arclength_positions(pts)
    fold_pos = sorted(
        _project_arclength(poly, cum, np.concatenate([fp.x, [s]]))
        for fp, s in fold_s_pair)
    buckets = ([], [], [])
    for i, bp in enumerate(pts):
        t = cum[i]
        k = 0 if t < fold_pos[0] else (1 if t < fold_pos[1] else 2)
        buckets[k].append(bp)
    out = []
    for arc_pts in buckets:
        classes = {bp.stability_class for bp in arc_pts
                   if bp.spectrum.min_abs() > 1e3 * settings.hyp_gate}
        cls = classes.pop() if len(classes) == 1 else "mixed:" + ",".join(sorted(classes))
        out.append(Arc(points=list(arc_pts), stability=cls))
    return tuple(out)


def boundary_scan(family, settings: Settings = Settings(),
                  rng=None) -> SZReport:
    """Scan all four edges, validate the S/Z hypothesis and classify arcs."""
    if rng is None:
        rng = np.random.default_rng(settings.seed)
    box = family.box
    sz_edge = box.sz_edge
    per_edge = {}
    for edge in _EDGE_ORDER:
        path = _edge_path(box, edge)
        branches, failures = _trace_edge_branches(family, path, settings, rng)
        if failures:
            raise SZViolation(
                "branch_tracking",
                f"{len(failures)} branch trace(s) lost over the {edge} edge")
        per_edge[edge] = (path, branches)

    # collect events
    events = {}
    for edge, (path, branches) in per_edge.items():
        folds = [ev for br in branches for ev in br.fold_events]
        hopfs = [ev for br in branches for ev in br.hopf_events]
        degen = [ev for br in branches for ev in br.degenerate_events]
        events[edge] = {"folds": folds, "hopf": hopfs, "degenerate": degen,
                        "branches": len(branches)}

    for edge in _EDGE_ORDER:
        ev = events[edge]
        if ev["hopf"]:
            raise SZViolation("hopf_on_boundary",
                              f"Hopf event over the {edge} edge")
        if ev["degenerate"]:
            raise SZViolation("degenerate_boundary_event",
                              f"eigenvalue-axis crossing over the {edge} edge")
        if edge != sz_edge and ev["folds"]:
            raise SZViolation(
                "extra_folds",
                f"{len(ev['folds'])} fold(s) over the {edge} edge "
                f"(S/Z edge is {sz_edge})")

    path, branches = per_edge[sz_edge]
    sz_branches = [br for br in branches if br.fold_events]
    all_folds = events[sz_edge]["folds"]
    if len(all_folds) != 2:
        raise SZViolation(
            "extra_folds" if len(all_folds) > 2 else "missing_folds",
            f"{len(all_folds)} fold(s) over the S/Z edge, need exactly 2")
    if len(sz_branches) != 1:
        raise SZViolation(
            "condition_i",
            f"the two folds sit on {len(sz_branches)} branches, need 1")
    if len(branches) != 1:
        raise SZViolation(
            "condition_i",
            f"{len(branches)} equilibrium branches over the S/Z edge; the "
            "lifted curve must be a single simply connected branch")
    branch = sz_branches[0]

    folds_sorted = sorted(branch.fold_events, key=lambda fs: fs[1])
    arcs = _split_sz_arcs(branch, folds_sorted, settings)
    if arcs[1].stability != "1-saddle":
        raise SZViolation(
            "saddle_arc_wrong_index",
            f"middle arc classifies as {arcs[1].stability}, need 1-saddle")
    for arc, where in ((arcs[0], "first"), (arcs[2], "last")):
        if arc.stability != "attractor":
            raise SZViolation(
                "condition_i",
                f"{where} arc classifies as {arc.stability}, need attractor")

    report = SZReport(
        edge=sz_edge,
        branch=branch,
        folds=(folds_sorted[0][0], folds_sorted[1][0]),
        fold_s=(folds_sorted[0][1], folds_sorted[1][1]),
        arcs=arcs,
        opposed=False,
        opposed_method="",
        other_edges_clean=True,
        edge_events={e: {k: len(v) if isinstance(v, list) else v
                         for k, v in ev.items()}
                     for e, ev in events.items()},
    )
    opposed, method = opposed_folds(report, family, settings)
    report.opposed = opposed
    report.opposed_method = method
    if not opposed:
        raise SZViolation("folds_not_opposed",
                          "the two boundary folds have the same orientation "
                          "against the transported saddle direction")
    return report


# ---------------------------------------------------------------------------
# opposed folds
# ---------------------------------------------------------------------------

def _unstable_direction(family, bp: BranchPoint, settings: Settings):
    J = fam.jacobian_x(family, bp.x, bp.theta)
    evs, vecs = np.linalg.eig(J)
    order = np.argsort(evs.real)
    lead = evs[order[-1]]
    if lead.real <= settings.hyp_gate or abs(lead.imag) > 1e-9 * max(1, abs(lead)):
        raise TransportBroken(
            f"no simple real unstable eigenvalue at theta={bp.theta.tolist()}")
    v = vecs[:, order[-1]]
    pivot = v[np.argmax(np.abs(v))]
    v = (v / pivot).real
    return v / np.linalg.norm(v)


def _transport_along_arc(family, arc_points, settings: Settings, v0=None):
    """Sign-aligned transport of the saddle unstable direction along an arc."""
    carried = None
    out = []
    for bp in arc_points:
        v = _unstable_direction(family, bp, settings)
        if carried is None:
            if v0 is not None and float(v @ v0) < 0:
                v = -v
        else:
            d = float(v @ carried)
            if abs(d) < settings.transport_gate:
                raise TransportBroken(
                    f"transport alignment |<v,v'>|={abs(d):.3f} below gate "
                    f"at theta={bp.theta.tolist()}")
            if d < 0:
                v = -v
        carried = v
        out.append(v)
    return out


def _fold_direction_vs(fold: FoldPoint, reference_vec) -> bool:
    """True when the fold's flow direction agrees with the reference vector."""
    q = fold.nullpair.q
    a = fold.a_coeff
    if a is None:
        raise TransportBroken("fold orientation undefined (BT-flagged fold)")
    aligned = float(q @ reference_vec)
    if aligned == 0.0:
        raise TransportBroken("fold null direction orthogonal to transport")
    direction = np.sign(a) * np.sign(aligned)
    return direction > 0


def opposed_folds(sz: SZReport, family, settings: Settings = Settings(),
                  method: Optional[str] = None):
    """Decide opposedness of the two S/Z folds; returns (flag, method).

    General families use the flow-orientation test: transport the saddle
    unstable direction along the saddle arc and compare the fold flow
    direction at each end.  Gradient families additionally run the
    potential-slope test and the two must agree.
    """
    arc = sz.saddle_arc.points
    if len(arc) < 2:
        raise TransportBroken("saddle arc too short for transport")
    vecs = _transport_along_arc(family, arc, settings)
    agree_first = _fold_direction_vs(sz.folds[0], vecs[0])
    agree_last = _fold_direction_vs(sz.folds[1], vecs[-1])
    flow_opposed = agree_first != agree_last

    if family.kind != "gradient" or family.potential is None:
        if method == "potential_slope":
            raise SZViolation("opposed_method",
                              "potential_slope requires a gradient family")
        return flow_opposed, "flow_orientation"

    # potential slope: sign of the odd part of f along the transported
    # direction near each fold (the even parts cancel in the symmetric
    # difference, leaving the cubic term that orients the degenerate fold)
    def slope_sign(fold, vec):
        delta = settings.probe_offset * (1.0 + np.linalg.norm(fold.x))
        e = vec / np.linalg.norm(vec)
        fp = family.potential(fold.x + delta * e, fold.theta)
        fm = family.potential(fold.x - delta * e, fold.theta)
        return (fp - fm) > 0

    inc_first = slope_sign(sz.folds[0], vecs[0])
    inc_last = slope_sign(sz.folds[1], vecs[-1])
    slope_opposed = inc_first != inc_last
    if slope_opposed != flow_opposed:
        raise CrossCheckFailure(
            f"potential_slope says opposed={slope_opposed}, flow_orientation "
            f"says {flow_opposed}")
    return slope_opposed, "potential_slope"


# ---------------------------------------------------------------------------
# saddle-component membership
# ---------------------------------------------------------------------------

def collect_saddle_cloud(family, settings: Settings, rng=None):
    """Sampled point cloud of 1-saddle equilibria over the box."""
    if rng is None:
        rng = np.random.default_rng(settings.seed + 1)
    box = family.box
    G = settings.member_grid
    t1s = np.linspace(box.lo[0], box.hi[0], G)
    t2s = np.linspace(box.lo[1], box.hi[1], G)
    member_settings = settings.with_overrides(restarts=settings.member_starts)
    one_d = family.dim == 1
    xs, thetas = [], []
    for t1 in t1s:
        warm: list[np.ndarray] = []
        for t2 in t2s:
            theta = np.array([t1, t2])
            roots = find_equilibria(family, theta, member_settings, rng,
                                    warm_starts=warm)
            warm = roots
            for x in roots:
                J = fam.jacobian_x(family, x, theta)
                if one_d:
                    is_saddle = float(J[0, 0]) > settings.hyp_gate
                else:
                    evs = np.linalg.eigvals(J)
                    is_saddle = (np.all(np.abs(evs.real) > settings.hyp_gate)
                                 and np.sum(evs.real > settings.hyp_gate) == 1)
                if is_saddle:
                    xs.append(x)
                    thetas.append(theta)
    if xs:
        return np.array(xs), np.array(thetas)
    return np.zeros((0, family.dim)), np.zeros((0, 2))


def _representative_fold(curve: FoldCurveRecord, box, settings: Settings):
    """A regular curve point far from codim-2 markers, for sheet probing.

    Probe parameters sit a normal offset away from the point, so candidates
    must keep that margin inside the box; the margin is relaxed when the
    whole curve hugs the boundary.
    """
    delta = settings.probe_offset * box.diagonal
    lo, hi = np.array(box.lo), np.array(box.hi)
    for margin in (2.0 * delta, 0.5 * delta, 0.0):
        best = None
        best_score = -1.0
        for fp in curve.points:
            if fp.nullpair.bt_flag or fp.a_coeff is None:
                continue
            if abs(fp.a_coeff) <= settings.cusp_trigger:
                continue
            boundary_dist = float(min(np.min(fp.theta - lo),
                                      np.min(hi - fp.theta)))
            if boundary_dist < margin:
                continue
            score = min(
                (np.linalg.norm(fp.theta - c2.theta)
                 for c2 in curve.codim2_points),
                default=np.inf,
            )
            score = min(score, 1e6) + 1e-3 * abs(fp.a_coeff)
            if score > best_score:
                best, best_score = fp, score
        if best is not None:
            return best
    return None


def _probe_saddle_witness(family, curve, settings: Settings):
    """1-saddle equilibria adjacent to the curve (offset along +-q)."""
    fp = _representative_fold(curve, family.box, settings)
    if fp is None:
        return [], None
    pts = curve.theta_polyline()
    i = int(np.argmin(np.linalg.norm(pts - fp.theta, axis=1)))
    if i == 0:
        tan = pts[1] - pts[0]
    elif i == len(pts) - 1:
        tan = pts[-1] - pts[-2]
    else:
        tan = pts[i + 1] - pts[i - 1]
    nrm = np.array([-tan[1], tan[0]])
    nn = np.linalg.norm(nrm)
    if nn == 0:
        return [], fp
    nrm /= nn
    delta = settings.probe_offset * family.box.diagonal
    witnesses = []
    scale = np.sqrt(delta) * (1.0 + np.linalg.norm(fp.x))
    for side in (+1.0, -1.0):
        theta_p = np.asarray(fp.theta) + side * delta * nrm
        if not family.box.contains(theta_p, tol=0.0):
            continue
        local = []
        for sfac in (-1.5, -0.75, 0.0, 0.75, 1.5):
            x0 = fp.x + sfac * scale * fp.nullpair.q
            x = newton_equilibrium(family, x0, theta_p, settings)
            if x is None:
                continue
            if np.linalg.norm(x - fp.x) > 3.0 * scale + 1e-6:
                continue
            if any(np.linalg.norm(x - y) < 1e-7 * (1 + np.linalg.norm(y))
                   for y in local):
                continue
            local.append(x)
        for x in local:
            spec = spectrum(fam.jacobian_x(family, x, theta_p))
            if detect.classify_equilibrium(spec, settings.hyp_gate) == "1-saddle":
                witnesses.append((x, theta_p))
    return witnesses, fp


def saddle_component_membership(family, curve: FoldCurveRecord, sz: SZReport,
                                settings: Settings = Settings(),
                                cloud=None) -> MembershipEvidence:
    """Does the curve's saddle side belong to the boundary saddle component?

    Region-growing over a sampled cloud of 1-saddles in (x, theta) space:
    the curve contributes witness points just off its saddle side, the S/Z
    report contributes the boundary saddle arc, and membership is graph
    connectivity under the box-scaled product metric.
    """
    witnesses, rep = _probe_saddle_witness(family, curve, settings)
    if not witnesses:
        raise InconclusiveMembership(
            "no adjacent 1-saddle sheet recovered near the curve",
            gap=None if rep is None else rep.theta.tolist())
    if cloud is None:
        cloud = collect_saddle_cloud(family, settings)
    xs, thetas = cloud
    arc_pts = sz.saddle_arc.points
    arc_xs = np.array([bp.x for bp in arc_pts])
    arc_thetas = np.array([bp.theta for bp in arc_pts])
    wit_xs = np.array([w[0] for w in witnesses])
    wit_thetas = np.array([w[1] for w in witnesses])

    all_xs = np.vstack([xs, arc_xs, wit_xs])
    all_thetas = np.vstack([thetas, arc_thetas, wit_thetas])
    n_cloud = len(xs)
    n_arc = len(arc_xs)

    box = family.box
    spread = max(1.0, float(np.ptp(all_xs)) if all_xs.size else 1.0)
    coords = np.hstack([all_xs / spread,
                        (all_thetas - np.array(box.lo)) / box.widths])
    gate = settings.member_adjacency / (settings.member_grid - 1)
    tree = cKDTree(coords)
    pairs = tree.query_pairs(gate, output_type="ndarray")
    m = len(coords)
    if len(pairs):
        graph = sparse.csr_matrix(
            (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    else:
        graph = sparse.csr_matrix((m, m))
    n_comp, labels = csgraph.connected_components(graph, directed=False)

    arc_labels = set(labels[n_cloud:n_cloud + n_arc])
    wit_idx = np.arange(n_cloud + n_arc, m)
    member_hits = [i for i in wit_idx if labels[i] in arc_labels]
    resolution = {
        "member_grid": settings.member_grid,
        "member_starts": settings.member_starts,
        "cloud_size": int(n_cloud),
        "adjacency_gate": float(gate),
        "components": int(n_comp),
    }
    if not member_hits:
        return MembershipEvidence(member=False,
                                  witness=(wit_xs[0].tolist(),
                                           wit_thetas[0].tolist()),
                                  path=[], resolution=resolution)
    # evidence path: BFS predecessors from the witness to any arc node
    src = member_hits[0]
    order, preds = csgraph.breadth_first_order(
        graph, src, directed=False, return_predecessors=True)
    target = None
    for node in range(n_cloud, n_cloud + n_arc):
        if labels[node] == labels[src]:
            target = node
            break
    path_nodes = []
    node = target
    while node is not None and node >= 0 and node != src:
        path_nodes.append(node)
        node = preds[node] if preds[node] >= 0 else None
    path_nodes.append(src)
    path_nodes.reverse()
    step = max(1, len(path_nodes) // 50)
    path = [(all_xs[i].tolist(), all_thetas[i].tolist())
            for i in path_nodes[::step]]
    return MembershipEvidence(member=True,
                              witness=(all_xs[src].tolist(),
                                       all_thetas[src].tolist()),
                              path=path, resolution=resolution)


# ---------------------------------------------------------------------------
# counting and traversal
# ---------------------------------------------------------------------------

def count_cusps(curves) -> tuple[int, dict]:
    """Total cusp markers (both kinds) across curves; BT/fH excluded."""
    per_curve = {}
    total = 0
    for rec in curves:
        cusps = rec.cusp_markers()
        per_curve[rec.curve_id] = cusps
        total += len(cusps)
    return total, per_curve


def _curve_oriented_from(curve: FoldCurveRecord, start_theta) -> list:
    pts = curve.points
    d_first = np.linalg.norm(pts[0].theta - start_theta)
    d_last = np.linalg.norm(pts[-1].theta - start_theta)
    return pts if d_first <= d_last else list(reversed(pts))


def traversal_switch_count(main_curve: FoldCurveRecord,
                           sz: Optional[SZReport],
                           family, settings: Settings = Settings()) -> TraversalResult:
    """Count direction-field discontinuities along the proof traversal.

    Walks the fold curve from the first S/Z fold to the second carrying the
    transported quadratic form (pole-free through BT), counts its sign
    changes, then carries the direction along the boundary saddle arc and
    checks for the closing discontinuity back at the start.  With no S/Z
    report the walk covers the curve only (open traversal, no closure term).
    The returned ``switch_count`` is the total around the closed loop; the
    per-leg numbers are kept alongside.
    """
    if sz is not None:
        pts = _curve_oriented_from(main_curve, sz.folds[0].theta)
    else:
        pts = main_curve.points

    # sign changes of the transported quadratic form along the curve
    vals = [fp.testfns.get("cusp") for fp in pts]
    scale = max((abs(v) for v in vals if v is not None), default=0.0)
    flips = 0
    flip_positions = []
    prev = None
    prev_fp = None
    for fp, v in zip(pts, vals):
        if v is None or abs(v) <= 1e-9 * max(scale, 1.0):
            continue
        s = 1 if v > 0 else -1
        if prev is not None and s != prev:
            flips += 1
            flip_positions.append(
                tuple(0.5 * (np.asarray(prev_fp.theta) + np.asarray(fp.theta))))
        prev = s
        prev_fp = fp

    if sz is None:
        return TraversalResult(switch_count=flips, curve_flips=flips,
                               arrival_flip=0, flip_positions=flip_positions)

    # close the loop through the saddle arc: the direction on the arc is the
    # one inherited at the fold-to-saddle transition at the second fold
    end_fp = pts[-1]
    start_fp = pts[0]
    if end_fp.a_coeff is None or start_fp.a_coeff is None:
        raise TransportBroken("boundary folds are BT-flagged")
    d_end = np.sign(end_fp.a_coeff) * end_fp.nullpair.q

    arc = sz.saddle_arc.points
    # orient the arc from the second fold back to the first
    d_to_end = np.linalg.norm(arc[0].theta - end_fp.theta)
    d_to_end_last = np.linalg.norm(arc[-1].theta - end_fp.theta)
    arc_walk = arc if d_to_end <= d_to_end_last else list(reversed(arc))
    vecs = _transport_along_arc(family, arc_walk, settings, v0=d_end)
    carried = vecs[-1]
    d_start = np.sign(start_fp.a_coeff) * start_fp.nullpair.q
    arrival_flip = 1 if float(d_start @ carried) < 0 else 0

    return TraversalResult(switch_count=flips + arrival_flip,
                           curve_flips=flips,
                           arrival_flip=arrival_flip,
                           flip_positions=flip_positions)


# ---------------------------------------------------------------------------
# the verdict
# ---------------------------------------------------------------------------

def _match_main_curve(curves, sz: SZReport, box):
    """The curve whose endpoints meet the two S/Z folds."""
    tol = 1e-3 * box.diagonal * 3
    for rec in curves:
        if rec.closed or len(rec.points) < 2:
            continue
        ends = (rec.points[0].theta, rec.points[-1].theta)
        f1, f2 = sz.folds[0].theta, sz.folds[1].theta
        d_direct = max(np.linalg.norm(ends[0] - f1), np.linalg.norm(ends[1] - f2))
        d_cross = max(np.linalg.norm(ends[0] - f2), np.linalg.norm(ends[1] - f1))
        if min(d_direct, d_cross) < tol:
            return rec
    return None


def theorem_verdict(family, settings: Settings = Settings()) -> ParityVerdict:
    """Full pipeline: boundary scan, enumeration, membership, counts, traversal."""
    t_start = time.perf_counter()
    rng = np.random.default_rng(settings.seed)
    sz = None
    sz_error: Optional[SZViolation] = None
    try:
        sz = boundary_scan(family, settings, rng=rng)
    except SZViolation as exc:
        sz_error = exc

    curves = enumerate_fold_curves(family, settings)
    fh_locations = [
        {"curve_id": rec.curve_id, "theta": c2.theta.tolist(),
         "x": np.atleast_1d(c2.x).tolist()}
        for rec in curves for c2 in rec.codim2_points
        if c2.kind == "fold_hopf"
    ]

    resolution = {
        "grid_g": settings.grid_g,
        "restarts": settings.restarts,
        "member_grid": settings.member_grid,
        "member_starts": settings.member_starts,
        "seed": settings.seed,
        "curves_found": len(curves),
    }

    if sz is None:
        # the boundary hypothesis failed; a fold-Hopf point still satisfies
        # the disjunction, otherwise the violation propagates
        if fh_locations:
            resolution["elapsed_s"] = time.perf_counter() - t_start
            return ParityVerdict(
                fh_found=True, fh_locations=fh_locations,
                boundary_curves_of_MS=[], cusp_count_total=0,
                cusp_count_main=None, parity=None, switch_count=None,
                curve_flips=None, arrival_flip=None,
                theorem_satisfied=True, sz_valid=False,
                resolution=resolution, curves=curves, sz=None,
            )
        raise sz_error

    cloud = collect_saddle_cloud(family, settings)
    membership = {}
    member_curves = []
    member_meta = []
    for rec in curves:
        ev = saddle_component_membership(family, rec, sz, settings, cloud=cloud)
        membership[rec.curve_id] = ev
        if ev.member:
            member_curves.append(rec)
            member_meta.append({"curve_id": rec.curve_id,
                                "witness": ev.witness,
                                "path_len": len(ev.path)})

    fh_member = [loc for loc in fh_locations
                 if loc["curve_id"] in {rec.curve_id for rec in member_curves}]
    fh_found = bool(fh_member)

    cusp_total, per_curve = count_cusps(member_curves)

    main = _match_main_curve(member_curves, sz, family.box)
    cusp_main = len(per_curve.get(main.curve_id, [])) if main is not None else None

    switch_total = curve_flips = arrival = None
    if main is not None and not fh_found:
        trav = traversal_switch_count(main, sz, family, settings)
        switch_total, curve_flips, arrival = (
            trav.switch_count, trav.curve_flips, trav.arrival_flip)
        # cross-checks: flips on the curve must track its cusps, and the
        # opposed boundary folds must contribute the closing discontinuity
        if curve_flips % 2 != cusp_main % 2:
            raise CrossCheckFailure(
                f"curve flips {curve_flips} vs cusp markers {cusp_main}: "
                "parities differ")
        if arrival != 1:
            raise CrossCheckFailure(
                "no closing discontinuity at the first fold despite opposed "
                "boundary folds")

    parity = "odd" if cusp_total % 2 == 1 else "even"
    satisfied = fh_found or parity == "odd"
    resolution["elapsed_s"] = time.perf_counter() - t_start

    return ParityVerdict(
        fh_found=fh_found, fh_locations=fh_locations,
        boundary_curves_of_MS=member_meta,
        cusp_count_total=cusp_total, cusp_count_main=cusp_main,
        parity=parity, switch_count=switch_total, curve_flips=curve_flips,
        arrival_flip=arrival, theorem_satisfied=satisfied, sz_valid=True,
        resolution=resolution, curves=curves, sz=sz, membership=membership,
    )
