"""Run reports: a versioned, diff-able JSON document for a full pipeline run.

Floats are serialised by ``repr`` (shortest round-trip), so export/import is
lossless.  Field ordering is stabilised by sorted keys; curves longer than
the decimation cap are thinned by arclength with codimension-2 markers kept
at full precision in their own section.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ReportParseError, SchemaMismatch
from .settings import Settings

SCHEMA = "foldparity-report/1"


@dataclass
class RunReport:
    data: dict

    def __eq__(self, other):
        return isinstance(other, RunReport) and self.data == other.data

    @property
    def schema(self) -> str:
        return self.data.get("schema", "")


def _decimate(points: list, cap: int) -> list:
    if len(points) <= cap:
        return points
    pts = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], cap)
    idx = np.unique(np.searchsorted(cum, targets))
    idx[-1] = len(points) - 1
    return [points[i] for i in idx]


def _fold_point_dict(fp) -> dict:
    return {
        "x": np.atleast_1d(fp.x).tolist(),
        "theta": np.asarray(fp.theta).tolist(),
        "a_coeff": fp.a_coeff,
        "orientation": fp.orientation,
        "bt_flag": bool(fp.nullpair.bt_flag),
        "pq": fp.nullpair.pq,
    }


def _codim2_dict(c2, ident) -> dict:
    return {
        "id": ident,
        "kind": c2.kind,
        "x": np.atleast_1d(c2.x).tolist(),
        "theta": np.asarray(c2.theta).tolist(),
        "residuals": {k: (None if v is None else float(v))
                      for k, v in c2.residuals.items()},
        "frame": None if c2.frame is None else np.asarray(c2.frame).tolist(),
    }


def build_report(family, settings: Settings, verdict=None, sz=None,
                 curves=None, timings=None) -> RunReport:
    """Assemble the report document from pipeline objects."""
    if verdict is not None:
        sz = verdict.sz if sz is None else sz
        curves = verdict.curves if curves is None else curves
    curves = curves or []

    codim2 = []
    curve_blocks = []
    member_ids = set()
    if verdict is not None:
        member_ids = {m["curve_id"] for m in verdict.boundary_curves_of_MS}
    for rec in curves:
        marker_ids = []
        for c2 in rec.codim2_points:
            ident = f"c{rec.curve_id}m{len(codim2)}"
            codim2.append(_codim2_dict(c2, ident))
            marker_ids.append(ident)
        pts = [np.concatenate([np.atleast_1d(fp.x),
                               np.asarray(fp.theta)]).tolist()
               for fp in rec.points]
        curve_blocks.append({
            "id": rec.curve_id,
            "closed": bool(rec.closed),
            "endpoints": list(rec.endpoints),
            "arclength": float(rec.arclength),
            "n_points": len(rec.points),
            "member": rec.curve_id in member_ids,
            "markers": marker_ids,
            "points": _decimate(pts, Settings().decimate_max
                                if settings is None else settings.decimate_max),
        })

    sz_block = None
    if sz is not None:
        sz_block = {
            "edge": sz.edge,
            "valid": True,
            "opposed": bool(sz.opposed),
            "opposed_method": sz.opposed_method,
            "other_edges_clean": bool(sz.other_edges_clean),
            "folds": [_fold_point_dict(fp) for fp in sz.folds],
            "fold_s": [float(s) for s in sz.fold_s],
            "arcs": [{
                "stability": arc.stability,
                "points": _decimate(
                    [np.concatenate([[bp.path_s], np.atleast_1d(bp.x)]).tolist()
                     for bp in arc.points], 400),
            } for arc in sz.arcs],
            "edge_events": sz.edge_events,
        }

    verdict_block = None
    if verdict is not None:
        verdict_block = {
            "fh_found": bool(verdict.fh_found),
            "fh_locations": verdict.fh_locations,
            "boundary_curves_of_MS": verdict.boundary_curves_of_MS,
            "cusp_count_total": verdict.cusp_count_total,
            "cusp_count_main": verdict.cusp_count_main,
            "parity": verdict.parity,
            "switch_count": verdict.switch_count,
            "curve_flips": verdict.curve_flips,
            "arrival_flip": verdict.arrival_flip,
            "theorem_satisfied": bool(verdict.theorem_satisfied),
            "sz_valid": bool(verdict.sz_valid),
            "resolution": verdict.resolution,
        }

    data = {
        "schema": SCHEMA,
        "family": {
            "name": family.name,
            "dim": family.dim,
            "kind": family.kind,
            "box": {"lo": list(family.box.lo), "hi": list(family.box.hi),
                    "sz_edge": family.box.sz_edge},
        },
        "settings": settings.asdict() if settings is not None else None,
        "sz": sz_block,
        "curves": curve_blocks,
        "codim2": codim2,
        "verdict": verdict_block,
        "meta": {"timings": timings or {}},
    }
    return RunReport(data=data)


def dumps_report(report: RunReport) -> str:
    return json.dumps(report.data, sort_keys=True, indent=1)


def export_report(report: RunReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_report(report))
        fh.write("\n")


def loads_report(text: str) -> RunReport:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportParseError(f"not a report document: {exc}") from exc
    if not isinstance(data, dict) or "schema" not in data:
        raise ReportParseError("missing schema tag")
    if data["schema"] != SCHEMA:
        raise SchemaMismatch(
            f"report schema {data['schema']!r} != supported {SCHEMA!r}")
    return RunReport(data=data)


def import_report(path) -> RunReport:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_report(fh.read())
