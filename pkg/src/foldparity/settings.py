"""Run settings: every gate, step bound and resolution used by the pipeline.

All length-like quantities marked "diag-scaled" are fractions of the
parameter-box diagonal, so the same defaults behave sensibly on boxes of any
size.  A fixed default seed makes the multi-start stages reproducible.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    # finite differences
    fd_step: float = 1e-5

    # newton kernels
    newton_tol: float = 1e-10
    newton_maxit: int = 50
    max_halvings: int = 20

    # null-pair / eigen gates
    null_gate: float = 1e-6
    bt_gate: float = 1e-4
    hyp_gate: float = 1e-8
    gap_min: float = 5.0

    # branch / fold event gates
    fold_gate: float = 1e-4        # trigger for event refinement on branches
    accept_tol: float = 1e-10      # refined acceptance residual

    # pseudo-arclength stepping (diag-scaled)
    h_min: float = 1e-5
    h_max: float = 0.05
    h_grow: float = 1.4
    h_shrink: float = 0.45
    angle_max: float = 0.015       # max secant turn per step, radians
    corrector_maxit: int = 10
    closure_tol: float = 0.05      # diag-scaled closure distance
    min_circle_points: int = 10

    # codim-2 gates
    cusp_trigger: float = 1e-4
    cusp_gate: float = 1e-8
    hopf_gate: float = 1e-3

    # fold-curve enumeration
    grid_g: int = 40
    restarts: int = 8
    seed: int = 12345
    seed_gate: float = 0.35        # |lambda_min| trigger for fold refinement
    start_radius: float = 3.0      # multi-start state ball radius
    dedup_tol: float = 1e-3        # box-scaled Hausdorff gate between curves
    on_curve_tol: float = 1e-6     # box-scaled "seed already on a curve" gate

    # transport / lifts
    transport_gate: float = 0.9
    state_cap_factor: float = 10.0
    lift_step: float = 0.01        # diag-scaled base sub-step for lifts

    # saddle-component membership
    member_grid: int = 60
    member_starts: int = 10
    member_adjacency: float = 2.5  # multiples of the member grid spacing
    probe_offset: float = 1e-2     # diag-scaled parameter offset for sheet probes

    # boundary scan
    edge_samples: int = 41

    # closed-form oracle
    oracle_sweep: int = 200001

    # report storage
    decimate_max: int = 5000

    def with_overrides(self, **kwargs) -> "Settings":
        unknown = set(kwargs) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown settings: {sorted(unknown)}")
        return dataclasses.replace(self, **kwargs)

    def asdict(self) -> dict:
        return dataclasses.asdict(self)


def load_settings(path, base: Settings | None = None) -> Settings:
    """Read a flat JSON object of overrides on top of ``base`` (or defaults)."""
    base = base if base is not None else Settings()
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("settings file must contain a JSON object")
    return base.with_overrides(**raw)


DEFAULT = Settings()
