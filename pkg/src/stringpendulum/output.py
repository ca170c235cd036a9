"""Deterministic file output: time series CSV, geometry snapshots, run summary.

All numbers are serialized with 17 significant digits so files round-trip the
underlying doubles exactly and two runs of the same config are bitwise
identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import IOFailure
from .params import ModelParams

__all__ = ["TIMESERIES_COLUMNS", "write_outputs", "write_timeseries",
           "write_snapshot", "write_run_summary"]

TIMESERIES_COLUMNS = (
    "t", "s_p", "ds_p_rate", "E", "T", "T_rot", "V_grav", "V_elastic",
    "pi3", "ortho_err", "omega_x", "omega_y", "omega_z", "newton_iters",
    "cum_dissipation", "cum_control_work",
)


def _g17(x):
    return format(float(x), ".17g")


def write_timeseries(records, path):
    lines = [",".join(TIMESERIES_COLUMNS)]
    for r in records:
        lines.append(",".join([
            _g17(r.t), _g17(r.s_p), _g17(r.s_p_rate), _g17(r.energy),
            _g17(r.kinetic), _g17(r.kinetic_rot), _g17(r.v_gravity),
            _g17(r.v_elastic), _g17(r.pi3), _g17(r.ortho_err),
            _g17(r.omega[0]), _g17(r.omega[1]), _g17(r.omega[2]),
            str(int(r.newton_iters)), _g17(r.cum_dissipation),
            _g17(r.cum_control_work),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_snapshot(snap, params: ModelParams, path):
    """One CSV per snapshot: node rows (index, x, y, z, strain of the element
    ending at the node; empty for node 1) and a final body-pose row (the
    attitude matrix flattened row-major followed by the center of mass)."""
    l = (params.string.total_length - snap.s_p) / params.disc.n_elements
    nodes = snap.nodes
    norms = np.linalg.norm(nodes[1:] - nodes[:-1], axis=1)
    strains = norms / l - 1.0
    lines = ["index,x,y,z,strain"]
    for i, node in enumerate(nodes):
        strain = "" if i == 0 else _g17(strains[i - 1])
        lines.append(f"{i + 1},{_g17(node[0])},{_g17(node[1])},"
                     f"{_g17(node[2])},{strain}")
    com = nodes[-1] + snap.attitude @ params.body.rho_c
    pose = [_g17(v) for v in snap.attitude.ravel()] + [_g17(v) for v in com]
    lines.append("body," + ",".join(pose))
    Path(path).write_text("\n".join(lines) + "\n")


def write_run_summary(result, cfg, wall_time, path):
    records = result.records
    mean_rate = (float(np.mean([r.s_p_rate for r in records]))
                 if records else 0.0)
    summary = {
        "status": result.status,
        "steps_completed": result.steps_completed,
        "wall_time_s": wall_time,
        "final_s_p": result.final_config.s_p,
        "mean_s_p_rate": mean_rate,
        "max_ortho_err": result.max_ortho_err,
        "newton": {
            "total_iterations": result.newton_total_iters,
            "max_iterations_per_step": result.newton_max_iters,
        },
        "time_step": cfg.model.disc.time_step,
        "n_elements": cfg.model.disc.n_elements,
        "fixed_length": cfg.run.fixed_length,
    }
    if result.error is not None:
        summary["failure_step"] = result.steps_completed + 1
        summary["error"] = str(result.error)
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def write_outputs(result, cfg, out_dir, wall_time):
    """Write timeseries.csv, snapshots/snap_<k>.csv and run.json under out_dir."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_timeseries(result.records, out / "timeseries.csv")
        if result.snapshots:
            snap_dir = out / "snapshots"
            snap_dir.mkdir(exist_ok=True)
            h = cfg.model.disc.time_step
            for snap in result.snapshots:
                k = int(round(snap.t / h))
                write_snapshot(snap, cfg.model, snap_dir / f"snap_{k}.csv")
        write_run_summary(result, cfg, wall_time, out / "run.json")
    except OSError as exc:
        raise IOFailure(f"failed writing outputs to {out}: {exc}") from exc
    return out
