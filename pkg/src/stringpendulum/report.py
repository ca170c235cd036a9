"""Post-hoc figures rendered from a completed run directory.

Reads ``timeseries.csv`` and writes PNG figures next to it.  This is strictly
downstream of the simulator: the run itself only ever emits raw data files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import IOFailure

__all__ = ["render_report"]


def _load_timeseries(run_dir: Path):
    path = run_dir / "timeseries.csv"
    if not path.is_file():
        raise IOFailure(f"no timeseries.csv in {run_dir}")
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.ndim == 0:
        data = data.reshape(1)
    return data


def render_report(run_dir, dpi=120):
    """Render the standard figures for a run; returns the list of files written."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    run_dir = Path(run_dir)
    d = _load_timeseries(run_dir)
    t = d["t"]
    written = []

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.plot(t, d["T"], label="kinetic")
    ax.plot(t, d["V_grav"], label="gravity potential")
    ax.plot(t, d["V_elastic"], label="elastic potential")
    ax.plot(t, d["E"], "k", label="total energy")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("energy [J]")
    ax.legend(loc="best")
    ax.set_title("energy exchange")
    path = run_dir / "energy.png"
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
    balance = d["E"] - d["E"][0] - d["cum_dissipation"] - d["cum_control_work"]
    axes[0].plot(t, balance)
    axes[0].set_ylabel("energy balance defect [J]")
    axes[1].plot(t, d["pi3"] - d["pi3"][0])
    axes[1].set_ylabel("vertical ang. mom. drift")
    axes[2].semilogy(t, np.maximum(d["ortho_err"], 1e-18))
    axes[2].set_ylabel("attitude orthogonality error")
    axes[2].set_xlabel("t [s]")
    fig.suptitle("conservation diagnostics")
    path = run_dir / "conservation.png"
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(t, d["s_p"])
    axes[0].set_ylabel("reel coordinate s_p [m]")
    axes[1].plot(t, d["ds_p_rate"])
    axes[1].set_ylabel("s_p rate [m/s]")
    axes[1].set_xlabel("t [s]")
    fig.suptitle("reel motion")
    path = run_dir / "reel.png"
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
    for i, comp in enumerate(("omega_x", "omega_y", "omega_z")):
        axes[i].plot(t, d[comp])
        axes[i].set_ylabel(comp + " [rad/s]")
    axes[2].set_xlabel("t [s]")
    fig.suptitle("body angular velocity")
    path = run_dir / "angular_velocity.png"
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    written.append(path)

    return written
