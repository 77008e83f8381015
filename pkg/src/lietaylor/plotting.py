"""Optional PNG figures for a run, rendered off-screen with the Agg backend."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def render_run(csv_path, traj, report) -> list[Path]:
    try:
        import matplotlib
    except ImportError:
        raise RuntimeError("--figures needs matplotlib: pip install 'artifact[figures]'") from None

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    t = traj.times
    y = traj.states
    paths = []

    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
    for k, name in enumerate(("w1", "w2", "w3")):
        axes[0].plot(t, y[:, k], label=name, lw=0.8)
    for k, name in enumerate(("i1", "i2", "i3")):
        axes[1].plot(t, y[:, 3 + k], label=name, lw=0.8)
    for ax in axes:
        if report.parameter_zero is not None:
            ax.axvline(report.parameter_zero, color="grey", ls="--", lw=0.7)
        ax.legend(loc="upper left", fontsize="small")
    axes[0].set_ylabel("vorticity")
    axes[1].set_ylabel("current")
    axes[1].set_xlabel("t")
    fig.suptitle(report.scenario)
    p = csv_path.with_name(f"{csv_path.stem}_state.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    r = np.array([pr[0] for pr in traj.params])
    fig, ax = plt.subplots(figsize=(8, 3))
    for k in range(3):
        ax.plot(t, r[:, k], label=f"r{k + 1}")
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_xlabel("t")
    ax.legend(fontsize="small")
    p = csv_path.with_name(f"{csv_path.stem}_ratios.png")
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)
    return paths
