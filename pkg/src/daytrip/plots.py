"""Figure rendering for experiment reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentResult

_ARM_COLORS = {"assisted": "tab:blue", "unassisted": "tab:orange"}


def plot_utility_curves(result: ExperimentResult, path) -> None:
    """Mean true utility per iteration for each arm, shaded by twice the
    standard error, written to an image file next to the CSV report."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    x = np.arange(1, result.config.n_iterations + 1)
    for arm in result.arms:
        u = result.utilities[arm]
        mean = u.mean(axis=0)
        se = u.std(axis=0, ddof=1) / np.sqrt(u.shape[0]) if u.shape[0] >= 2 else np.zeros_like(mean)
        color = _ARM_COLORS.get(arm)
        ax.plot(x, mean, label=arm, color=color)
        ax.fill_between(x, mean - 2 * se, mean + 2 * se, alpha=0.25, color=color, linewidth=0)
    ax.set_xlabel("design iteration")
    ax.set_ylabel("mean true utility (empty trip = 0)")
    ax.set_title(
        f"{result.config.n_runs} runs, {result.config.n_pois} POIs, "
        f"{result.config.trip.duration_budget_h:g} h budget"
    )
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
