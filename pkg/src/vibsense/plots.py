"""Figure rendering for the report stages.

Every CLI stage that emits delimited output can also render a matching
figure next to it. All functions save to file and return the path; the
Agg backend keeps this headless-safe.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .signals import SignalSeries


def save_channel_overlay(
    reference: SignalSeries, candidate: SignalSeries, channel: str, path, title=None
):
    """Overlay a reference and an identified channel against time."""
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.plot(reference.t, reference.channel(channel), lw=0.8, label="reference")
    ax.plot(candidate.t, candidate.channel(channel), lw=0.8, ls="--", label="identified")
    ax.set_xlabel("time [s]")
    ax.set_ylabel(channel)
    ax.set_title(title or channel)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_lcurve(points, selected_index: int, path):
    """Residual-norm vs solution-norm sweep with the selected corner marked."""
    rho = np.array([p.residual_norm for p in points])
    eta = np.array([p.solution_norm for p in points])
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.loglog(np.maximum(rho, 1e-300), np.maximum(eta, 1e-300), "o-", ms=3, lw=0.8)
    ax.loglog(
        max(rho[selected_index], 1e-300),
        max(eta[selected_index], 1e-300),
        "r*",
        ms=12,
        label=f"alpha = {points[selected_index].alpha:.3e}",
    )
    ax.set_xlabel("residual norm")
    ax.set_ylabel("solution norm")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_eigenvalue_errors(errors_percent, path):
    """Per-mode reduced-model eigenvalue error on a log scale."""
    errors = np.abs(np.asarray(errors_percent, dtype=float))
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogy(
        np.arange(1, errors.size + 1), np.maximum(errors, 1e-16), "s-", ms=4, lw=0.8
    )
    ax.set_xlabel("mode")
    ax.set_ylabel("eigenvalue error [%]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_step_latency(per_step_seconds, path, budget: float | None = None):
    """Per-step wall time with an optional real-time budget line."""
    times = np.asarray(per_step_seconds, dtype=float)
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.plot(np.arange(times.size), 1e3 * times, lw=0.5)
    if budget is not None:
        ax.axhline(1e3 * budget, color="r", ls="--", lw=1, label="budget")
        ax.legend(fontsize=8)
    ax.set_xlabel("step")
    ax.set_ylabel("latency [ms]")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
