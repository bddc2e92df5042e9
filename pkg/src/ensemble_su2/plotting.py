"""Static SVG figures for simulation and sweep reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .profile import TargetProfile, bump_phi, eval_f  # noqa: E402
from .simulator import EnsembleResult, target_unitary  # noqa: E402

__all__ = [
    "save_figure",
    "plot_populations",
    "plot_convergence",
    "plot_final_errors",
    "plot_sweep",
    "plot_bump",
]

# fixed ids and no timestamp, so identical data gives identical files
_RC = {
    "svg.hashsalt": "ensemble-su2",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
}


def save_figure(fig, path) -> None:
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)


def _figure(width=6.4, height=3.6):
    with matplotlib.rc_context(_RC):
        return plt.subplots(figsize=(width, height))


def plot_populations(result: EnsembleResult, path) -> None:
    """P (solid) and P_ref (dashed) against time, one colour per omega."""
    fig, ax = _figure()
    colors = plt.cm.viridis(np.linspace(0.0, 0.85, len(result.trajectories)))
    for tr, P, P_ref, col in zip(result.frames, result.P, result.P_ref, colors):
        ax.plot(tr.times, P, color=col, lw=1.0, label=f"P, ω={tr.omega:g}")
        ax.plot(tr.times, P_ref, color=col, lw=1.0, ls="--", label=f"P_ref, ω={tr.omega:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("population of e2")
    ax.set_ylim(-0.02, 1.02)
    if len(result.trajectories) <= 6:
        ax.legend(loc="best", ncol=2)
    save_figure(fig, path)


def plot_convergence(result: EnsembleResult, path) -> None:
    """Frobenius distance of the frame-transformed state to its final target."""
    sched = result.schedule
    fig, ax = _figure()
    for tr in result.frames:
        target = target_unitary(eval_f(sched.profile, tr.omega), sched.axis).matrix
        err = np.linalg.norm(tr.matrices() - target, axis=(1, 2))
        ax.plot(tr.times, err, lw=1.0, label=f"ω={tr.omega:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("‖X̂(t) − target‖_F")
    if len(result.frames) <= 8:
        ax.legend(loc="best")
    save_figure(fig, path)


def plot_final_errors(result: EnsembleResult, path) -> None:
    fig, ax = _figure()
    order = np.argsort(result.omegas)
    w = result.omegas[order]
    ax.semilogy(w, np.maximum(result.infidelities[order], 1e-17), "o-", ms=3, label="1 − trace fidelity")
    ax.semilogy(w, np.maximum(result.frob_errors[order], 1e-17), "s-", ms=3, label="Frobenius error")
    ax.set_xlabel("ω")
    ax.set_ylabel("final error")
    ax.legend(loc="best")
    save_figure(fig, path)


def plot_sweep(report, path) -> None:
    """Max-over-omega error against N on log axes, one line per eps1."""
    fig, ax = _figure()
    for eps1 in sorted({r.eps1 for r in report.rows}):
        rows = sorted((r for r in report.rows if r.eps1 == eps1), key=lambda r: r.N)
        ax.loglog([r.N for r in rows], [max(r.max_frob_err, 1e-17) for r in rows], "o-", label=f"ε1={eps1:g}")
    ax.set_xlabel("N")
    ax.set_ylabel("max over ω of Frobenius error")
    ax.legend(loc="best")
    save_figure(fig, path)


def plot_bump(profile: TargetProfile, path, n: int = 801) -> None:
    a, d = profile.support
    pad = 0.1 * (d - a)
    w = np.linspace(a - pad, d + pad, n)
    fig, ax = _figure()
    ax.plot(w, bump_phi(w, profile.bump), label="Φ")
    ax.plot(w, eval_f(profile, w), label="f")
    ax.set_xlabel("ω")
    ax.legend(loc="best")
    save_figure(fig, path)
