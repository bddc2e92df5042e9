"""Error metrics, (eps1, N) sweeps and auxiliary-system harnesses."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fourier import FourierKernel
from .profile import TargetProfile, eval_f, eval_g
from .schedule import ControlSchedule, build_theorem1
from .simulator import (
    SimConfig,
    _accumulate,
    _step_quats,
    default_dt_max,
    ensemble_propagate,
    propagate_piecewise,
    propagate_plan,
    plan_steps,
    target_unitary,
)
from .su2 import (
    PauliVector,
    Unitary2,
    frobenius_distance,
    multiply,
    pauli_exp,
    trace_fidelity,
)

__all__ = [
    "AuxiliaryConfig",
    "SweepRow",
    "SweepReport",
    "Lemma4Report",
    "target_error",
    "empirical_order",
    "default_omega_grid",
    "auxiliary_propagate",
    "lemma4_scaling_test",
    "lemma5_frame_check",
    "theorem1_sweep",
    "write_sweep_csv",
    "block_product_check",
    "SWEEP_COLUMNS",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
SWEEP_COLUMNS = ("eps1", "N", "max_frob_err", "max_infidelity", "runtime_s")


def target_error(final: Unitary2, profile: TargetProfile, omega: float, axis: str) -> tuple[float, float]:
    """(Frobenius distance, 1 - trace fidelity) to ``exp(-i f(omega) sigma_axis)``."""
    target = target_unitary(eval_f(profile, omega), axis)
    return frobenius_distance(final, target), 1.0 - trace_fidelity(final, target)


def empirical_order(params, errors) -> float:
    """Least-squares slope of log(error) against log(param); needs >= 3 points."""
    x = np.asarray(params, dtype=float)
    y = np.asarray(errors, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise ValueError("order fit needs at least three (param, error) pairs")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("order fit needs positive params and errors")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def default_omega_grid(profile: TargetProfile, n: int = 33) -> tuple[float, ...]:
    """Chebyshev points inside the support plus 0.5, 0.7, 0.9 when covered."""
    v0, v1 = profile.support
    margin = (v1 - v0) / 20.0
    lo, hi = v0 + margin, v1 - margin
    k = np.arange(n)
    cheb = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (2 * k + 1) / (2 * n))
    extra = [w for w in (0.5, 0.7, 0.9) if v0 < w < v1]
    return tuple(sorted(set(np.round(np.concatenate([cheb, extra]), 15).tolist())))


# -- auxiliary system --------------------------------------------------------


@dataclass(frozen=True)
class AuxiliaryConfig:
    eps1: float
    eps2: float
    nu: int = 1

    def __post_init__(self):
        if not self.eps1 > 0 or self.eps2 < 0:
            raise ValueError("need eps1 > 0 and eps2 >= 0")
        if self.nu not in (-1, 1):
            raise ValueError("nu must be +1 or -1")


def auxiliary_propagate(
    cfg: AuxiliaryConfig,
    profile: TargetProfile,
    omega: float,
    dt: float,
    z_sign: int = 1,
    kernel: FourierKernel | None = None,
) -> Unitary2:
    """Final state at ``t = 1/eps1`` of the interaction-frame system.

    Hamiltonian ``omega v(t) (z_sign sin(2 omega t) sz + cos(2 omega t) sy)``
    with ``v = eps2 ghat(t) / sqrt(2 pi)``, started from I at ``-1/eps1``.
    ``z_sign = +1`` is the standard form; ``-1`` flips the sz coefficient.
    """
    v0, v1 = profile.support
    if not (v0 <= abs(omega) <= v1):
        raise ValueError(f"|omega|={abs(omega)} outside [{v0}, {v1}]")
    if cfg.eps2 == 0.0:
        return Unitary2.identity()
    kernel = kernel or FourierKernel(profile)
    T = 1.0 / cfg.eps1
    n = max(1, int(math.ceil(2.0 * T / dt - 1e-9)))
    h = 2.0 * T / n
    mid = -T + (np.arange(n) + 0.5) * h
    amp = h * omega * cfg.eps2 * _INV_SQRT_2PI * kernel.ghat_many(mid)
    steps = _step_quats(
        np.zeros(n), amp * np.cos(2.0 * omega * mid), z_sign * amp * np.sin(2.0 * omega * mid)
    )
    return Unitary2.from_quaternion(*_accumulate(steps, n)[-1].tolist())


@dataclass
class Lemma4Report:
    eps1: float
    rows: list[tuple[float, float, float]]  # (eps2, omega, error)
    orders: dict[float, float]
    threshold: float = 1.9

    @property
    def min_order(self) -> float:
        return min(self.orders.values())

    @property
    def passed(self) -> bool:
        return self.min_order >= self.threshold

    def as_dict(self) -> dict:
        return {
            "eps1": self.eps1,
            "rows": [{"eps2": e, "omega": w, "error": err} for e, w, err in self.rows],
            "orders": {str(w): o for w, o in self.orders.items()},
            "min_order": self.min_order,
            "passed": self.passed,
        }


def lemma4_scaling_test(
    profile: TargetProfile,
    eps1: float,
    eps2_list: Sequence[float],
    omega_grid: Sequence[float],
    dt: float = 0.01,
    threshold: float = 1.9,
) -> Lemma4Report:
    """Empirical order in eps2 of ``|Xhat(w, 1/eps1) - exp(-i eps2 w g(2w) sy)|``.

    The order is fitted per omega over the nonzero eps2 values; the report
    passes when every fitted order reaches ``threshold``.
    """
    eps2_list = [float(e) for e in eps2_list]
    if any(b >= a for a, b in zip(eps2_list, eps2_list[1:])):
        raise ValueError("eps2_list must be strictly decreasing")
    kernel = FourierKernel(profile)
    rows, orders = [], {}
    for w in omega_grid:
        errs = []
        for e2 in eps2_list:
            X = auxiliary_propagate(AuxiliaryConfig(eps1, e2), profile, w, dt, kernel=kernel)
            angle = e2 * w * eval_g(profile, 2.0 * w)
            err = frobenius_distance(X, pauli_exp(PauliVector(0.0, angle, 0.0)))
            rows.append((e2, float(w), err))
            errs.append(err)
        pos = [(e, r) for e, r in zip(eps2_list, errs) if e > 0]
        orders[float(w)] = empirical_order([e for e, _ in pos], [r for _, r in pos])
    return Lemma4Report(eps1, rows, orders, threshold)


def lemma5_frame_check(
    profile: TargetProfile,
    eps1: float,
    eps2: float,
    nu: int,
    omega: float,
    dt: float,
    mapping: str = "literal",
    kernel: FourierKernel | None = None,
) -> float:
    """Distance between a lab-frame window and its interaction-frame image.

    Left side: propagate ``u = nu``, ``v = eps2 ghat(t - T)/sqrt(2 pi)`` on
    ``[0, 2T]``. Right side: ``E Xhat E`` with ``E = exp(-i nu omega T sx)``.

    ``mapping="literal"`` takes ``Xhat`` as the auxiliary solution at ``nu
    omega``. ``mapping="consistent"`` takes the auxiliary solution at
    ``omega`` with the sz coefficient sign set to ``-nu``, which is what the
    change of frame ``exp(i nu omega t sx)`` actually produces.
    """
    if nu not in (-1, 1):
        raise ValueError("nu must be +1 or -1")
    if mapping not in ("literal", "consistent"):
        raise ValueError("mapping must be 'literal' or 'consistent'")
    kernel = kernel or FourierKernel(profile)
    T = 1.0 / eps1
    scale = eps2 * _INV_SQRT_2PI

    def controls(t):
        return np.full(t.shape, float(nu)), scale * kernel.ghat_many(t - T)

    lab = propagate_piecewise([(0.0, 2.0 * T, controls)], omega, dt, record_stride=1 << 30).final
    cfg = AuxiliaryConfig(eps1, eps2, nu)
    if mapping == "literal":
        aux = auxiliary_propagate(cfg, profile, nu * omega, dt, kernel=kernel)
    else:
        aux = auxiliary_propagate(cfg, profile, omega, dt, z_sign=-nu, kernel=kernel)
    E = pauli_exp(PauliVector(nu * omega * T, 0.0, 0.0))
    return frobenius_distance(lab, multiply(multiply(E, aux), E))


# -- Theorem 1 sweep ---------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    eps1: float
    N: int
    max_frob_err: float
    max_infidelity: float
    runtime_s: float
    frob_errors: tuple[float, ...] = field(default=(), repr=False, compare=False)


@dataclass
class SweepReport:
    rows: list[SweepRow]
    omega_grid: tuple[float, ...]

    def cell(self, eps1: float, N: int) -> SweepRow:
        for r in self.rows:
            if r.eps1 == eps1 and r.N == N:
                return r
        raise KeyError((eps1, N))

    def n_order(self, eps1: float) -> float:
        """Empirical order of max error in 1/N at fixed eps1."""
        rows = sorted((r for r in self.rows if r.eps1 == eps1), key=lambda r: r.N)
        return empirical_order([1.0 / r.N for r in rows], [r.max_frob_err for r in rows])

    def uniformity_ratio(self, eps1: float, N: int) -> float:
        """max over omega divided by median over omega within one cell."""
        errs = np.asarray(self.cell(eps1, N).frob_errors)
        return float(errs.max() / np.median(errs))


def theorem1_sweep(
    profile: TargetProfile,
    eps1_list: Sequence[float],
    N_list: Sequence[int],
    omega_grid: Sequence[float],
    axis: str = "y",
    dt_max: float | None = None,
    workers: int | None = None,
) -> SweepReport:
    if not eps1_list or not N_list or not len(omega_grid):
        raise ValueError("sweep needs non-empty eps1, N and omega lists")
    grid = tuple(float(w) for w in omega_grid)
    cfg = SimConfig(grid, dt_max=dt_max, record_stride=1 << 30)
    rows = []
    for eps1 in sorted(float(e) for e in eps1_list):
        for N in sorted(int(n) for n in N_list):
            start = time.perf_counter()
            sched = build_theorem1(profile, eps1, N, axis)
            res = ensemble_propagate(sched, cfg, workers)
            rows.append(
                SweepRow(
                    eps1,
                    N,
                    float(res.frob_errors.max()),
                    float(res.infidelities.max()),
                    time.perf_counter() - start,
                    tuple(res.frob_errors.tolist()),
                )
            )
    return SweepReport(rows, grid)


def write_sweep_csv(report: SweepReport, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(SWEEP_COLUMNS)
        for r in report.rows:
            out.writerow(
                [f"{r.eps1:.17g}", r.N, f"{r.max_frob_err:.17g}", f"{r.max_infidelity:.17g}", f"{r.runtime_s:.6f}"]
            )


def block_product_check(sched: ControlSchedule, omega: float, dt_max: float | None = None) -> float:
    """Full-run final state against the block factorization.

    The lead-in segment, one (+1, -1) window pair and the closing segment
    are simulated on their own; their composition
    ``closing * (pair)^N * lead_in`` is compared with the full run.
    """
    dt = default_dt_max(sched) if dt_max is None else float(dt_max)
    full = propagate_plan(plan_steps(sched, dt), omega, 1 << 30).final

    def seg_final(seg):
        piece = (seg.t0, seg.t1, lambda t, s=seg: sched.controls_on(s, t))
        return propagate_piecewise([piece], omega, dt, record_stride=1 << 30).final

    segs = sched.segments
    lead, plus, minus, close = segs[0], segs[1], segs[2], segs[-1]
    pair = multiply(seg_final(minus), seg_final(plus))
    acc = seg_final(lead)
    for _ in range(sched.N):
        acc = multiply(pair, acc)
    acc = multiply(seg_final(close), acc)
    return frobenius_distance(full, acc)
