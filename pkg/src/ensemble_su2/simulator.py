"""Ensemble propagation of ``i dX/dt = omega (u sx + v sy) X``, ``X(0) = I``.

Each step applies the exact exponential of the generator sampled at the
step midpoint. Steps never straddle a segment join. States are carried as
unit quaternions ``(a, b, c, d) <-> a I - i(b sx + c sy + d sz)``.

Per-omega work depends only on that omega, so results are bit-identical
whatever the grid order or worker count.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .profile import eval_f
from .schedule import ControlSchedule
from .su2 import PauliVector, Unitary2, frobenius_distance, pauli_exp, trace_fidelity

__all__ = [
    "SimConfig",
    "Trajectory",
    "EnsembleResult",
    "StepPlan",
    "default_dt_max",
    "plan_steps",
    "propagate",
    "propagate_piecewise",
    "propagate_plan",
    "propagate_sequence",
    "ensemble_propagate",
    "frame_transform",
    "square_integral",
    "reference_r",
    "populations",
    "target_unitary",
    "worker_count",
    "write_result_csv",
    "CSV_COLUMNS",
    "qmul",
]

CSV_COLUMNS = (
    "omega", "t",
    "re00", "im00", "re01", "im01", "re10", "im10", "re11", "im11",
    "P", "P_ref", "frob_err_to_target",
)
THREADS_ENV = "ENSEMBLE_SU2_THREADS"


@dataclass(frozen=True)
class SimConfig:
    omega_grid: tuple[float, ...]
    dt_max: float | None = None
    record_stride: int = 10

    def __post_init__(self):
        grid = tuple(float(w) for w in np.atleast_1d(self.omega_grid))
        object.__setattr__(self, "omega_grid", grid)
        if not grid or any(not (w > 0 and math.isfinite(w)) for w in grid):
            raise ValueError("omega_grid must be non-empty with positive finite entries")
        if self.dt_max is not None and not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if int(self.record_stride) < 1:
            raise ValueError("record_stride must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    omega: float
    times: np.ndarray
    quats: np.ndarray = field(repr=False)

    @property
    def states(self) -> list[Unitary2]:
        return [Unitary2.from_quaternion(*q) for q in self.quats.tolist()]

    @property
    def final(self) -> Unitary2:
        return Unitary2.from_quaternion(*self.quats[-1].tolist())

    def matrices(self) -> np.ndarray:
        a, b, c, d = self.quats.T
        out = np.empty((len(a), 2, 2), dtype=complex)
        out[:, 0, 0] = a - 1j * d
        out[:, 0, 1] = -c - 1j * b
        out[:, 1, 0] = c - 1j * b
        out[:, 1, 1] = a + 1j * d
        return out

    def unitarity_errors(self) -> np.ndarray:
        m = self.matrices()
        gram = np.einsum("kji,kjl->kil", m.conj(), m) - np.eye(2)
        return np.linalg.norm(gram, axis=(1, 2))


@dataclass
class EnsembleResult:
    schedule: ControlSchedule
    trajectories: list[Trajectory]
    frames: list[Trajectory]
    P: list[np.ndarray]
    P_ref: list[np.ndarray]
    frob_errors: np.ndarray
    infidelities: np.ndarray

    @property
    def omegas(self) -> np.ndarray:
        return np.array([tr.omega for tr in self.trajectories])

    @property
    def max_unitarity_error(self) -> float:
        return max(float(tr.unitarity_errors().max()) for tr in self.trajectories)


# -- quaternion kernels ------------------------------------------------------


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Batched product ``p * q`` along the last axis."""
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


def _step_quats(ax: np.ndarray, ay: np.ndarray, az: np.ndarray) -> np.ndarray:
    r = np.sqrt(ax * ax + ay * ay + az * az)
    safe = np.where(r > 0, r, 1.0)
    s = np.where(r > 0, np.sin(r) / safe, 1.0)
    return np.stack([np.cos(r), s * ax, s * ay, s * az], axis=-1)


def _accumulate(steps: np.ndarray, stride: int) -> np.ndarray:
    """States after every ``stride``-th step and after the last one.

    Row 0 is the identity. Products within a block are formed by pairwise
    reduction (later factors on the left), then blocks are chained.
    """
    n = len(steps)
    stride = max(1, min(int(stride), n))
    nb = -(-n // stride)
    pad = nb * stride - n
    if pad:
        steps = np.concatenate([steps, np.tile([1.0, 0.0, 0.0, 0.0], (pad, 1))])
    blocks = steps.reshape(nb, stride, 4)
    while blocks.shape[1] > 1:
        if blocks.shape[1] % 2:
            ident = np.zeros((nb, 1, 4))
            ident[..., 0] = 1.0
            blocks = np.concatenate([blocks, ident], axis=1)
        blocks = qmul(blocks[:, 1::2], blocks[:, 0::2])
    blocks = blocks[:, 0].tolist()
    out = np.empty((nb + 1, 4))
    a, b, c, d = 1.0, 0.0, 0.0, 0.0
    out[0] = (a, b, c, d)
    for k, (p0, p1, p2, p3) in enumerate(blocks, start=1):
        a, b, c, d = (
            p0 * a - p1 * b - p2 * c - p3 * d,
            p0 * b + p1 * a + p2 * d - p3 * c,
            p0 * c - p1 * d + p2 * a + p3 * b,
            p0 * d + p1 * c - p2 * b + p3 * a,
        )
        out[k] = (a, b, c, d)
    return out


# -- step planning -----------------------------------------------------------


@dataclass(frozen=True)
class StepPlan:
    """Per-step width, midpoint controls and end time, shared across omega."""

    h: np.ndarray
    u: np.ndarray
    v: np.ndarray
    t_end: np.ndarray

    def __len__(self) -> int:
        return len(self.h)


def default_dt_max(sched: ControlSchedule) -> float:
    shortest = min(s.duration for s in sched.segments)
    return min(0.01, 1.0 / (100.0 * sched.profile.support[1]), shortest / 4.0)


Piece = tuple[float, float, Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]]


def _plan_pieces(pieces: Sequence[Piece], dt_max: float) -> StepPlan:
    hs, us, vs, ends = [], [], [], []
    for t0, t1, fn in pieces:
        n = max(1, int(math.ceil((t1 - t0) / dt_max - 1e-9)))
        h = (t1 - t0) / n
        k = np.arange(n)
        mid = t0 + (k + 0.5) * h
        u, v = fn(mid)
        end = t0 + (k + 1) * h
        end[-1] = t1
        hs.append(np.full(n, h))
        us.append(np.broadcast_to(np.asarray(u, dtype=float), (n,)))
        vs.append(np.broadcast_to(np.asarray(v, dtype=float), (n,)))
        ends.append(end)
    return StepPlan(np.concatenate(hs), np.concatenate(us), np.concatenate(vs), np.concatenate(ends))


def plan_steps(sched: ControlSchedule, dt_max: float | None = None) -> StepPlan:
    dt = default_dt_max(sched) if dt_max is None else float(dt_max)
    pieces = [(s.t0, s.t1, (lambda t, s=s: sched.controls_on(s, t))) for s in sched.segments]
    return _plan_pieces(pieces, dt)


def propagate_plan(plan: StepPlan, omega: float, record_stride: int = 1, t_start: float = 0.0) -> Trajectory:
    omega = float(omega)
    steps = _step_quats(plan.h * omega * plan.u, plan.h * omega * plan.v, np.zeros(len(plan)))
    stride = max(1, min(int(record_stride), len(plan)))
    quats = _accumulate(steps, stride)
    idx = np.arange(stride - 1, len(plan), stride)
    if len(idx) == 0 or idx[-1] != len(plan) - 1:
        idx = np.append(idx, len(plan) - 1)
    times = np.concatenate([[t_start], plan.t_end[idx]])
    return Trajectory(omega, times, quats)


def propagate_piecewise(
    pieces: Sequence[Piece], omega: float, dt_max: float, record_stride: int = 1
) -> Trajectory:
    """Propagate under arbitrary controls given as ``(t0, t1, fn)`` pieces.

    ``fn`` maps an array of times to ``(u, v)`` arrays.
    """
    return propagate_plan(_plan_pieces(pieces, dt_max), omega, record_stride, pieces[0][0])


def propagate_sequence(
    scheds: Sequence[ControlSchedule], omega: float, dt_max: float | None = None, record_stride: int = 1
) -> Trajectory:
    """Run schedules back to back in one propagation; clocks are chained."""
    parts, offset = [], 0.0
    for sched in scheds:
        plan = plan_steps(sched, dt_max)
        parts.append(StepPlan(plan.h, plan.u, plan.v, plan.t_end + offset))
        offset += sched.total_duration
    plan = StepPlan(*(np.concatenate([getattr(p, k) for p in parts]) for k in ("h", "u", "v", "t_end")))
    return propagate_plan(plan, omega, record_stride)


def propagate(sched: ControlSchedule, omega: float, cfg: SimConfig) -> Trajectory:
    if not omega > 0:
        raise ValueError("omega must be positive")
    return propagate_plan(plan_steps(sched, cfg.dt_max), omega, cfg.record_stride)


# -- frames, references, populations ----------------------------------------


def square_integral(sched: ControlSchedule, t) -> np.ndarray:
    """Closed-form ``int_0^t`` of the +-1 channel (u for y, v for x)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for s in sched.segments:
        out += s.u * np.clip(t - s.t0, 0.0, s.duration)
    return out


def frame_transform(traj: Trajectory, sched: ControlSchedule) -> Trajectory:
    """``Xhat = exp(i omega S(t) sigma) X`` with S the square-channel integral.

    sigma is sigma_x for a y-target schedule and sigma_y for an x-target one.
    """
    theta = -traj.omega * square_integral(sched, traj.times)
    zero = np.zeros_like(theta)
    if sched.axis == "y":
        rot = _step_quats(theta, zero, zero)
    else:
        rot = _step_quats(zero, theta, zero)
    return Trajectory(traj.omega, traj.times, qmul(rot, traj.quats))


def reference_r(sched: ControlSchedule, t):
    """Staircase ``m / (2N)`` with ``m = floor(t eps1 / 2)``, clamped to [0, 1]."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(arr > sched.total_duration * (1 + 1e-12)):
        raise ValueError("time out of schedule")
    m = np.floor(arr * sched.eps1 / 2.0)
    r = np.clip(m / (2 * sched.N), 0.0, 1.0)
    r = np.where(arr >= sched.total_duration, 1.0, r)
    return r if r.ndim else float(r)


def target_unitary(angle: float, axis: str) -> Unitary2:
    if axis == "x":
        return pauli_exp(PauliVector(angle, 0.0, 0.0))
    return pauli_exp(PauliVector(0.0, angle, 0.0))


def populations(traj_hat: Trajectory, sched: ControlSchedule, omega: float):
    """(P, P_ref) along the recorded times of a frame-transformed trajectory."""
    a, b, c, d = traj_hat.quats.T
    # |<e2, Xhat e1>|^2 with Xhat[1, 0] = c - i b
    P = np.clip(b * b + c * c, 0.0, 1.0)
    f = eval_f(sched.profile, omega)
    P_ref = np.sin(reference_r(sched, traj_hat.times) * f) ** 2
    return P, P_ref


# -- ensemble ----------------------------------------------------------------


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        requested = int(os.environ.get(THREADS_ENV, "0") or 0)
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def ensemble_propagate(sched: ControlSchedule, cfg: SimConfig, workers: int | None = None) -> EnsembleResult:
    plan = plan_steps(sched, cfg.dt_max)
    n = worker_count(workers)

    def one(w):
        return propagate_plan(plan, w, cfg.record_stride)

    if n == 1 or len(cfg.omega_grid) == 1:
        trajs = [one(w) for w in cfg.omega_grid]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            trajs = list(pool.map(one, cfg.omega_grid))
    frames, Ps, Prefs, frob, infid = [], [], [], [], []
    for tr in trajs:
        hat = frame_transform(tr, sched)
        P, P_ref = populations(hat, sched, tr.omega)
        target = target_unitary(eval_f(sched.profile, tr.omega), sched.axis)
        frames.append(hat)
        Ps.append(P)
        Prefs.append(P_ref)
        frob.append(frobenius_distance(tr.final, target))
        infid.append(1.0 - trace_fidelity(tr.final, target))
    return EnsembleResult(sched, trajs, frames, Ps, Prefs, np.array(frob), np.array(infid))


def write_result_csv(result: EnsembleResult, path) -> None:
    """One row per (omega, recorded time); floats with 17 significant digits."""
    sched = result.schedule
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for tr, P, P_ref in zip(result.trajectories, result.P, result.P_ref):
            target = target_unitary(eval_f(sched.profile, tr.omega), sched.axis).matrix
            mats = tr.matrices()
            errs = np.linalg.norm(mats - target, axis=(1, 2))
            for t, m, p, pr, e in zip(tr.times, mats, P, P_ref, errs):
                row = [tr.omega, t]
                for z in (m[0, 0], m[0, 1], m[1, 0], m[1, 1]):
                    row += [z.real, z.imag]
                row += [p, pr, e]
                out.writerow([f"{x:.17g}" for x in row])
