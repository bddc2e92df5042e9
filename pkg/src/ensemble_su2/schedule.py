"""Piecewise control law steering the ensemble to exp(-i f(omega) sigma).

Layout for ``eps1``, ``N`` (times in units of ``1/eps1``)::

    [0, 1]                 u = -1   v = 0
    [4m+1, 4m+3]           u = +1   v = ghat(t - (4m+2)/eps1) / (2 N sqrt(2 pi))
    [4m+3, 4m+5]           u = -1   v = ghat(t - (4m+4)/eps1) / (2 N sqrt(2 pi))
    [4N+1, 4N+2]           u = +1   v = 0

for m = 0..N-1. Segments always store this y-target layout; a schedule
with ``axis="x"`` swaps the two channels when it is evaluated.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fourier import FourierKernel, gauss_legendre_panels
from .profile import ProfileError, TargetProfile

__all__ = [
    "SCHEMA_VERSION",
    "ScheduleError",
    "ScheduleFormatError",
    "WindowSpec",
    "ControlSegment",
    "ControlSchedule",
    "build_theorem1",
    "eval_controls",
    "euler_compose",
    "serialize",
    "deserialize",
    "integrate_controls",
]

SCHEMA_VERSION = 1
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ScheduleError(ValueError):
    pass


class ScheduleFormatError(ScheduleError):
    """Malformed schedule document; ``location`` is a JSON path."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True)
class WindowSpec:
    """``scale * ghat(t - center)``."""

    center: float
    scale: float


@dataclass(frozen=True)
class ControlSegment:
    t0: float
    t1: float
    u: int
    window: WindowSpec | None = None

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise ScheduleError(f"segment needs t0 < t1, got [{self.t0}, {self.t1}]")
        if self.u not in (-1, 1):
            raise ScheduleError(f"square channel must be +-1, got {self.u}")

    @property
    def duration(self) -> float:
        return self.t1 - self.t0


@dataclass(frozen=True)
class ControlSchedule:
    eps1: float
    N: int
    axis: str
    profile: TargetProfile
    segments: tuple[ControlSegment, ...]

    @property
    def total_duration(self) -> float:
        return self.segments[-1].t1

    @property
    def eps2(self) -> float:
        return 1.0 / (2 * self.N)

    @cached_property
    def kernel(self) -> FourierKernel:
        return FourierKernel(self.profile)

    @cached_property
    def _starts(self) -> list[float]:
        return [s.t0 for s in self.segments]

    def segment_index(self, t: float) -> int:
        if not (0.0 <= t <= self.total_duration):
            raise ScheduleError(f"time out of schedule: t={t}")
        # right-continuous at joins; t = T belongs to the last segment
        return max(0, bisect.bisect_right(self._starts, t) - 1)

    def channels(self, seg: ControlSegment, t) -> tuple[np.ndarray, np.ndarray]:
        """(square, window) channel values of ``seg`` at times ``t``."""
        t = np.asarray(t, dtype=float)
        square = np.full(t.shape, float(seg.u))
        if seg.window is None:
            window = np.zeros(t.shape)
        else:
            window = seg.window.scale * self.kernel.ghat_many(t - seg.window.center)
        return square, window

    def controls_on(self, seg: ControlSegment, t) -> tuple[np.ndarray, np.ndarray]:
        """(u, v) on ``seg`` at times ``t`` after the axis mapping."""
        square, window = self.channels(seg, t)
        if self.axis == "x":
            return window, square
        return square, window


def build_theorem1(
    profile: TargetProfile, eps1: float, N: int, axis: str = "y"
) -> ControlSchedule:
    """Assemble the 2N + 2 segment control law for ``profile``.

    ``axis="y"`` targets ``exp(-i f sigma_y)``; ``axis="x"`` interchanges
    the two inputs and targets ``exp(-i f sigma_x)``.
    """
    if (
        not isinstance(eps1, (int, float))
        or not math.isfinite(eps1)
        or eps1 <= 0
        or isinstance(N, bool)
        or not isinstance(N, (int, np.integer))
        or N < 1
        or axis not in ("x", "y")
    ):
        raise ScheduleError(
            f"bad synthesis parameters: eps1={eps1!r}, N={N!r}, axis={axis!r}"
        )
    N = int(N)
    eps1 = float(eps1)
    scale = _INV_SQRT_2PI / (2 * N)

    def at(k: int) -> float:
        return k / eps1

    segs = [ControlSegment(0.0, at(1), -1)]
    for m in range(N):
        segs.append(ControlSegment(at(4 * m + 1), at(4 * m + 3), 1, WindowSpec(at(4 * m + 2), scale)))
        segs.append(ControlSegment(at(4 * m + 3), at(4 * m + 5), -1, WindowSpec(at(4 * m + 4), scale)))
    segs.append(ControlSegment(at(4 * N + 1), at(4 * N + 2), 1))
    return ControlSchedule(eps1, N, axis, profile, tuple(segs))


def eval_controls(sched: ControlSchedule, t: float) -> tuple[float, float]:
    seg = sched.segments[sched.segment_index(float(t))]
    u, v = sched.controls_on(seg, np.array([float(t)]))
    return float(u[0]), float(v[0])


def integrate_controls(sched: ControlSchedule, panels_per_segment: int = 64, order: int = 16):
    """Quadrature of (int u dt, int v dt) over the whole schedule."""
    total_u = total_v = 0.0
    for seg in sched.segments:
        nodes, weights = gauss_legendre_panels(seg.t0, seg.t1, panels_per_segment, order)
        u, v = sched.controls_on(seg, nodes)
        total_u += float(weights @ u)
        total_v += float(weights @ v)
    return total_u, total_v


def euler_compose(
    prof_alpha: TargetProfile,
    prof_beta: TargetProfile,
    prof_gamma: TargetProfile,
    eps1: float,
    N: int,
) -> list[ControlSchedule]:
    """Schedules for ``exp(-i alpha sx) exp(-i beta sy) exp(-i gamma sx)``.

    Returned in execution order: gamma (x), beta (y), alpha (x). Each
    schedule starts its own clock at zero.
    """
    bumps = {prof_alpha.bump, prof_beta.bump, prof_gamma.bump}
    if len(bumps) != 1:
        raise ScheduleError("incompatible profiles: Euler angle profiles must share one bump")
    return [
        build_theorem1(prof_gamma, eps1, N, "x"),
        build_theorem1(prof_beta, eps1, N, "y"),
        build_theorem1(prof_alpha, eps1, N, "x"),
    ]


# -- serialization -----------------------------------------------------------


def _to_doc(sched: ControlSchedule) -> dict:
    segs = []
    for s in sched.segments:
        v = (
            {"kind": "zero"}
            if s.window is None
            else {"kind": "ghat_window", "center": s.window.center, "scale": s.window.scale}
        )
        segs.append({"t0": s.t0, "t1": s.t1, "u": s.u, "v": v})
    return {
        "version": SCHEMA_VERSION,
        "eps1": sched.eps1,
        "N": sched.N,
        "axis": sched.axis,
        "profile": sched.profile.to_dict(),
        "segments": segs,
    }


def serialize(sched: ControlSchedule) -> bytes:
    return (json.dumps(_to_doc(sched), indent=2) + "\n").encode("utf-8")


def _need(obj, key, kind, loc):
    if not isinstance(obj, dict):
        raise ScheduleFormatError("expected an object", loc)
    if key not in obj:
        raise ScheduleFormatError(f"missing key {key!r}", loc)
    val = obj[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is int and isinstance(val, int) and not isinstance(val, bool):
        return val
    if kind is str and isinstance(val, str):
        return val
    if kind in (dict, list) and isinstance(val, kind):
        return val
    raise ScheduleFormatError(f"{key!r} must be {kind.__name__}", f"{loc}.{key}")


def deserialize(data: bytes | str) -> ControlSchedule:
    """Parse a schedule document; errors carry a JSON path location."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    version = _need(doc, "version", int, "$")
    if version != SCHEMA_VERSION:
        raise ScheduleFormatError(f"unsupported schema version {version}", "$.version")
    eps1 = _need(doc, "eps1", float, "$")
    N = _need(doc, "N", int, "$")
    axis = _need(doc, "axis", str, "$")
    if axis not in ("x", "y"):
        raise ScheduleFormatError("axis must be 'x' or 'y'", "$.axis")
    try:
        profile = TargetProfile.from_dict(_need(doc, "profile", dict, "$"))
    except ProfileError as exc:
        raise ScheduleFormatError(str(exc), "$.profile") from None
    raw = _need(doc, "segments", list, "$")
    segs = []
    for i, item in enumerate(raw):
        loc = f"$.segments[{i}]"
        t0 = _need(item, "t0", float, loc)
        t1 = _need(item, "t1", float, loc)
        u = _need(item, "u", int, loc)
        v = _need(item, "v", dict, loc)
        kind = _need(v, "kind", str, f"{loc}.v")
        if kind == "zero":
            window = None
        elif kind == "ghat_window":
            window = WindowSpec(_need(v, "center", float, f"{loc}.v"), _need(v, "scale", float, f"{loc}.v"))
        else:
            raise ScheduleFormatError(f"unknown v kind {kind!r}", f"{loc}.v.kind")
        try:
            segs.append(ControlSegment(t0, t1, u, window))
        except ScheduleError as exc:
            raise ScheduleFormatError(str(exc), loc) from None
    sched = ControlSchedule(eps1, N, axis, profile, tuple(segs))
    _check_layout(sched)
    return sched


def _check_layout(sched: ControlSchedule) -> None:
    if sched.eps1 <= 0 or sched.N < 1:
        raise ScheduleFormatError("eps1 must be > 0 and N >= 1", "$")
    if len(sched.segments) != 2 * sched.N + 2:
        raise ScheduleFormatError(
            f"expected {2 * sched.N + 2} segments, found {len(sched.segments)}", "$.segments"
        )
    if sched.segments[0].t0 != 0.0:
        raise ScheduleFormatError("schedule must start at t=0", "$.segments[0].t0")
    for i, (a, b) in enumerate(zip(sched.segments, sched.segments[1:])):
        if a.t1 != b.t0:
            raise ScheduleFormatError("segments leave a gap or overlap", f"$.segments[{i + 1}].t0")
    expected = (4 * sched.N + 2) / sched.eps1
    if not math.isclose(sched.total_duration, expected, rel_tol=1e-12):
        raise ScheduleFormatError(
            f"total duration {sched.total_duration} != (4N+2)/eps1 = {expected}", "$.segments"
        )
