"""Cosine transform of g by composite Gauss-Legendre quadrature.

``ghat(t) = sqrt(2/pi) * int_{2a}^{2d} g(w) cos(t w) dw``

Panels are sized so that each spans at most ``1/panels_per_period`` of the
oscillation period ``2 pi / |t|``, with a floor of ``min_panels`` panels over
the support. Values depend only on ``|t|`` and the rule, never on which batch
they were computed in, so cached and fresh evaluations agree to the bit.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .profile import TargetProfile, eval_g

__all__ = [
    "FourierKernel",
    "DecayReport",
    "gauss_legendre_panels",
    "ghat",
    "verify_decay",
    "truncation_error",
    "odd_integral",
    "parseval_check",
]

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_CHUNK = 4096


def gauss_legendre_panels(lo: float, hi: float, n_panels: int, order: int):
    """Nodes and weights of a composite Gauss-Legendre rule on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _symmetric_rule(half_width: float, n_half: int, order: int):
    """Composite rule on [-L, L] whose nodes are exact mirror images."""
    pos, wpos = gauss_legendre_panels(0.0, half_width, n_half, order)
    return np.concatenate([-pos[::-1], pos]), np.concatenate([wpos[::-1], wpos])


@dataclass
class FourierKernel:
    """Tabulated ghat for one target profile.

    ``order`` is the Gauss-Legendre order per panel, ``panels_per_period``
    the number of panels per oscillation period of ``cos(t w)`` and
    ``min_panels`` the panel floor over ``[2a, 2d]``.
    """

    profile: TargetProfile
    order: int = 16
    panels_per_period: float = 8.0
    min_panels: int = 32
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)
    _rules: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.order < 1 or self.min_panels < 1 or self.panels_per_period <= 0:
            raise ValueError("quadrature settings must be positive")
        self._zero = self.profile.is_zero

    @property
    def band(self) -> tuple[float, float]:
        """Positive half of supp g."""
        a, d = self.profile.support
        return 2.0 * a, 2.0 * d

    def n_panels(self, t: float) -> int:
        lo, hi = self.band
        at = abs(t)
        if at == 0.0:
            return self.min_panels
        width = (2.0 * math.pi / at) / self.panels_per_period
        return max(self.min_panels, int(math.ceil((hi - lo) / width)))

    def _rule(self, n: int):
        rule = self._rules.get(n)
        if rule is None:
            nodes, weights = gauss_legendre_panels(*self.band, n, self.order)
            rule = (nodes, weights * eval_g(self.profile, nodes))
            self._rules[n] = rule
        return rule

    def _compute(self, ts: np.ndarray, n: int) -> np.ndarray:
        nodes, gw = self._rule(n)
        out = np.empty(len(ts))
        for i in range(0, len(ts), _CHUNK):
            block = ts[i : i + _CHUNK]
            out[i : i + _CHUNK] = (np.cos(np.outer(block, nodes)) * gw).sum(axis=1)
        return _SQRT_2_OVER_PI * out

    def ghat_many(self, ts) -> np.ndarray:
        """Vectorized ghat; results are memoized by ``|t|``."""
        ts = np.abs(np.asarray(ts, dtype=float))
        flat = ts.ravel()
        if self._zero:
            return np.zeros_like(ts)
        with self._lock:
            missing = np.array(sorted({t for t in flat.tolist() if t not in self._cache}))
            if missing.size:
                counts = np.array([self.n_panels(t) for t in missing])
                for n in np.unique(counts):
                    sel = missing[counts == n]
                    vals = self._compute(sel, int(n))
                    self._cache.update(zip(sel.tolist(), vals.tolist()))
            cache = self._cache
            out = np.array([cache[t] for t in flat.tolist()], dtype=float)
        return out.reshape(ts.shape)

    def __call__(self, t):
        return ghat(self, t)

    def error_estimate(self, t: float) -> float:
        """Change in ghat(t) when the panel count is doubled."""
        n = self.n_panels(t)
        at = np.array([abs(float(t))])
        return float(abs(self._compute(at, 2 * n)[0] - self._compute(at, n)[0]))


def ghat(kernel: FourierKernel, t):
    """ghat at a scalar or array of times; even in t by construction."""
    arr = np.asarray(t, dtype=float)
    out = kernel.ghat_many(np.atleast_1d(arr))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


@dataclass(frozen=True)
class DecayReport:
    orders: tuple[int, ...]
    constants: tuple[float, ...]
    bounded: tuple[bool, ...]

    @property
    def passed(self) -> bool:
        return all(self.bounded)

    def as_dict(self) -> dict:
        return {
            "orders": list(self.orders),
            "C_n": list(self.constants),
            "bounded": list(self.bounded),
            "passed": self.passed,
        }


def verify_decay(kernel: FourierKernel, n: int, t_grid) -> DecayReport:
    """Check that ``|ghat(t)| t^k`` stays bounded on ``t_grid`` for k = 1..n.

    ``C_k`` is the maximum of the weighted values over the grid. "Bounded"
    means the maximum over the upper half of the grid does not exceed the
    maximum over the lower half, i.e. the weighted envelope is not growing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t = np.asarray(t_grid, dtype=float)
    if t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be positive and strictly increasing")
    mag = np.abs(kernel.ghat_many(t))
    half = t.size // 2
    consts, bounded = [], []
    for k in range(1, n + 1):
        weighted = mag * t**k
        consts.append(float(weighted.max()))
        bounded.append(bool(weighted[half:].max() <= weighted[:half].max()))
    return DecayReport(tuple(range(1, n + 1)), tuple(consts), tuple(bounded))


def _tau_rule(kernel: FourierKernel, half_width: float, omega: float, n_half=None):
    if n_half is None:
        top = kernel.band[1] + abs(omega)
        width = (2.0 * math.pi / top) / kernel.panels_per_period
        n_half = max(kernel.min_panels, int(math.ceil(half_width / width)))
    return _symmetric_rule(half_width, n_half, kernel.order)


def truncation_error(kernel: FourierKernel, eps1: float, omega: float) -> float:
    """``|g(w) - int_{-1/eps1}^{1/eps1} ghat(tau) cos(w tau) dtau / sqrt(2 pi)|``."""
    if eps1 <= 0:
        raise ValueError("eps1 must be positive")
    lo, hi = kernel.band
    if not (lo <= omega <= hi):
        raise ValueError(f"omega={omega} outside [{lo}, {hi}]")
    nodes, weights = _tau_rule(kernel, 1.0 / eps1, omega)
    integral = float(np.sum(weights * kernel.ghat_many(nodes) * np.cos(omega * nodes)))
    return abs(eval_g(kernel.profile, omega) - _INV_SQRT_2PI * integral)


def odd_integral(kernel: FourierKernel, eps1: float, omega: float, n_panels=None) -> float:
    """``int_{-1/eps1}^{1/eps1} ghat(tau) sin(w tau) dtau / sqrt(2 pi)``.

    Uses a rule with mirrored nodes and weights, so the odd integrand cancels
    pairwise whatever the resolution; ``n_panels`` (per half interval)
    forces a deliberately coarse rule.
    """
    if eps1 <= 0:
        raise ValueError("eps1 must be positive")
    nodes, weights = _tau_rule(kernel, 1.0 / eps1, omega, n_panels)
    terms = weights * kernel.ghat_many(nodes) * np.sin(omega * nodes)
    m = terms.size // 2
    # pair tau with -tau before summing
    return _INV_SQRT_2PI * float(np.sum(terms[:m][::-1] + terms[m:]))


def parseval_check(kernel: FourierKernel, t_max: float = 200.0) -> tuple[float, float]:
    """Return (int_{-t_max}^{t_max} ghat^2, int g^2 over supp g)."""
    nodes, weights = _tau_rule(kernel, t_max, kernel.band[1])
    time_side = float(np.sum(weights * kernel.ghat_many(nodes) ** 2))
    lo, hi = kernel.band
    wn, ww = gauss_legendre_panels(lo, hi, 8 * kernel.min_panels, kernel.order)
    freq_side = 2.0 * float(np.sum(ww * eval_g(kernel.profile, wn) ** 2))
    return time_side, freq_side
