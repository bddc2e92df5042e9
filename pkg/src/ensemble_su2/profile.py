"""Target profiles f = amplitude(omega) * Phi(omega) and the induced even g."""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "BumpParams",
    "TargetProfile",
    "ProfileError",
    "smooth_step_p",
    "smooth_transition_q",
    "bump_phi",
    "parse_amplitude",
    "eval_f",
    "eval_g",
]


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class BumpParams:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d)
        if not all(math.isfinite(v) for v in vals):
            raise ProfileError("bump parameters must be finite")
        if not (0 < self.a < self.b < self.c < self.d):
            raise ProfileError(
                f"bump parameters need 0 < a < b < c < d, got {vals}"
            )

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


def smooth_step_p(x):
    """exp(-1/x) for x > 0, else 0. Accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out if out.ndim else float(out)


def smooth_transition_q(x):
    """p(x) / (p(x) + p(1 - x)); 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    px = np.asarray(smooth_step_p(x))
    p1 = np.asarray(smooth_step_p(1.0 - x))
    out = px / (px + p1)  # denominator never vanishes: one of x, 1-x is > 0
    out = np.where(x >= 1.0, 1.0, np.where(x <= 0.0, 0.0, out))
    return out if out.ndim else float(out)


def bump_phi(x, bp: BumpParams):
    """Smooth bump: 1 on [b, c], 0 outside [a, d], rising/falling in between.

    The rising edge is q((x - a)/(b - a)). Written as q((x - b)/(a - b)) the
    factor would be 1 - q((x - a)/(b - a)), which vanishes on [b, c].
    """
    x = np.asarray(x, dtype=float)
    out = smooth_transition_q((x - bp.a) / (bp.b - bp.a)) * smooth_transition_q(
        (bp.d - x) / (bp.d - bp.c)
    )
    out = np.asarray(out)
    return out if out.ndim else float(out)


# -- amplitude expressions ---------------------------------------------------

_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
}
_VARS = ("ω", "w", "omega")
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
}


def _compile(node: ast.AST, source: str) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _compile(node.body, source)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        value = float(node.value)
        return lambda w: np.full_like(w, value)
    if isinstance(node, ast.Name):
        if node.id in _VARS:
            return lambda w: w
        if node.id == "pi":
            return lambda w: np.full_like(w, math.pi)
        raise ProfileError(f"unknown name {node.id!r} in amplitude {source!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, source)
        if isinstance(node.op, ast.USub):
            return lambda w: -inner(w)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left = _compile(node.left, source)
        right = _compile(node.right, source)
        return lambda w: op(left(w), right(w))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0], source)
        return lambda w: fn(arg(w))
    col = getattr(node, "col_offset", 0)
    raise ProfileError(
        f"unsupported syntax at column {col + 1} in amplitude {source!r}"
    )


def parse_amplitude(source: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an amplitude expression in omega into a vectorized callable.

    Allowed: numbers, ``pi``, the variable (``ω``, ``w`` or ``omega``),
    ``+ - * /``, unary minus, parentheses and ``sin cos exp sqrt``.
    """
    if not isinstance(source, str) or not source.strip():
        raise ProfileError("empty amplitude expression")
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        raise ProfileError(
            f"cannot parse amplitude {source!r} (column {exc.offset})"
        ) from None
    return _compile(tree, source)


@dataclass(frozen=True)
class TargetProfile:
    """Target rotation angle ``f(omega) = amplitude(omega) * Phi(omega)``.

    The bump factor is part of the type, so every profile is smooth and
    supported in ``[bump.a, bump.d]``.
    """

    bump: BumpParams
    amplitude: str
    _fn: Callable = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_fn", parse_amplitude(self.amplitude))

    @property
    def support(self) -> tuple[float, float]:
        return self.bump.a, self.bump.d

    @property
    def is_zero(self) -> bool:
        try:
            return float(ast.literal_eval(self.amplitude.strip())) == 0.0
        except (ValueError, SyntaxError, TypeError):
            return False

    def to_dict(self) -> dict:
        return {"bump": self.bump.to_dict(), "amplitude": self.amplitude}

    @classmethod
    def from_dict(cls, data: dict) -> "TargetProfile":
        if not isinstance(data, dict) or "bump" not in data or "amplitude" not in data:
            raise ProfileError("profile needs 'bump' and 'amplitude' entries")
        bump = data["bump"]
        try:
            bp = BumpParams(*(float(bump[k]) for k in "abcd"))
        except (KeyError, TypeError) as exc:
            raise ProfileError(f"bad bump entry: {exc}") from None
        return cls(bp, str(data["amplitude"]))


def eval_f(prof: TargetProfile, omega):
    """Evaluate f at scalar or array omega; exactly zero off ``[a, d]``."""
    w = np.asarray(omega, dtype=float)
    flat = np.atleast_1d(w)
    out = np.zeros_like(flat)
    inside = (flat >= prof.bump.a) & (flat <= prof.bump.d)
    if inside.any():
        wi = flat[inside]
        with np.errstate(all="ignore"):
            amp = np.asarray(prof._fn(wi), dtype=float)
        if not np.all(np.isfinite(amp)):
            bad = wi[~np.isfinite(amp)][0]
            raise ProfileError(f"profile singular at ω={bad:g}")
        out[inside] = amp * bump_phi(wi, prof.bump)
    return out.reshape(w.shape) if w.ndim else float(out[0])


def eval_g(prof: TargetProfile, omega):
    """Even function with ``omega * g(2 omega) = f(omega)``, g(0) = 0."""
    w = np.abs(np.asarray(omega, dtype=float))
    flat = np.atleast_1d(w)
    out = np.zeros_like(flat)
    nz = flat > 0
    out[nz] = 2.0 * np.asarray(eval_f(prof, flat[nz] / 2.0)) / flat[nz]
    return out.reshape(w.shape) if w.ndim else float(out[0])
