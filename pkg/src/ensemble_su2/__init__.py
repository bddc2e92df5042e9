"""Explicit ensemble control of driftless two-level systems on SU(2).

Fourier-kernel pulses steer every member ``i dX/dt = omega (u sx + v sy) X``
of a frequency ensemble towards ``exp(-i f(omega) sigma)`` with one shared
control pair.
"""

__version__ = "0.1.0"

from .profile import BumpParams, TargetProfile, bump_phi, eval_f, eval_g  # noqa: E402
from .fourier import FourierKernel, ghat  # noqa: E402
from .schedule import ControlSchedule, build_theorem1, euler_compose  # noqa: E402
from .simulator import SimConfig, ensemble_propagate, propagate  # noqa: E402

__all__ = [
    "__version__",
    "BumpParams",
    "TargetProfile",
    "bump_phi",
    "eval_f",
    "eval_g",
    "FourierKernel",
    "ghat",
    "ControlSchedule",
    "build_theorem1",
    "euler_compose",
    "SimConfig",
    "ensemble_propagate",
    "propagate",
]
