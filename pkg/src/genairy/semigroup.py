"""The contraction semigroup generated by ``-A``.

``S_t`` shifts a function left by ``t`` and damps it by ``exp(g_t(x))`` with
``g_t(x) = -int_x^{x+t} W``. Its norm is ``exp(max g_t) = exp(-2 int_0^{t/2} W)``,
the maximum being attained at ``x = -t/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .potential import Family, Potential

__all__ = [
    "SemigroupEstimate",
    "g_t",
    "apply_semigroup",
    "semigroup_norm",
    "norm_maximizer",
    "semigroup_threshold",
    "estimate_semigroup",
]


@dataclass(frozen=True)
class SemigroupEstimate:
    t: float
    log_norm: float
    maximizer: float
    t0: float

    def as_dict(self) -> dict:
        return {"t": self.t, "log_norm": self.log_norm, "maximizer": self.maximizer, "t0": self.t0}


def g_t(pot: Potential, t: float, x):
    """Exponent ``-(Phi(x + t) - Phi(x))`` of the damping factor."""
    x = np.asarray(x, dtype=float)
    out = -(np.asarray(pot.antiderivative(x + t)) - np.asarray(pot.antiderivative(x)))
    return float(out) if out.ndim == 0 else out


def apply_semigroup(pot: Potential, t: float, x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Evaluate ``S_t f`` on the uniform grid ``x``.

    Values of ``f`` beyond the right end of the grid are taken as zero.

    Raises:
        ValueError: If ``t`` is negative or not a multiple of the grid step.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f)
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    if x.shape != f.shape or x.ndim != 1:
        raise ValueError("x and f must be 1-D arrays of equal length")
    if t == 0:
        return f.copy()
    h = (x[-1] - x[0]) / (x.size - 1)
    k = round(t / h)
    if abs(k * h - t) > 1e-9 * max(t, h):
        raise ValueError(f"t={t!r} is not a multiple of the grid step h={h!r}; regrid so that t/h is an integer")
    shifted = np.zeros_like(f)
    if k < x.size:
        shifted[: x.size - k] = f[k:]
    return np.exp(g_t(pot, t, x)) * shifted


def semigroup_threshold(pot: Potential) -> float:
    """Smallest time from which the norm formula holds.

    Zero for the built-in families. For a custom weight it is ``2 x1`` with
    ``x1`` the first scanned point where ``W`` exceeds its maximum on ``[-x0, x0]``.
    """
    if pot.family is not Family.CUSTOM:
        return 0.0
    core = pot.core_sup()
    x1 = pot.x0
    step = pot.x0 / 100.0
    for _ in range(1_000_000):
        if float(pot.value(x1)) > core:
            return 2.0 * x1
        x1 += step
    raise ValueError("W never exceeds its core maximum; no threshold found")


def semigroup_norm(pot: Potential, t: float) -> float:
    """``log ||S_t|| = -2 int_0^{t/2} W``.

    Raises:
        ValueError: If ``t < 0`` or ``t`` is below the threshold for a custom weight.
    """
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    if t < semigroup_threshold(pot):
        raise ValueError(f"t={t!r} is below the validity threshold t0={semigroup_threshold(pot)!r}")
    u = 0.5 * t
    if pot.family is Family.POW:
        return -(2.0 ** (-pot.p)) * t ** (pot.p + 1.0) / (pot.p + 1.0)
    if pot.family is Family.LOGPOW:
        return -2.0 * pot.p * (u * 0.5 * math.log1p(u * u) - u + math.atan(u))
    return -2.0 * float(pot.antiderivative(u))


def norm_maximizer(pot: Potential, t: float, grid_n: int = 4001) -> float:
    """Grid argmax of ``g_t`` over ``[-t - 5 x0, 5 x0]``."""
    if grid_n < 1000:
        raise ValueError(f"grid_n must be >= 1000, got {grid_n}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    x = np.linspace(-t - 5.0 * pot.x0, 5.0 * pot.x0, grid_n)
    return float(x[int(np.argmax(g_t(pot, t, x)))])


def estimate_semigroup(pot: Potential, t: float, grid_n: int = 4001) -> SemigroupEstimate:
    t = float(t)
    return SemigroupEstimate(
        t=t,
        log_norm=semigroup_norm(pot, t),
        maximizer=norm_maximizer(pot, t, grid_n) if t > 0 else 0.0,
        t0=semigroup_threshold(pot),
    )
