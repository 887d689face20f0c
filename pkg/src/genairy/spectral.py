"""Turning point, action integral and Laplace-type integrals at a fixed lambda.

For ``lambda`` above the potential's core level, ``f_lambda(x) = lambda*x - int_0^x W``
has a single positive maximum at the turning point ``x_lambda`` where
``W(x_lambda) = lambda``. Everything the resolvent estimates need is gathered in
a :class:`SpectralProfile`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import BelowThresholdError, BracketError
from .numerics import find_root, integrate, log_integrate_exp
from .potential import Family, Potential

__all__ = [
    "DELTA",
    "Side",
    "SpectralProfile",
    "turning_point",
    "f_lambda",
    "f_lambda_quadrature",
    "profile",
    "laplace_integral",
    "laplace_asymptote",
    "lambda_min",
]

# relative half-width of the windows around +-x_lambda
DELTA = 0.1

_MAX_DOUBLINGS = 200


class Side(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class SpectralProfile:
    """Scalars that depend on ``lambda`` only.

    Attributes:
        lam: Spectral parameter.
        x_lambda: Turning point, ``W(x_lambda) = lam``.
        f_at_xlambda: Maximum of the action ``f_lambda`` on the positive axis.
        wprime_at_xlambda: ``W'(x_lambda)``.
        x_lambda_0: Positive zero of ``f_lambda`` beyond the turning point.
        delta_lambda: Window half-width ``DELTA * x_lambda**(-nu)``.
        upsilon1: ``x_lambda**nu * W'(x_lambda)**(-1/2)``.
        rho: Gaussian width ``W'(x_lambda)**(-1/2)`` of ``exp(f_lambda)`` at its peak.
    """

    lam: float
    x_lambda: float
    f_at_xlambda: float
    wprime_at_xlambda: float
    x_lambda_0: float
    delta_lambda: float
    upsilon1: float
    rho: float

    @property
    def log_wprime(self) -> float:
        return math.log(self.wprime_at_xlambda)

    def window(self, side: Side | str = Side.PLUS) -> tuple[float, float]:
        """The interval ``[+-x_lambda - delta_lambda, +-x_lambda + delta_lambda]``."""
        c = self.x_lambda if Side(side) is Side.PLUS else -self.x_lambda
        return c - self.delta_lambda, c + self.delta_lambda


def lambda_min(pot: Potential) -> float:
    """Level above which the turning point and a positive action maximum exist.

    This is ``sup W`` over ``[0, x0]``; it is an operational threshold and not
    a certified constant.
    """
    return pot.core_sup()


def _closed_turning_point(pot: Potential, lam: float) -> float | None:
    if pot.family is Family.POW:
        return lam ** (1.0 / pot.p)
    if pot.family is Family.LOGPOW:
        return math.sqrt(math.expm1(2.0 * lam / pot.p))
    if pot.family is Family.EXPPOW:
        return math.log(lam) ** (1.0 / pot.p)
    return None


def _solve_turning_point(pot: Potential, lam: float) -> float:
    log_lam = math.log(lam)

    def g(x: float) -> float:
        return float(pot.log_value(x)) - log_lam

    lo, hi = pot.x0, 2.0 * pot.x0
    for _ in range(_MAX_DOUBLINGS):
        if g(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketError(f"W never reaches lambda={lam!r} (searched up to x={hi!r})")
    return find_root(g, (lo, hi))


def turning_point(pot: Potential, lam: float, *, closed_form: bool = True) -> float:
    """Positive solution of ``W(x) = lam``.

    Built-in families use their explicit inverse unless ``closed_form`` is
    False; otherwise ``log W(x) = log lam`` is solved by bracketing outward from
    ``x0``.

    Raises:
        BelowThresholdError: If ``lam`` does not exceed :func:`lambda_min`.
    """
    lam = float(lam)
    lam0 = lambda_min(pot)
    if not lam > lam0:
        raise BelowThresholdError(
            f"lambda={lam!r} is below lambda_0={lam0!r} for this family ({pot.spec})"
        )
    if closed_form:
        x = _closed_turning_point(pot, lam)
        if x is not None:
            return x
    return _solve_turning_point(pot, lam)


def f_lambda(pot: Potential, lam: float, x):
    """Action integral ``int_0^x (lam - W(t)) dt``, vectorized over ``x``."""
    if np.ndim(x) == 0:
        return lam * float(x) - float(pot.antiderivative(float(x)))
    x = np.asarray(x, dtype=float)
    return lam * x - pot.antiderivative(x)


def f_lambda_quadrature(pot: Potential, lam: float, x: float) -> float:
    """The action integral by direct quadrature; an independent route for checks."""
    x = float(x)
    val = integrate(lambda t: lam - float(pot.value(t)), 0.0, abs(x))
    return math.copysign(val, x) if x != 0 else 0.0


def _action_zero(pot: Potential, lam: float, x_lam: float, f_peak: float) -> float:
    lo, hi = x_lam, 2.0 * x_lam
    for _ in range(_MAX_DOUBLINGS):
        if f_lambda(pot, lam, hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketError(f"f_lambda stays positive beyond x={hi!r}")
    return find_root(lambda x: f_lambda(pot, lam, x), (lo, hi))


def profile(pot: Potential, lam: float) -> SpectralProfile:
    """Compute every lambda-dependent scalar for ``pot``.

    Raises:
        BelowThresholdError: If ``lam`` is at or below the family threshold, or the
            action maximum is not positive.
    """
    lam = float(lam)
    x_lam = turning_point(pot, lam)
    f_peak = float(f_lambda(pot, lam, x_lam))
    if not f_peak > 0:
        raise BelowThresholdError(
            f"f_lambda(x_lambda)={f_peak!r} is not positive at lambda={lam!r} ({pot.spec})"
        )
    wp = float(pot.deriv(x_lam))
    x_zero = _action_zero(pot, lam, x_lam, f_peak)
    return SpectralProfile(
        lam=lam,
        x_lambda=x_lam,
        f_at_xlambda=f_peak,
        wprime_at_xlambda=wp,
        x_lambda_0=x_zero,
        delta_lambda=DELTA * x_lam ** (-pot.nu),
        upsilon1=x_lam**pot.nu / math.sqrt(wp),
        rho=1.0 / math.sqrt(wp),
    )


def laplace_asymptote(prof: SpectralProfile, M: float) -> float:
    """Log of the Gaussian approximation ``sqrt(2 pi / M) W'(x_lambda)^(-1/2) exp(M f)``."""
    return 0.5 * math.log(2.0 * math.pi / M) - 0.5 * prof.log_wprime + M * prof.f_at_xlambda


def laplace_integral(
    pot: Potential,
    lam: float,
    M: float,
    side: Side | str = Side.PLUS,
    prof: SpectralProfile | None = None,
) -> float:
    """Log of the integral of ``exp(M f_lambda)`` over the window at ``+x_lambda`` or ``-x_lambda``.

    The integrand is written in ``u = x -+ x_lambda`` and divided by its value at
    ``u = 0`` (or at the window edge on the minus side, where the action has
    a minimum) before quadrature.
    """
    if not M > 0:
        raise ValueError(f"M must be positive, got {M!r}")
    prof = profile(pot, lam) if prof is None else prof
    side = Side(side)
    centre = prof.x_lambda if side is Side.PLUS else -prof.x_lambda
    d = prof.delta_lambda

    def g(u: float) -> float:
        return M * f_lambda(pot, lam, centre + u)

    shift = max(g(-d), g(0.0), g(d))
    return log_integrate_exp(g, -d, d, shift=shift)
