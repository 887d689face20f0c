"""Downstream consequences of the resolvent asymptotics.

Leading-order pseudospectral level curves for Schrodinger operators with
imaginary potential and for a damped wave equation, plus two exponent checks
for ``A_p = -d/dx + |x|^p``: the Weyl law of the comparison operator
``-d^2/dx^2 + |x|^{2p} + 1`` and the Carleman-type growth exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .exceptions import ResolutionError
from .numerics import tridiag_eigs
from .potential import Family, Potential, make_potential
from .resolvent import closed_form_norm
from .spectral import turning_point

__all__ = [
    "CurveKind",
    "LevelCurve",
    "WeylFit",
    "CarlemanCheck",
    "t_a_solve",
    "schrodinger_real_axis_curve",
    "davies_curve",
    "schrodinger_imag_axis_curve",
    "damped_wave_curve",
    "quadratic_family_norm",
    "weyl_fit",
    "weyl_eigenvalues",
    "carleman_exponent_check",
]


class CurveKind(str, Enum):
    SCHRODINGER_REAL_AXIS = "schrodinger_real_axis"
    SCHRODINGER_IMAG_AXIS = "schrodinger_imag_axis"
    DAMPED_WAVE_LOG = "damped_wave_log"
    DAMPED_WAVE_POW = "damped_wave_pow"


@dataclass(frozen=True)
class LevelCurve:
    """Samples ``(parameter, value)`` of a leading-order level-curve formula."""

    kind: CurveKind
    epsilon: float
    samples: list[tuple[float, float]]
    metadata: dict = field(default_factory=dict)

    @property
    def parameters(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])


@dataclass(frozen=True)
class WeylFit:
    p: float
    eigenvalues: np.ndarray
    fitted_slope: float
    expected_slope: float
    L: float = math.nan
    grid_n: int = 0


class CarlemanCheck(NamedTuple):
    resolvent_exponent: float
    carleman_exponent: float
    fitted_slope: float


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")


def _sample_range(rng: tuple[float, float], n: int) -> np.ndarray:
    lo, hi = float(rng[0]), float(rng[1])
    if not 0 < lo < hi:
        raise ValueError(f"range must satisfy 0 < lo < hi, got ({lo!r}, {hi!r})")
    if n < 2:
        raise ValueError(f"need at least 2 samples, got n={n}")
    return np.geomspace(lo, hi, n)


def _leading_order_meta(**extra) -> dict:
    return {"leading_order": True, "conjectured": False, **extra}


def t_a_solve(V_p: float, a: float) -> float:
    """Positive root of ``t * V(t) = 2 sqrt(a)`` for ``V(t) = t**V_p``."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a!r}")
    if not V_p > 0:
        raise ValueError(f"V_p must be positive, got {V_p!r}")
    return (2.0 * math.sqrt(a)) ** (1.0 / (V_p + 1.0))


def _real_axis_value(V_p: float, epsilon: float, a: float) -> float:
    v = t_a_solve(V_p, a) ** V_p
    arg = math.log(v / epsilon)
    if not arg > 0:
        raise ValueError(f"log(V(t_a)/epsilon) = {arg!r} is not positive at a={a!r}")
    return ((V_p + 1.0) / (2.0 * V_p)) ** (V_p / (V_p + 1.0)) * v * arg ** (V_p / (V_p + 1.0))


def _davies_value(epsilon: float, a: float) -> float:
    arg = math.log(a ** (1.0 / 3.0) / epsilon)
    if not arg > 0:
        raise ValueError(f"log(a^(1/3)/epsilon) = {arg!r} is not positive at a={a!r}")
    return 1.5 ** (2.0 / 3.0) * a ** (1.0 / 3.0) * arg ** (2.0 / 3.0)


def schrodinger_real_axis_curve(
    V_p: float, epsilon: float, a_range: tuple[float, float], n: int = 100
) -> LevelCurve:
    """Level curve ``b(a)`` of ``-d^2/dx^2 + i|x|^V_p`` near the real axis.

    For ``V_p == 2`` the specialised closed form is attached under
    ``metadata["davies"]`` as a list of samples on the same ``a`` grid.
    """
    _check_epsilon(epsilon)
    grid = _sample_range(a_range, n)
    samples = [(float(a), _real_axis_value(V_p, epsilon, float(a))) for a in grid]
    meta = _leading_order_meta(V_p=V_p)
    if V_p == 2:
        meta["davies"] = davies_curve(epsilon, a_range, n).samples
    return LevelCurve(CurveKind.SCHRODINGER_REAL_AXIS, epsilon, samples, meta)


def davies_curve(epsilon: float, a_range: tuple[float, float], n: int = 100) -> LevelCurve:
    """Closed form ``(3/2)^(2/3) a^(1/3) log(a^(1/3)/epsilon)^(2/3)`` for ``V = x^2``."""
    _check_epsilon(epsilon)
    grid = _sample_range(a_range, n)
    samples = [(float(a), _davies_value(epsilon, float(a))) for a in grid]
    return LevelCurve(CurveKind.SCHRODINGER_REAL_AXIS, epsilon, samples, _leading_order_meta(V_p=2))


def schrodinger_imag_axis_curve(
    pot_V: Potential, epsilon: float, b_range: tuple[float, float], n: int = 100
) -> LevelCurve:
    """Level curve ``a(b)`` near the imaginary axis, with ``V(x_b) = b``."""
    _check_epsilon(epsilon)
    samples = []
    for b in _sample_range(b_range, n):
        x_b = turning_point(pot_V, float(b))
        vp23 = float(pot_V.deriv(x_b)) ** (2.0 / 3.0)
        arg = math.log(vp23 / epsilon)
        if not arg > 0:
            raise ValueError(f"log(V'(x_b)^(2/3)/epsilon) = {arg!r} is not positive at b={b!r}")
        samples.append((float(b), 0.75 ** (2.0 / 3.0) * vp23 * arg ** (2.0 / 3.0)))
    return LevelCurve(CurveKind.SCHRODINGER_IMAG_AXIS, epsilon, samples, _leading_order_meta(potential=pot_V.spec))


def damped_wave_curve(
    kind: str | CurveKind, param: float, epsilon: float, b_range: tuple[float, float], n: int = 100
) -> LevelCurve:
    """Level curve ``c(b)`` for damping ``log<x>^p`` (``kind="log"``) or ``x^(2n)`` (``kind="pow"``).

    Args:
        kind: ``"log"`` or ``"pow"``.
        param: The exponent ``p`` for ``"log"``, the integer ``n`` for ``"pow"``.
        epsilon: Pseudospectral level in ``(0, 1)``.
        b_range: Positive interval of imaginary parts.
        n: Number of log-spaced samples.
    """
    _check_epsilon(epsilon)
    kind = {"log": CurveKind.DAMPED_WAVE_LOG, "pow": CurveKind.DAMPED_WAVE_POW}.get(kind, kind)
    kind = CurveKind(kind)
    samples = []
    for b in _sample_range(b_range, n):
        inner = math.log(2.0 * b / epsilon)
        if kind is CurveKind.DAMPED_WAVE_LOG:
            if not inner > 1:
                raise ValueError(f"log log(2b/epsilon) is not positive at b={b!r}")
            c = param * math.log(inner)
        elif kind is CurveKind.DAMPED_WAVE_POW:
            if not inner > 0:
                raise ValueError(f"log(2b/epsilon) is not positive at b={b!r}")
            e = 2.0 * param / (2.0 * param + 1.0)
            c = ((2.0 * param + 1.0) / (4.0 * param)) ** e * inner**e
        else:
            raise ValueError(f"{kind.value!r} is not a damped-wave curve")
        samples.append((float(b), c))
    if kind is CurveKind.DAMPED_WAVE_LOG:
        meta = _leading_order_meta(p=param, admissible_p="0 < p < 1/2")
    else:
        meta = _leading_order_meta(n=param)
        meta["conjectured"] = True
    return LevelCurve(kind, epsilon, samples, meta)


def quadratic_family_norm(pot_a: Potential, c: float, b: float) -> float:
    """Leading-order log norm of the damped-wave pencil inverse at ``-c + i b``."""
    if b == 0:
        raise ValueError("b must be nonzero")
    return closed_form_norm(pot_a, c) - math.log(2.0 * abs(b))


def weyl_eigenvalues(p: float, grid_n: int, L: float, k: int) -> np.ndarray:
    """Lowest ``k`` eigenvalues of the finite-difference ``-d^2/dx^2 + |x|^(2p) + 1`` on ``[-L, L]``."""
    h = 2.0 * L / (grid_n + 1)
    x = -L + h * np.arange(1, grid_n + 1)
    diag = 2.0 / h**2 + np.abs(x) ** (2.0 * p) + 1.0
    off = np.full(grid_n - 1, -1.0 / h**2)
    return tridiag_eigs(diag, off, k)


def weyl_fit(p: float, grid_n: int = 4000, L: float | None = None, k_max: int = 40) -> WeylFit:
    """Fit ``log mu_k`` against ``log k`` over ``k in [k_max/4, k_max]``.

    When ``L`` is omitted it starts from a harmonic-oscillator guess and is
    enlarged once to ``2 mu_kmax^(1/(2p))`` if that is larger. The eigenvalues
    are recomputed on a grid twice as fine and must move by at most 1%.

    Raises:
        ResolutionError: If the refinement check fails.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    if grid_n < 2000:
        raise ValueError(f"grid_n must be >= 2000, got {grid_n}")
    if k_max < 4:
        raise ValueError(f"k_max must be >= 4, got {k_max}")
    if L is None:
        L = 2.0 * (2.0 * k_max + 1.0) ** (1.0 / (2.0 * p))
        mu = weyl_eigenvalues(p, grid_n, L, k_max)
        need = 2.0 * mu[-1] ** (1.0 / (2.0 * p))
        if need > L:
            L = need
            mu = weyl_eigenvalues(p, grid_n, L, k_max)
    else:
        mu = weyl_eigenvalues(p, grid_n, L, k_max)

    fine = weyl_eigenvalues(p, 2 * grid_n, L, k_max)
    k = np.arange(1, k_max + 1)
    sel = k >= k_max / 4.0
    shift = float(np.max(np.abs(fine[sel] - mu[sel]) / mu[sel]))
    if shift > 0.01:
        raise ResolutionError(f"eigenvalues moved by {shift:.3%} under grid doubling; increase grid_n")
    slope = float(np.polyfit(np.log(k[sel]), np.log(mu[sel]), 1)[0])
    return WeylFit(
        p=float(p),
        eigenvalues=mu,
        fitted_slope=slope,
        expected_slope=2.0 * p / (p + 1.0),
        L=float(L),
        grid_n=int(grid_n),
    )


def carleman_exponent_check(p: float, lam_range: tuple[float, float] = (10.0, 100.0), n: int = 50) -> CarlemanCheck:
    """Compare the sharp growth exponent ``(p+1)/p`` with ``2 r_p``, ``r_p = (1+p)/(2p)``.

    The third component is the log-log slope of ``log ||(A_p - lam)^{-1}||``
    against ``lam`` over ``lam_range``, which tends to ``(p+1)/p``.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p!r}")
    pot = make_potential(Family.POW, p)
    r_p = (1.0 + p) / (2.0 * p)
    lams = _sample_range(lam_range, n)
    log_norms = np.array([closed_form_norm(pot, float(lam)) for lam in lams])
    slope = float(np.polyfit(np.log(lams), np.log(log_norms), 1)[0])
    return CarlemanCheck((p + 1.0) / p, 2.0 * r_p, slope)
