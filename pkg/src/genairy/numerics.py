"""Scalar numerical kernels shared by the rest of the package.

Adaptive Simpson quadrature, bracketed root finding with a Newton polish,
log-domain accumulation, and a Sturm-sequence bisection eigensolver for
symmetric tridiagonal matrices.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .exceptions import BracketError, IntegrationWarning

__all__ = [
    "QuadratureConfig",
    "RootConfig",
    "QuadResult",
    "integrate",
    "log_integrate_exp",
    "gauss_legendre_panels",
    "log_gauss_legendre_panels",
    "find_root",
    "log_sum_exp",
    "tridiag_eigs",
    "sturm_count",
]


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_depth: int = 50
    initial_panels: int = 4

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 10:
            raise ValueError(f"max_depth must be >= 10, got {self.max_depth}")
        if self.initial_panels < 1:
            raise ValueError("initial_panels must be >= 1")


@dataclass(frozen=True)
class RootConfig:
    rel_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_QUAD = QuadratureConfig()
DEFAULT_ROOT = RootConfig()


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool
    n_evals: int


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_QUAD,
    full_output: bool = False,
) -> float | QuadResult:
    """Integrate ``f`` over ``[a, b]`` with adaptive composite Simpson.

    Each panel is bisected until the Simpson estimates on the two halves agree
    with the whole-panel estimate to within the panel's share of the global
    tolerance ``max(abs_tol, rel_tol * |I|)``. Accepted panels are corrected
    with one Richardson step.

    Args:
        f: Integrand, finite on ``[a, b]``.
        a: Lower limit.
        b: Upper limit, ``b >= a``.
        cfg: Tolerances and the bisection depth limit.
        full_output: Return a :class:`QuadResult` instead of the bare value.

    Returns:
        The integral, or a ``QuadResult`` when ``full_output`` is set. When the
        depth limit is hit an :class:`IntegrationWarning` is emitted and the
        best available estimate is returned.
    """
    if b < a:
        raise ValueError(f"integrate requires a <= b, got a={a!r}, b={b!r}")
    if a == b:
        return QuadResult(0.0, 0.0, True, 0) if full_output else 0.0

    n0 = cfg.initial_panels
    edges = np.linspace(a, b, 2 * n0 + 1)
    vals = [float(f(float(x))) for x in edges]
    n_evals = len(vals)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("integrand is not finite on the sampled nodes")

    panels = []
    coarse_abs = 0.0
    for i in range(n0):
        x0, x2 = float(edges[2 * i]), float(edges[2 * i + 2])
        f0, f1, f2 = vals[2 * i], vals[2 * i + 1], vals[2 * i + 2]
        s = _simpson(f0, f1, f2, x2 - x0)
        coarse_abs += _simpson(abs(f0), abs(f1), abs(f2), x2 - x0)
        panels.append((x0, x2, f0, f1, f2, s, 0))

    tol = max(cfg.abs_tol, cfg.rel_tol * coarse_abs)
    total_width = b - a
    total = 0.0
    err = 0.0
    converged = True
    stack = panels[::-1]
    while stack:
        x0, x2, f0, f1, f2, whole, depth = stack.pop()
        x1 = 0.5 * (x0 + x2)
        fl = float(f(0.5 * (x0 + x1)))
        fr = float(f(0.5 * (x1 + x2)))
        n_evals += 2
        left = _simpson(f0, fl, f1, x1 - x0)
        right = _simpson(f1, fr, f2, x2 - x1)
        delta = left + right - whole
        local_tol = tol * (x2 - x0) / total_width
        if abs(delta) <= 15.0 * local_tol or depth >= cfg.max_depth or x1 in (x0, x2):
            if abs(delta) > 15.0 * local_tol:
                converged = False
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
            continue
        stack.append((x1, x2, f1, fr, f2, right, depth + 1))
        stack.append((x0, x1, f0, fl, f1, left, depth + 1))

    if not math.isfinite(total):
        raise ValueError("integrand produced a non-finite value")
    if not converged:
        warnings.warn(
            f"adaptive Simpson reached max_depth={cfg.max_depth} on [{a}, {b}]; "
            f"best estimate {total!r}, error estimate {err:.3g}",
            IntegrationWarning,
            stacklevel=2,
        )
    if full_output:
        return QuadResult(total, err, converged, n_evals)
    return total


def log_integrate_exp(
    g: Callable[[float], float],
    a: float,
    b: float,
    shift: float | None = None,
    cfg: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """Return ``log(integral of exp(g) over [a, b])`` without overflow.

    The integrand is divided by ``exp(shift)`` before quadrature. When no shift
    is given it is taken as the maximum of ``g`` over 33 equispaced samples,
    which is adequate whenever ``g`` is unimodal on the interval.
    """
    if b < a:
        raise ValueError(f"log_integrate_exp requires a <= b, got a={a!r}, b={b!r}")
    if a == b:
        return -math.inf
    if shift is None:
        shift = max(g(float(x)) for x in np.linspace(a, b, 33))
    value = integrate(lambda x: math.exp(g(x) - shift), a, b, cfg)
    if value <= 0.0:
        return -math.inf
    return shift + math.log(value)


_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


def _split_panels(edges: np.ndarray, pieces: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pieces = np.maximum(np.asarray(pieces, dtype=np.int64), 1)
    owner = np.repeat(np.arange(edges.size - 1), pieces)
    first = np.concatenate([[0], np.cumsum(pieces)[:-1]])
    local = np.arange(owner.size) - first[owner]
    width = (edges[1:] - edges[:-1]) / pieces
    lo = edges[:-1][owner] + local * width[owner]
    return lo, width[owner], owner


def gauss_legendre_panels(f: Callable[[np.ndarray], np.ndarray], edges, pieces=1) -> np.ndarray:
    """Integrals of a vectorized ``f`` over each ``[edges[i], edges[i+1]]``.

    Each interval is cut into ``pieces[i]`` equal sub-panels, each integrated
    with a 16-point Gauss-Legendre rule.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0)
    pieces = np.broadcast_to(pieces, (edges.size - 1,))
    lo, width, owner = _split_panels(edges, pieces)
    x = lo[:, None] + 0.5 * width[:, None] * (_GL_NODES[None, :] + 1.0)
    vals = np.asarray(f(x), dtype=float) @ _GL_WEIGHTS * (0.5 * width)
    return np.bincount(owner, weights=vals, minlength=edges.size - 1)


def log_gauss_legendre_panels(g: Callable[[np.ndarray], np.ndarray], edges, pieces=1) -> np.ndarray:
    """``log`` of the integral of ``exp(g)`` over each interval of ``edges``.

    Every sub-panel is shifted by its own maximum of ``g`` at the quadrature
    nodes, so no intermediate exponential overflows.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0)
    pieces = np.broadcast_to(pieces, (edges.size - 1,))
    lo, width, owner = _split_panels(edges, pieces)
    x = lo[:, None] + 0.5 * width[:, None] * (_GL_NODES[None, :] + 1.0)
    gx = np.asarray(g(x), dtype=float)
    peak = gx.max(axis=1)
    with np.errstate(divide="ignore"):
        log_panel = peak + np.log(np.exp(gx - peak[:, None]) @ _GL_WEIGHTS * (0.5 * width))
    out = np.full(edges.size - 1, -np.inf)
    np.logaddexp.at(out, owner, log_panel)
    return out


def log_sum_exp(values) -> float:
    """Log of the sum of exponentials of ``values``; ``-inf`` for an empty input."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    return float(logsumexp(arr))


def find_root(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    cfg: RootConfig = DEFAULT_ROOT,
) -> float:
    """Locate a root of ``f`` inside ``bracket`` by bisection and Newton polish.

    Bisection runs until the bracket width falls below ``rel_tol`` times the
    larger endpoint magnitude. Up to five secant-Newton steps then refine the
    midpoint, never leaving the final bracket.

    Raises:
        BracketError: If ``f`` does not change sign over the bracket.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.isnan(fa) or math.isnan(fb) or (fa > 0) == (fb > 0):
        raise BracketError(
            f"invalid bracket: f({a!r})={fa!r} and f({b!r})={fb!r} do not differ in sign"
        )

    scale = max(abs(fa) if math.isfinite(fa) else 0.0, abs(fb) if math.isfinite(fb) else 0.0)
    f_tol = cfg.rel_tol * scale if scale > 0 else cfg.rel_tol
    x_tol_ref = max(abs(a), abs(b), math.ulp(1.0))

    for _ in range(cfg.max_iter):
        m = 0.5 * (a + b)
        fm = float(f(m))
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
        if b - a <= cfg.rel_tol * x_tol_ref:
            break

    best = 0.5 * (a + b)
    f_best = float(f(best))
    x = best
    fx = f_best
    for _ in range(5):
        if abs(fx) <= f_tol * 1e-3 or not (math.isfinite(fa) and math.isfinite(fb)):
            break
        slope = (fb - fa) / (b - a) if b > a else 0.0
        if slope == 0.0 or not math.isfinite(slope):
            break
        x_new = x - fx / slope
        if not a <= x_new <= b:
            break
        f_new = float(f(x_new))
        if abs(f_new) < abs(f_best):
            best, f_best = x_new, f_new
        if abs(f_new) >= abs(fx):
            break
        x, fx = x_new, f_new
    return best


def sturm_count(diag: np.ndarray, offdiag_sq: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each shift (LDL^T pivot signs)."""
    shifts = np.asarray(shifts, dtype=float)
    tiny = np.finfo(float).tiny ** 0.5
    q = diag[0] - shifts
    q = np.where(q == 0.0, -tiny, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, diag.size):
        q = (diag[i] - shifts) - offdiag_sq[i - 1] / q
        q = np.where(q == 0.0, -tiny, q)
        count += q < 0
    return count


def tridiag_eigs(diag, offdiag, k: int) -> np.ndarray:
    """Smallest ``k`` eigenvalues of a symmetric tridiagonal matrix, ascending.

    Every eigenvalue is isolated by bisection on the Sturm count, all ``k`` at
    once, to an absolute width of ``1e-10`` times the infinity norm.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    n = d.size
    if e.size != max(n - 1, 0):
        raise ValueError(f"offdiag must have length {n - 1}, got {e.size}")
    if k > n:
        raise ValueError(f"requested k={k} eigenvalues from a {n}x{n} matrix")
    if k <= 0:
        return np.empty(0)

    abs_e = np.abs(e)
    radius = np.zeros(n)
    radius[:-1] += abs_e
    radius[1:] += abs_e
    norm_inf = float(np.max(np.abs(d) + radius))
    if norm_inf == 0.0:
        return np.zeros(k)

    lo_g = float(np.min(d - radius))
    hi_g = float(np.max(d + radius))
    pad = 1e-12 * norm_inf
    lo = np.full(k, lo_g - pad)
    hi = np.full(k, hi_g + pad)
    tol = 1e-10 * norm_inf
    idx = np.arange(k)
    e_sq = e * e
    n_steps = int(math.ceil(math.log2((hi_g - lo_g + 2 * pad) / tol))) + 2
    for _ in range(n_steps):
        mid = 0.5 * (lo + hi)
        below = sturm_count(d, e_sq, mid)
        upper = below > idx
        hi = np.where(upper, mid, hi)
        lo = np.where(upper, lo, mid)
    return 0.5 * (lo + hi)
