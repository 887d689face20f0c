"""Four independent routes to the resolvent norm of ``A = -d/dx + W``.

For real ``lambda`` the resolvent ``(A - lambda)^{-1}`` is the integral operator
with kernel ``exp(f_lambda(y) - f_lambda(x))`` on ``x < y``. Its norm is
estimated by

* the leading-order asymptotic formula (:func:`asymptotic_norm`),
* the largest singular value of a Nystrom discretization (:func:`numeric_norm`),
* a weighted Schur-test upper bound (:func:`schur_upper_bound`),
* a Laplace-integral lower bound from an explicit test function
  (:func:`witness_lower_bound`).

All norm-sized quantities are natural logarithms.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .exceptions import BelowThresholdError, BracketError, ConvergenceError, OverflowGuardError
from .numerics import find_root, log_gauss_legendre_panels
from .potential import Family, Potential
from .spectral import (
    Side,
    SpectralProfile,
    f_lambda,
    lambda_min,
    laplace_integral,
    profile,
)

__all__ = [
    "GUARD_LOG",
    "TRUNCATION_LOG",
    "KernelDiscretization",
    "ResolventEstimate",
    "asymptotic_norm",
    "closed_form_norm",
    "discretize_kernel",
    "numeric_norm",
    "largest_singular_value",
    "schur_upper_bound",
    "witness_lower_bound",
    "resolvent_identity_check",
    "modulation_invariance_check",
    "estimate_resolvent",
]

# largest 2 f_lambda(x_lambda) for which the dense kernel is assembled
GUARD_LOG = 300.0
# the kernel is truncated where it has dropped by exp(-40) from its peak
TRUNCATION_LOG = 40.0


@dataclass(frozen=True)
class KernelDiscretization:
    """Uniform-grid Nystrom data for the resolvent kernel.

    Attributes:
        nodes: Ascending grid on ``[-L, L]``.
        weights: Trapezoid weights.
        log_kernel: ``f(y_j) - f(x_i)`` above the diagonal, ``-inf`` elsewhere.
        lam: Spectral parameter.
        L: Truncation half-width.
    """

    nodes: np.ndarray
    weights: np.ndarray
    log_kernel: np.ndarray
    lam: float
    L: float

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    def scaled_matrix(self) -> tuple[np.ndarray, float]:
        """Return ``(M, shift)`` with ``M_ij = sqrt(w_i w_j) exp(log_kernel_ij - shift)``."""
        shift = float(np.max(self.log_kernel))
        sw = np.sqrt(self.weights)
        mat = np.exp(self.log_kernel - shift)
        mat *= sw[:, None]
        mat *= sw[None, :]
        return mat, shift


@dataclass(frozen=True)
class ResolventEstimate:
    lam: float
    log_asymptotic: float
    log_numeric: float | None
    log_schur_upper: float
    log_witness_lower: float
    guard: bool = False

    def as_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "log_asymptotic": self.log_asymptotic,
            "log_schur_upper": self.log_schur_upper,
            "log_witness_lower": self.log_witness_lower,
            "log_numeric": self.log_numeric,
            "guard": self.guard,
        }


def asymptotic_norm(prof: SpectralProfile) -> float:
    """``log(sqrt(pi) W'(x_lambda)^(-1/2) exp(2 f_lambda(x_lambda)))``."""
    return 0.5 * math.log(math.pi) - 0.5 * prof.log_wprime + 2.0 * prof.f_at_xlambda


def closed_form_norm(pot: Potential, lam: float) -> float:
    """Family-specific explicit form of :func:`asymptotic_norm`, in log scale.

    For ``pow`` and ``exppow`` this is the same quantity written out; for
    ``logpow`` it keeps only terms that survive as ``lambda`` grows.
    """
    p = pot.p
    lam = float(lam)
    if pot.family is Family.POW:
        return (
            0.5 * math.log(math.pi / p)
            + (1.0 - p) / (2.0 * p) * math.log(lam)
            + 2.0 * p / (p + 1.0) * lam ** ((1.0 + p) / p)
        )
    if pot.family is Family.LOGPOW:
        return (
            0.5 * math.log(math.pi / p)
            + 2.0 * p * math.sqrt(math.expm1(2.0 * lam / p))
            + lam / (2.0 * p)
            - p * math.pi
        )
    if pot.family is Family.EXPPOW:
        if not lam > math.e:
            raise BelowThresholdError(f"lambda={lam!r} must exceed e for exppow")
        log_lam = math.log(lam)
        x = log_lam ** (1.0 / p)
        return (
            0.5 * math.log(math.pi / p)
            - 0.5 * log_lam
            + (1.0 - p) / (2.0 * p) * math.log(log_lam)
            + 2.0 * lam * (x - pot.dawson(x))
        )
    raise NotImplementedError(f"no closed form for family {pot.family.value!r}")


def _grow_until(pred: Callable[[float], bool], lo: float, start: float) -> tuple[float, float]:
    """Bracket the first crossing of ``pred`` beyond ``lo``, doubling from ``start``."""
    hi = start
    for _ in range(200):
        if pred(hi):
            return lo, hi
        lo, hi = hi, 2.0 * hi
    raise BracketError(f"no bracket found up to x={hi!r}")


def _truncation_length(pot: Potential, lam: float, prof: SpectralProfile | None) -> float:
    if prof is not None:
        target = prof.f_at_xlambda - TRUNCATION_LOG

        def g(x: float) -> float:
            return f_lambda(pot, lam, x) - target

        lo, hi = _grow_until(lambda x: g(x) <= 0, prof.x_lambda, prof.x_lambda_0)
    else:

        def g(x: float) -> float:
            return f_lambda(pot, lam, x) + TRUNCATION_LOG

        lo, hi = _grow_until(lambda x: g(x) <= 0, 0.0, max(pot.x0, 1.0))
    return find_root(g, (lo, hi))


def discretize_kernel(
    pot: Potential,
    lam: float,
    points_per_rho: int = 20,
    *,
    prof: SpectralProfile | None = None,
) -> KernelDiscretization:
    """Assemble the log-domain kernel on a symmetric uniform grid.

    For ``lam`` above the family threshold the step is at most
    ``rho / points_per_rho`` and ``L`` is the point where ``f_lambda`` has
    dropped by ``TRUNCATION_LOG`` below its maximum. For ``lam <= 0`` the
    length scale is ``1 / (W(L) - lam)`` and ``L`` is where ``f_lambda``
    reaches ``-TRUNCATION_LOG``.

    Raises:
        OverflowGuardError: If ``2 f_lambda(x_lambda) > GUARD_LOG``.
        BelowThresholdError: For ``0 < lam <= lambda_0``.
    """
    if points_per_rho < 10:
        raise ValueError(f"points_per_rho must be >= 10, got {points_per_rho}")
    lam = float(lam)
    if lam > 0:
        if not lam > lambda_min(pot):
            raise BelowThresholdError(
                f"lambda={lam!r} is below lambda_0={lambda_min(pot)!r} for this family ({pot.spec})"
            )
        prof = profile(pot, lam) if prof is None else prof
        if 2.0 * prof.f_at_xlambda > GUARD_LOG:
            raise OverflowGuardError(
                f"2*f_lambda(x_lambda)={2.0 * prof.f_at_xlambda:.6g} exceeds {GUARD_LOG:g}; "
                "use the bound-only estimates (asymptotic, Schur, witness)"
            )
        L = _truncation_length(pot, lam, prof)
        scale = prof.rho
    else:
        L = _truncation_length(pot, lam, None)
        scale = 1.0 / (float(pot.value(L)) - lam)

    h_max = scale / points_per_rho
    n = int(math.ceil(2.0 * L / h_max)) + 1
    nodes = np.linspace(-L, L, n)
    h = nodes[1] - nodes[0]
    weights = np.full(n, h)
    weights[0] = weights[-1] = 0.5 * h

    f = f_lambda(pot, lam, nodes)
    log_kernel = f[None, :] - f[:, None]
    log_kernel[np.tril_indices(n)] = -np.inf
    return KernelDiscretization(nodes=nodes, weights=weights, log_kernel=log_kernel, lam=lam, L=L)


def largest_singular_value(
    mat: np.ndarray,
    *,
    seed: int = 0,
    rtol: float = 1e-10,
    max_iter: int = 10_000,
) -> float:
    """Largest singular value by power iteration on ``M^H M`` using matvecs only.

    Raises:
        ConvergenceError: If the Rayleigh quotient has not settled after
            ``max_iter`` iterations.
    """
    rng = np.random.default_rng(seed)
    n = mat.shape[1]
    v = rng.standard_normal(n)
    if np.iscomplexobj(mat):
        v = v + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    mat_h = mat.conj().T
    prev = -1.0
    rq = 0.0
    for it in range(1, max_iter + 1):
        w = mat @ v
        rq = float(np.vdot(w, w).real)
        z = mat_h @ w
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        v = z / nz
        if abs(rq - prev) <= rtol * rq:
            return math.sqrt(rq)
        prev = rq
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations; "
        f"last Rayleigh quotients {prev!r}, {rq!r}"
    )


def numeric_norm(disc: KernelDiscretization, *, seed: int = 0) -> float:
    """Log of the largest singular value of the symmetrized Nystrom matrix."""
    mat, shift = disc.scaled_matrix()
    sigma = largest_singular_value(mat, seed=seed)
    return math.log(sigma) + shift


def _log_sub_exp(a: float, b: float) -> float:
    return a + math.log1p(-math.exp(b - a))


def schur_upper_bound(
    pot: Potential,
    lam: float,
    grid_n: int = 2000,
    *,
    prof: SpectralProfile | None = None,
    full_output: bool = False,
):
    """Log of the Schur-test constant with the window-adapted weights.

    The weights are ``q(y) = exp(f(clip(y, -a, a)))`` and ``p(x) = q(-x)`` with
    ``a = x_lambda + delta_lambda``. By the reflection symmetry of the kernel
    the two Schur constants coincide, so ``||T|| <= alpha`` with

        alpha = sup_x exp(-f(x)) / p(x) * int_x^inf exp(f(y)) q(y) dy.

    The supremum is taken over a grid on ``[-a, L]`` that contains the window
    edges. The half-lines ``x <= -a`` and ``x >= L`` are covered by closed
    bounds that use only the monotonicity of ``W``, and the integral beyond
    ``L`` is replaced by its upper bound. The result is therefore a certified
    bound up to quadrature tolerance.

    Returns:
        ``log alpha``, or ``(log alpha, grid, log_ratio)`` when ``full_output``.
    """
    if grid_n < 10:
        raise ValueError(f"grid_n must be >= 10, got {grid_n}")
    lam = float(lam)
    prof = profile(pot, lam) if prof is None else prof
    x_lam, d = prof.x_lambda, prof.delta_lambda
    a = x_lam + d
    L = max(_truncation_length(pot, lam, prof), a + prof.rho)
    fa = float(f_lambda(pot, lam, a))

    def log_g(y):
        fy = f_lambda(pot, lam, y)
        return np.where(y > a, fy + fa, np.where(y < -a, fy - fa, 2.0 * fy))

    breaks = np.array([-a, -(x_lam - d), x_lam - d, a])
    grid = np.union1d(np.linspace(-L, L, grid_n), breaks)
    grid = grid[grid >= -a]

    g_nodes = log_g(grid)
    # sub-panels keep the variation of the exponent per panel of order one
    pieces = 1 + np.floor(np.abs(np.diff(g_nodes)) / 2.0)
    seg = log_gauss_legendre_panels(log_g, grid, pieces)

    w_L = float(pot.value(L))
    f_L = float(f_lambda(pot, lam, L))
    log_tail = fa + f_L - math.log(w_L - lam)

    log_s = np.empty(grid.size)
    log_s[-1] = log_tail
    for i in range(grid.size - 2, -1, -1):
        log_s[i] = np.logaddexp(log_s[i + 1], seg[i])

    f_grid = f_lambda(pot, lam, grid)
    f_clip = f_lambda(pot, lam, np.clip(grid, -a, a))
    log_ratio = log_s - f_grid + f_clip

    w_a = float(pot.value(a))
    # x <= -a: ratio <= S(-a) + exp(-2 f(a)) / (W(a) - lam)
    left = np.logaddexp(log_s[0], -2.0 * fa - math.log(w_a - lam))
    # x >= L: ratio <= exp(2 f(a)) / (W(L) - lam)
    right = 2.0 * fa - math.log(w_L - lam)
    log_alpha = float(max(np.max(log_ratio), left, right))
    if full_output:
        return log_alpha, grid, log_ratio
    return log_alpha


def witness_lower_bound(pot: Potential, lam: float, *, prof: SpectralProfile | None = None) -> float:
    """``log ||v||^2`` for ``v = exp(f_lambda)`` restricted to the window at ``+x_lambda``.

    Since ``||T v|| / ||v|| >= ||v||^2`` for this test function, the value is a
    lower bound for the log norm.
    """
    return laplace_integral(pot, lam, 2.0, Side.PLUS, prof=prof)


def resolvent_identity_check(
    pot: Potential,
    lam: float,
    test_fn: Callable[[np.ndarray], np.ndarray],
    points_per_rho: int = 40,
) -> float:
    """Relative residual of ``(-D + W - lam) T v - v`` on the interior grid.

    ``T v`` is evaluated with the trapezoid rule on ``[x_i, L]``, so the kernel's
    value 1 on the diagonal enters with half weight. ``D`` is the centred first
    difference.
    """
    disc = discretize_kernel(pot, lam, points_per_rho)
    x = disc.nodes
    v = np.asarray(test_fn(x), dtype=float)
    norm_v = np.linalg.norm(v[1:-1])
    if norm_v == 0.0:
        return 0.0
    h = disc.h
    kernel = np.exp(disc.log_kernel) * disc.weights[None, :]
    u = kernel @ v + 0.5 * h * v
    du = (u[2:] - u[:-2]) / (2.0 * h)
    res = -du + (pot.value(x[1:-1]) - lam) * u[1:-1] - v[1:-1]
    return float(np.linalg.norm(res) / norm_v)


def modulation_invariance_check(disc: KernelDiscretization, beta: float, *, seed: int = 0) -> float:
    """``|log sigma_max(modulated) - log sigma_max(plain)|`` for the phase ``exp(i beta (y - x))``."""
    if beta == 0:
        return 0.0
    mat, _ = disc.scaled_matrix()
    x = disc.nodes
    phase = np.exp(1j * beta * (x[None, :] - x[:, None]))
    s0 = largest_singular_value(mat, seed=seed)
    s1 = largest_singular_value(mat * phase, seed=seed)
    return abs(math.log(s1) - math.log(s0))


def estimate_resolvent(
    pot: Potential,
    lam: float,
    *,
    points_per_rho: int = 20,
    schur_grid_n: int = 2000,
    seed: int = 0,
    require_numeric: bool = False,
) -> ResolventEstimate:
    """All four estimates at one ``lam`` above the family threshold.

    Past the overflow guard the numeric route is skipped and ``guard`` is set,
    unless ``require_numeric`` is given, in which case the guard error is raised.
    """
    prof = profile(pot, lam)
    log_numeric = None
    guard = False
    try:
        disc = discretize_kernel(pot, lam, points_per_rho, prof=prof)
    except OverflowGuardError:
        if require_numeric:
            raise
        guard = True
    else:
        log_numeric = numeric_norm(disc, seed=seed)
    return ResolventEstimate(
        lam=float(lam),
        log_asymptotic=asymptotic_norm(prof),
        log_numeric=log_numeric,
        log_schur_upper=schur_upper_bound(pot, lam, schur_grid_n, prof=prof),
        log_witness_lower=witness_lower_bound(pot, lam, prof=prof),
        guard=guard,
    )
