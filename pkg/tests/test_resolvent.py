import math

import numpy as np
import pytest

from genairy.exceptions import BelowThresholdError, ConvergenceError, OverflowGuardError
from genairy.potential import make_custom_potential, make_potential
from genairy.resolvent import (
    GUARD_LOG,
    KernelDiscretization,
    asymptotic_norm,
    closed_form_norm,
    discretize_kernel,
    estimate_resolvent,
    largest_singular_value,
    modulation_invariance_check,
    numeric_norm,
    resolvent_identity_check,
    schur_upper_bound,
    witness_lower_bound,
)
from genairy.spectral import f_lambda, profile

import oracles

POW1 = make_potential("pow", 1)
POW2 = make_potential("pow", 2)


def bump(x):
    return np.exp(-(x**2))


class TestAsymptotic:
    def test_pow1(self):
        val = asymptotic_norm(profile(POW1, 2.0))
        assert val == pytest.approx(4.0 + 0.5 * math.log(math.pi), rel=1e-14)
        assert val == pytest.approx(4.572365, abs=1e-6)

    def test_pow2(self):
        val = asymptotic_norm(profile(POW2, 9.0))
        assert val == pytest.approx(36.0 + 0.5 * math.log(math.pi / 2) - 0.25 * math.log(9.0), rel=1e-14)
        assert val == pytest.approx(35.6765, abs=1e-4)

    @pytest.mark.parametrize("lam", [2.0, 4.0, 9.0, 30.0])
    def test_pow2_explicit(self, lam):
        explicit = 0.5 * math.log(math.pi / 2) - 0.25 * math.log(lam) + (4.0 / 3.0) * lam**1.5
        assert asymptotic_norm(profile(POW2, lam)) == pytest.approx(explicit, rel=1e-13)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.5])
    @pytest.mark.parametrize("lam", [3.0, 11.0])
    def test_pow_closed_form_general(self, p, lam):
        pot = make_potential("pow", p)
        explicit = 0.5 * math.log(math.pi / p) + (1 - p) / (2 * p) * math.log(lam) + 2 * p / (p + 1) * lam ** ((1 + p) / p)
        assert closed_form_norm(pot, lam) == pytest.approx(explicit, rel=1e-13)
        assert closed_form_norm(pot, lam) == pytest.approx(asymptotic_norm(profile(pot, lam)), rel=1e-13)

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_logpow_closed_form(self, p):
        lam = 4.0
        pot = make_potential("logpow", p)
        explicit = 0.5 * math.log(math.pi / p) + 2 * p * math.sqrt(math.exp(2 * lam / p) - 1) + lam / (2 * p) - p * math.pi
        assert closed_form_norm(pot, lam) == pytest.approx(explicit, rel=1e-13)
        # the closed form drops terms that vanish as lambda grows
        diffs = [abs(closed_form_norm(pot, l) - asymptotic_norm(profile(pot, l))) for l in (4.0, 8.0, 16.0)]
        assert diffs[2] < diffs[1] < diffs[0]

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_exppow_closed_form(self, p):
        pot = make_potential("exppow", p)
        for lam in (10.0, 40.0):
            assert closed_form_norm(pot, lam) == pytest.approx(asymptotic_norm(profile(pot, lam)), rel=1e-10)

    def test_custom_unsupported(self):
        pot = make_custom_potential(lambda x: x**2, lambda x: 2 * x, lambda x: 2.0 + 0 * x, x0=1.0, nu=-1)
        with pytest.raises(NotImplementedError):
            closed_form_norm(pot, 4.0)


class TestDiscretization:
    def test_grid_and_guard(self):
        disc = discretize_kernel(POW2, 4.0, 20)
        prof = profile(POW2, 4.0)
        assert 2 * prof.f_at_xlambda == pytest.approx(32.0 / 3.0) and 2 * prof.f_at_xlambda <= GUARD_LOG
        assert disc.h <= prof.rho / 20 * (1 + 1e-12)
        assert disc.nodes[0] == pytest.approx(-disc.L) and disc.nodes[-1] == pytest.approx(disc.L)
        assert prof.f_at_xlambda - float(f_lambda(POW2, 4.0, disc.L)) >= 40.0 - 1e-8
        assert disc.weights.sum() == pytest.approx(2 * disc.L, rel=1e-12)

    @pytest.mark.parametrize("pot,lam", [(POW2, 4.0), (POW1, 2.0), (make_potential("logpow", 1), 2.0), (POW2, -2.0)])
    def test_triangular_and_nonnegative(self, pot, lam):
        disc = discretize_kernel(pot, lam, 10)
        lk = disc.log_kernel
        assert np.all(np.isneginf(lk[np.tril_indices(disc.n)]))
        upper = lk[np.triu_indices(disc.n, 1)]
        assert np.all(np.isfinite(upper))
        mat, _ = disc.scaled_matrix()
        assert np.all(mat >= 0)

    def test_peak_entry(self):
        disc = discretize_kernel(POW2, 4.0, 20)
        assert np.max(disc.log_kernel) == pytest.approx(32.0 / 3.0, abs=disc.h * 4.0)

    def test_overflow_guard(self):
        with pytest.raises(OverflowGuardError, match="bound-only"):
            discretize_kernel(POW2, 40.0)

    def test_below_threshold(self):
        with pytest.raises(BelowThresholdError):
            discretize_kernel(POW2, 0.5)

    def test_points_per_rho_minimum(self):
        with pytest.raises(ValueError):
            discretize_kernel(POW2, 4.0, 5)


class TestNumericNorm:
    def test_matches_dense_svd(self):
        disc = discretize_kernel(POW1, 2.0, 20)
        mat, shift = disc.scaled_matrix()
        assert numeric_norm(disc) == pytest.approx(math.log(oracles.dense_sigma_max(mat)) + shift, abs=1e-8)

    def test_pow1_near_asymptote(self):
        disc = discretize_kernel(POW1, 2.0, 20)
        assert abs(numeric_norm(disc) - 4.5724) <= 0.2

    def test_indicator_kernel(self):
        x = np.linspace(-2, 2, 201)
        h = x[1] - x[0]
        w = np.full(x.size, h)
        w[[0, -1]] = 0.5 * h
        inside = (x >= 0) & (x <= 1)
        lk = np.where(inside[:, None] & inside[None, :], 0.0, -np.inf)
        lk[np.tril_indices(x.size)] = -np.inf
        disc = KernelDiscretization(nodes=x, weights=w, log_kernel=lk, lam=0.0, L=2.0)
        mat, shift = disc.scaled_matrix()
        assert math.exp(numeric_norm(disc)) == pytest.approx(oracles.dense_sigma_max(mat) * math.exp(shift), rel=1e-8)

    def test_complex_matrix(self):
        rng = np.random.default_rng(1)
        mat = rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30))
        assert largest_singular_value(mat) == pytest.approx(oracles.dense_sigma_max(mat), rel=1e-8)

    def test_zero_matrix(self):
        assert largest_singular_value(np.zeros((4, 4))) == 0.0

    def test_non_convergence_reported(self):
        mat = np.diag([1.0, 0.999999, 0.5])
        with pytest.raises(ConvergenceError, match="Rayleigh"):
            largest_singular_value(mat, rtol=1e-16, max_iter=3)

    def test_refinement(self):
        a = numeric_norm(discretize_kernel(POW1, 2.0, 20))
        b = numeric_norm(discretize_kernel(POW1, 2.0, 40))
        assert abs(a - b) <= 1e-3

    def test_deterministic(self):
        disc = discretize_kernel(POW1, 2.0, 20)
        assert numeric_norm(disc, seed=5) == numeric_norm(disc, seed=5)

    def test_convergence_to_asymptote(self):
        gaps = []
        for lam in (4.0, 6.25, 9.0):
            prof = profile(POW2, lam)
            gaps.append(abs(numeric_norm(discretize_kernel(POW2, lam, prof=prof)) - asymptotic_norm(prof)))
        assert gaps[0] >= gaps[1] >= gaps[2]
        assert gaps[2] <= 0.5

    @pytest.mark.parametrize("lam", [-1.0, -2.0, -5.0])
    def test_accretive(self, lam):
        assert numeric_norm(discretize_kernel(POW2, lam)) <= -math.log(abs(lam))


class TestBounds:
    @pytest.mark.parametrize(
        "spec,lam",
        [("pow:1", 2.0), ("pow:1", 3.0), ("pow:2", 4.0), ("pow:2", 9.0), ("logpow:1", 2.0), ("logpow:1", 3.0), ("exppow:1", 9.0), ("exppow:1", 15.0)],
    )
    def test_sandwich(self, spec, lam):
        fam, p = spec.split(":")
        est = estimate_resolvent(make_potential(fam, float(p)), lam)
        assert est.log_witness_lower <= est.log_numeric + 1e-6
        assert est.log_numeric <= est.log_schur_upper + 1e-6

    def test_schur_against_bruteforce(self):
        prof = profile(POW1, 2.0)
        a = prof.x_lambda + prof.delta_lambda
        # exact action of W = |x| at lambda = 2
        ref = oracles.schur_constant(lambda x: 2.0 * x - 0.5 * x * abs(x), a, np.linspace(-a - 3, 12, 600), upper=40.0)
        val = schur_upper_bound(POW1, 2.0)
        assert ref <= val
        assert val - ref <= 2e-3

    def test_schur_approaches_asymptote(self):
        gaps = [schur_upper_bound(POW2, lam) - asymptotic_norm(profile(POW2, lam)) for lam in (4.0, 9.0, 16.0)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    def test_schur_full_output(self):
        val, grid, ratio = schur_upper_bound(POW2, 4.0, full_output=True)
        assert grid.shape == ratio.shape
        assert np.max(ratio) <= val

    def test_witness_approaches_asymptote(self):
        gaps = [abs(witness_lower_bound(POW2, lam) - asymptotic_norm(profile(POW2, lam))) for lam in (4.0, 9.0, 16.0)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_witness_is_a_rayleigh_ratio(self):
        # for v = exp(f) on the plus window, <T v, v'> / |v|^2 with v' = exp(-f) on the minus window
        lam = 4.0
        prof = profile(POW2, lam)
        disc = discretize_kernel(POW2, lam, 40, prof=prof)
        x, f = disc.nodes, f_lambda(POW2, lam, disc.nodes)
        d = prof.delta_lambda
        plus = np.abs(x - prof.x_lambda) <= d
        minus = np.abs(x + prof.x_lambda) <= d
        v = np.where(plus, np.exp(f - prof.f_at_xlambda), 0.0)
        u = np.where(minus, np.exp(-f - prof.f_at_xlambda), 0.0)
        mat = np.exp(disc.log_kernel) * disc.weights[None, :]
        ratio = (u * disc.weights) @ (mat @ v) / math.sqrt((v**2 * disc.weights).sum() * (u**2 * disc.weights).sum())
        assert math.log(ratio) <= numeric_norm(disc) + 1e-9
        assert math.log(ratio) == pytest.approx(witness_lower_bound(POW2, lam, prof=prof), abs=0.05)


class TestIdentityAndModulation:
    def test_second_order(self):
        r = [resolvent_identity_check(POW2, 4.0, bump, ppr) for ppr in (40, 80, 160)]
        assert r[0] / r[1] == pytest.approx(4.0, rel=0.05)
        assert r[1] / r[2] == pytest.approx(4.0, rel=0.05)

    def test_zero_input(self):
        assert resolvent_identity_check(POW2, 4.0, np.zeros_like) == 0.0

    @pytest.mark.parametrize("beta", [1.0, 10.0])
    def test_modulation(self, beta):
        disc = discretize_kernel(POW2, 4.0)
        assert modulation_invariance_check(disc, beta) <= 1e-6

    def test_modulation_zero(self):
        assert modulation_invariance_check(discretize_kernel(POW2, 4.0), 0.0) == 0.0


class TestEstimate:
    def test_guard_skips_numeric(self):
        est = estimate_resolvent(POW2, 40.0)
        assert est.guard and est.log_numeric is None
        assert est.log_witness_lower <= est.log_asymptotic <= est.log_schur_upper

    def test_guard_required(self):
        with pytest.raises(OverflowGuardError):
            estimate_resolvent(POW2, 40.0, require_numeric=True)

    def test_as_dict(self):
        d = estimate_resolvent(POW1, 2.0).as_dict()
        assert set(d) == {"lambda", "log_asymptotic", "log_numeric", "log_schur_upper", "log_witness_lower", "guard"}
        assert d["log_asymptotic"] == pytest.approx(4.572365, abs=1e-6)
