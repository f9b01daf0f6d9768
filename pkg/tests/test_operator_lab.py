import math
from dataclasses import dataclass

import numpy as np
import pytest

from sigrecon.bench import hard_instance_errors
from sigrecon.errors import DegenerateSpectrum, DomainError
from sigrecon.measure import (
    Bandlimited,
    CauchyLorentz,
    Gaussian,
    GaussianMixture,
    Multiband,
    Prior,
    Sparse,
)
from sigrecon.operator_lab import (
    alpha_for,
    analytic_stat_dim_bound,
    discretize,
    eig_count,
    hard_instance,
    leverage_from_spectrum,
    leverage_profile,
    operator_matrix,
    stat_dim,
    stat_dim_checked,
)
from sigrecon.signals import mean_sq_error

DIRAC = Sparse(((0.0, 1.0),))
PRIORS = [
    Bandlimited(5.0),
    Multiband(((-5.0, 1.0), (5.0, 1.0))),
    Gaussian(3.0),
    CauchyLorentz(2.0),
    Sparse(tuple((f, 1 / 6) for f in (-7.5, -4.5, -1.5, 1.5, 4.5, 7.5))),
    GaussianMixture(((2.0, 1.0, 0.4), (-1.0, 0.5, 0.6))),
]


@pytest.fixture(scope="module")
def bl5():
    return discretize(Bandlimited(5.0), 1.0, 512)


@dataclass(frozen=True)
class HalfHalf(Prior):
    """Equal mixture of two centred bandlimited priors (test-only family)."""

    F1: float
    F2: float

    def _kernel(self, dt):
        return 0.5 * Bandlimited(self.F1)._kernel(dt) + 0.5 * Bandlimited(self.F2)._kernel(dt)


@dataclass(frozen=True)
class Scaled(Prior):
    """``gamma`` times a probability measure: kernel scales by ``gamma``."""

    base: Prior
    gamma: float

    def _kernel(self, dt):
        return self.gamma * self.base._kernel(dt)


class TestDiscretize:
    def test_single_atom(self):
        lam = discretize(Sparse(((3.3, 1.0),)), 1.0, 64).eigenvalues
        assert lam[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.abs(lam[1:]) <= 1e-10)

    @pytest.mark.parametrize("prior", PRIORS)
    def test_trace_is_one(self, prior):
        sp = discretize(prior, 2.0, 128)
        assert sp.trace == pytest.approx(1.0, abs=1e-8)
        assert sp.raw_min >= -1e-10

    def test_grid_is_midpoint(self):
        sp = discretize(Gaussian(1.0), 2.0, 16)
        assert np.allclose(sp.grid_times, (np.arange(1, 17) - 0.5) * 2.0 / 16)

    def test_matrix_is_hermitian_toeplitz(self):
        prior = GaussianMixture(((2.0, 1.0, 0.4), (-1.0, 0.5, 0.6)))
        A = operator_matrix(prior, 1.0, 32)
        t = (np.arange(32) + 0.5) / 32
        assert np.allclose(A, prior.kernel(t[:, None] - t[None, :]) / 32, atol=1e-16)
        assert np.array_equal(A, A.conj().T)

    def test_self_convergence(self):
        a = stat_dim(discretize(Bandlimited(5.0), 1.0, 512), 1e-3)
        b = stat_dim(discretize(Bandlimited(5.0), 1.0, 1024), 1e-3)
        assert abs(a - b) <= 0.01 * b

    def test_rejects_small_grid(self):
        with pytest.raises(DomainError):
            discretize(Gaussian(1.0), 1.0, 8)

    def test_checked_reports_discrepancy(self):
        chk = stat_dim_checked(CauchyLorentz(2.0), 1.0, 1e-3, 256)
        assert set(chk) >= {"stat_dim", "stat_dim_2n", "rel_discrepancy"}
        assert chk["rel_discrepancy"] == pytest.approx(
            abs(chk["stat_dim_2n"] - chk["stat_dim"]) / chk["stat_dim_2n"])


class TestStatDim:
    @pytest.mark.parametrize("eps", [1e-3, 0.1, 2.0])
    def test_dirac(self, eps):
        assert stat_dim(discretize(DIRAC, 1.0, 32), eps) == pytest.approx(1 / (1 + eps), rel=1e-10)

    def test_huge_epsilon(self, bl5):
        assert stat_dim(bl5, 1e9) <= 1e-8

    def test_sparse_below_k(self):
        assert stat_dim(discretize(PRIORS[4], 1.0, 256), 1e-6) < 6

    def test_clamps_negative(self):
        assert stat_dim(np.array([0.5, -1e-12]), 0.5) == pytest.approx(0.5)

    @pytest.mark.parametrize("prior", PRIORS)
    def test_scaling_law(self, prior):
        lam = discretize(prior, 1.0, 256).eigenvalues
        for c in (0.5, 0.25, 0.125):
            assert stat_dim(lam, c * 1e-3) <= stat_dim(lam, 1e-3) / c

    def test_strictly_decreasing(self, bl5):
        vals = [stat_dim(bl5, e) for e in np.logspace(-8, 1, 30)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_subadditive_disjoint_bands(self):
        eps, n = 1e-3, 512
        both = stat_dim(discretize(Multiband(((-3.0, 1.0), (3.0, 1.0))), 1.0, n), eps)
        # s(mu/2, eps) = s(mu, 2 eps)
        left = stat_dim(discretize(Multiband(((-3.0, 1.0),)), 1.0, n), 2 * eps)
        right = stat_dim(discretize(Multiband(((3.0, 1.0),)), 1.0, n), 2 * eps)
        assert both <= left + right + 1e-3

    def test_subadditive_nested_bands(self):
        eps, n = 1e-3, 512
        both = stat_dim(discretize(HalfHalf(2.0, 5.0), 1.0, n), eps)
        half1 = stat_dim(discretize(Scaled(Bandlimited(2.0), 0.5), 1.0, n).eigenvalues, eps)
        half2 = stat_dim(discretize(Scaled(Bandlimited(5.0), 0.5), 1.0, n).eigenvalues, eps)
        assert half1 == pytest.approx(stat_dim(discretize(Bandlimited(2.0), 1.0, n), 2 * eps), rel=1e-10)
        assert both <= half1 + half2 + 1e-3

    @pytest.mark.parametrize("prior", PRIORS[:5])
    @pytest.mark.parametrize("eps", [1e-1, 1e-3, 1e-5])
    def test_analytic_bound_dominates(self, prior, eps):
        bound = analytic_stat_dim_bound(prior, 1.0, eps)
        assert bound >= stat_dim_checked(prior, 1.0, eps, 256)["stat_dim_2n"]

    def test_no_bound_for_mixture(self):
        assert analytic_stat_dim_bound(PRIORS[5], 1.0, 1e-3) is None


class TestEigCount:
    def test_dirac(self):
        assert eig_count(discretize(DIRAC, 1.0, 32), 0.5) == 1

    def test_above_one(self, bl5):
        assert eig_count(bl5, 1.01) == 0

    def test_bandlimited_range(self):
        a = eig_count(discretize(Bandlimited(5.0), 1.0, 1024), 1e-3)
        b = eig_count(discretize(Bandlimited(5.0), 1.0, 2048), 1e-3)
        assert a == b
        assert 2 * 5 - 2 <= a <= 2 * 5 + 3 * math.log(1e3)

    @pytest.mark.parametrize("eps", [1e-6, 1e-3, 1e-2])
    def test_at_most_twice_stat_dim(self, bl5, eps):
        assert eig_count(bl5, eps) <= 2 * stat_dim(bl5, eps)


class TestLeverage:
    @pytest.mark.parametrize("prior", PRIORS)
    def test_integral_identity(self, prior):
        prof = leverage_profile(prior, 1.0, 256, 1e-3)
        assert abs(prof.integral() - prof.stat_dim) <= 1e-6

    @pytest.mark.parametrize("prior", PRIORS[:5])
    def test_time_reversal(self, prior):
        tau = leverage_profile(prior, 1.0, 256, 1e-3).tau_hat
        assert np.max(np.abs(tau - tau[::-1])) <= 1e-8

    @pytest.mark.parametrize("prior", PRIORS)
    def test_gap_bound(self, prior):
        prof = leverage_profile(prior, 1.0, 512, 1e-3)
        t = prof.grid_times
        assert np.all(prof.tau_hat <= prof.stat_dim / np.minimum(t, 1 - t))

    def test_matches_direct_solve(self):
        prior = GaussianMixture(((2.0, 1.0, 0.4), (-1.0, 0.5, 0.6)))
        n, T, eps = 64, 2.0, 1e-2
        A = operator_matrix(prior, T, n)
        direct = (n / T) * np.real(np.diag(A @ np.linalg.inv(A + eps * np.eye(n))))
        prof = leverage_profile(prior, T, n, eps)
        assert np.allclose(prof.tau_hat, direct, atol=1e-10)

    def test_nonnegative(self, bl5):
        assert np.all(leverage_from_spectrum(bl5, 1e-4).tau_hat >= 0)


@pytest.fixture(scope="module")
def spectrum_1e4():
    return discretize(Bandlimited(10.0), 1.0, 256)


class TestHardInstance:
    def test_degenerate(self, spectrum_1e4):
        # top eigenvalues sit near 1/(2FT) = 0.05 < 72 eps
        with pytest.raises(DegenerateSpectrum):
            hard_instance(spectrum_1e4, 1e-3, 0)

    def test_deterministic(self, spectrum_1e4):
        a, b = hard_instance(spectrum_1e4, 1e-4, 3), hard_instance(spectrum_1e4, 1e-4, 3)
        assert np.array_equal(a.coeffs, b.coeffs)
        assert np.array_equal(a.meta["grid_values"], b.meta["grid_values"])

    def test_chi_squared_mean(self, spectrum_1e4):
        norms = [np.sum(hard_instance(spectrum_1e4, 1e-4, sd).meta["c"] ** 2) for sd in range(200)]
        assert 0.8 <= np.mean(norms) <= 1.2

    def test_energy_and_grid_values(self, spectrum_1e4):
        sig = hard_instance(spectrum_1e4, 1e-4, 5)
        assert sig.energy == pytest.approx(sig.meta["energy_estimate"], rel=1e-8)
        assert np.allclose(sig(spectrum_1e4.grid_times), sig.meta["grid_values"], atol=1e-10)
        ms = np.mean(np.abs(sig.meta["grid_values"]) ** 2)
        assert ms == pytest.approx(np.sum(sig.meta["c"] ** 2), rel=1e-10)

    def test_asymmetric_prior(self):
        sp = discretize(GaussianMixture(((2.0, 1.0, 0.4), (-1.0, 0.5, 0.6))), 1.0, 128)
        sig = hard_instance(sp, 1e-4, 1)
        assert np.allclose(sig(sp.grid_times), sig.meta["grid_values"], atol=1e-9)
        assert sig.energy == pytest.approx(sig.meta["energy_estimate"], rel=1e-8)

    def test_too_few_samples_fail(self, spectrum_1e4):
        m = eig_count(spectrum_1e4, 72e-4)
        errs = hard_instance_errors(spectrum_1e4, 1e-4, max(1, m // 40), range(20), n_quad=512)
        assert np.median([e["mse"] for e in errs]) >= 0.05

    def test_ample_samples_succeed(self):
        """The hard-instance check at a ridge level where the construction is non-empty."""
        sp = discretize(Bandlimited(10.0), 1.0, 1024)
        eps = 1e-4
        m = eig_count(sp, 72 * eps)
        assert m >= 15
        lo = hard_instance_errors(sp, eps, max(1, m // 40), range(20), n_quad=1024)
        hi = hard_instance_errors(sp, eps, 10 * m, range(20), n_quad=1024)
        assert np.median([e["mse"] for e in lo]) >= 0.05
        assert np.median([e["mse"] for e in hi]) <= np.median([6 * eps * e["energy"] + 0.01 for e in hi])


class TestAlphaSource:
    def test_analytic(self):
        info = alpha_for(Bandlimited(2.0), 1.0, 1e-3)
        assert info["alpha_source"] == "analytic-bound"
        assert info["alpha"] == 256 * analytic_stat_dim_bound(Bandlimited(2.0), 1.0, 1e-3)

    def test_fallback_to_numeric(self):
        info = alpha_for(PRIORS[5], 1.0, 1e-3, n=128)
        assert info["alpha_source"] == "numeric-statdim"
        assert info["alpha"] >= 128 and "rel_discrepancy" in info

    def test_explicit(self):
        assert alpha_for(Gaussian(1.0), 1.0, 1e-3, "explicit", alpha=500.0)["alpha"] == 500.0
        with pytest.raises(DomainError):
            alpha_for(Gaussian(1.0), 1.0, 1e-3, "explicit")


def test_hard_instance_mean_square_matches_quadrature():
    sp = discretize(Bandlimited(4.0), 1.0, 256)
    sig = hard_instance(sp, 1e-4, 2)
    ms = mean_sq_error(sig, None, 1.0, 2048)
    assert ms.value == pytest.approx(np.sum(sig.meta["c"] ** 2), rel=0.05)
