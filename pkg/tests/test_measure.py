import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigrecon.errors import NonNormalized, NonPositiveScale, OverlappingBands, PriorError
from sigrecon.measure import (
    Bandlimited,
    CauchyLorentz,
    Gaussian,
    GaussianMixture,
    Multiband,
    NumericDensity,
    Sparse,
    kernel_quadrature,
    kernel_value,
    prior_from_dict,
    prior_from_json,
    validate,
)

SYMMETRIC = [
    Bandlimited(1.3),
    Multiband(((5.0, 1.0), (-5.0, 1.0))),
    Gaussian(2.0),
    CauchyLorentz(0.7),
    GaussianMixture(((1.0, 0.5, 0.5), (-1.0, 0.5, 0.5))),
    Sparse(((2.0, 0.25), (-2.0, 0.25), (0.0, 0.5))),
    NumericDensity.from_table([-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
]
ASYMMETRIC = [
    Multiband(((2.0, 0.5), (-1.0, 0.3))),
    GaussianMixture(((1.0, 0.5, 0.3), (-2.0, 0.3, 0.7))),
    Sparse(((1.5, 0.4), (-2.0, 0.6))),
]
ALL = SYMMETRIC + ASYMMETRIC


def triangle(x):
    return np.clip(1.0 - np.abs(x), 0.0, None)


class TestValidate:
    def test_bandlimited_ok(self):
        validate(Bandlimited(1.0))

    def test_sparse_masses_must_sum_to_one(self):
        with pytest.raises(NonNormalized):
            validate(Sparse(((0.0, 0.5), (3.0, 0.6))))

    def test_overlapping_bands(self):
        with pytest.raises(OverlappingBands):
            validate(Multiband(((0.0, 1.0), (1.5, 1.0))))

    def test_touching_bands_are_fine(self):
        validate(Multiband(((0.0, 1.0), (2.0, 1.0))))

    @pytest.mark.parametrize("prior", [Bandlimited(0.0), Gaussian(-1.0), CauchyLorentz(0.0),
                                       Multiband(((0.0, 0.0),)),
                                       GaussianMixture(((0.0, 0.0, 1.0),))])
    def test_nonpositive_scale(self, prior):
        with pytest.raises(NonPositiveScale):
            validate(prior)

    def test_mixture_weights(self):
        with pytest.raises(NonNormalized):
            validate(GaussianMixture(((0.0, 1.0, 0.5), (1.0, 1.0, 0.4))))

    def test_negative_atom_mass(self):
        with pytest.raises(NonNormalized):
            validate(Sparse(((0.0, 1.5), (1.0, -0.5))))

    def test_numeric_density_is_normalized_at_construction(self):
        prior = NumericDensity(lambda x: 7.0 * triangle(x), 1.0)
        validate(prior)
        assert prior.pdf(0.0) == pytest.approx(1.0, rel=1e-10)

    def test_numeric_zero_density(self):
        with pytest.raises(NonNormalized):
            validate(NumericDensity(lambda x: np.zeros_like(x), 1.0))

    def test_errors_share_a_base(self):
        assert issubclass(OverlappingBands, PriorError)


class TestKernelValue:
    @pytest.mark.parametrize("prior", ALL)
    def test_unit_at_zero(self, prior):
        assert kernel_value(prior, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_closed_form_priors_exactly_one_at_zero(self):
        for prior in ALL[:-1]:
            if not isinstance(prior, NumericDensity):
                assert kernel_value(prior, 0.0) == 1.0 + 0.0j

    def test_sinc_zero(self):
        assert abs(kernel_value(Bandlimited(1.0), 0.5)) < 1e-16

    def test_laplacian_value(self):
        assert kernel_value(CauchyLorentz(1.0), 1.0).real == pytest.approx(1.8674427317079893e-3, rel=1e-12)
        assert kernel_value(CauchyLorentz(1.0), 1.0).real == pytest.approx(math.exp(-2 * math.pi), rel=1e-14)

    def test_gaussian_value(self):
        assert kernel_value(Gaussian(2.0), 0.25).real == pytest.approx(
            math.exp(-2 * math.pi**2 * 4 * 0.0625), rel=1e-14)

    def test_multiband_matches_quadrature(self):
        prior = Multiband(((5.0, 1.0), (-5.0, 1.0)))
        assert abs(kernel_value(prior, 0.3) - kernel_quadrature(prior, 0.3, 1e-10)) <= 1e-8

    def test_multiband_reference_formula(self):
        # (1 / (2 pi sum F dt)) sum_j exp(-2 pi i c_j dt) sin(2 pi F_j dt)
        bands = ((2.0, 0.5), (-1.0, 0.3))
        dt = 0.37
        total = sum(w for _, w in bands)
        ref = sum(cmath.exp(-2j * math.pi * c * dt) * math.sin(2 * math.pi * w * dt) for c, w in bands)
        ref /= 2 * math.pi * total * dt
        assert kernel_value(Multiband(bands), dt) == pytest.approx(ref, abs=1e-15)

    def test_taylor_branch_continuity(self):
        prior = Bandlimited(1.0)
        x = 1e-6 / (2 * math.pi)
        below, above = kernel_value(prior, x * 0.999999), kernel_value(prior, x * 1.000001)
        assert abs(below - above) < 1e-15

    def test_sparse_trig_sum(self):
        prior = Sparse(((1.5, 0.4), (-2.0, 0.6)))
        dt = 0.21
        ref = 0.4 * cmath.exp(-2j * math.pi * 1.5 * dt) + 0.6 * cmath.exp(2j * math.pi * 2.0 * dt)
        assert kernel_value(prior, dt) == pytest.approx(ref, abs=1e-15)

    def test_vectorized_matches_scalar(self):
        prior = GaussianMixture(((1.0, 0.5, 0.3), (-2.0, 0.3, 0.7)))
        dts = np.linspace(-2, 2, 17)
        vec = kernel_value(prior, dts)
        assert vec.shape == (17,)
        assert all(vec[i] == kernel_value(prior, d) for i, d in enumerate(dts))

    @pytest.mark.parametrize("prior", ALL)
    def test_hermitian_symmetry(self, prior):
        dts = np.linspace(0.01, 3.0, 50)
        a, b = kernel_value(prior, -dts), np.conj(kernel_value(prior, dts))
        if isinstance(prior, NumericDensity):
            assert np.max(np.abs(a - b)) <= 1e-10
        else:
            assert np.array_equal(a, b)

    @pytest.mark.parametrize("prior", SYMMETRIC)
    def test_symmetric_priors_are_real(self, prior):
        assert prior.symmetric
        k = kernel_value(prior, np.linspace(-3, 3, 101))
        assert np.max(np.abs(k.imag)) <= 1e-10 * max(1.0, np.max(np.abs(k)))

    @pytest.mark.parametrize("prior", ASYMMETRIC)
    def test_asymmetric_flag(self, prior):
        assert not prior.symmetric

    @pytest.mark.parametrize("prior", ALL)
    def test_bounded_by_one(self, prior):
        k = kernel_value(prior, np.linspace(-5, 5, 201))
        assert np.max(np.abs(k)) <= 1 + 1e-10

    @pytest.mark.parametrize("prior", ALL)
    def test_gram_positive_semidefinite(self, prior):
        t = np.sort(np.random.default_rng(3).uniform(0, 4, 64))
        gram = kernel_value(prior, t[:, None] - t[None, :])
        assert np.linalg.eigvalsh(gram).min() >= -1e-8 * 64


class TestQuadrature:
    def test_gaussian_unit(self):
        assert abs(kernel_quadrature(Gaussian(1.0), 0.0, 1e-10) - 1.0) <= 1e-10

    def test_gaussian_value(self):
        ref = math.exp(-2 * math.pi**2 * 4 * 0.0625)
        assert abs(kernel_quadrature(Gaussian(2.0), 0.25, 1e-10) - ref) <= 1e-10

    def test_triangle_numeric_density(self):
        # Fourier transform of the unit triangle: sinc^2(dt) with sin(pi u)/(pi u)
        prior = NumericDensity(triangle, 1.0)
        oracle = kernel_quadrature(prior, 0.7, 1e-12)
        assert abs(oracle - np.sinc(0.7) ** 2) <= 1e-11
        assert abs(kernel_quadrature(prior, 0.7, 1e-8) - oracle) <= 1e-8
        assert abs(kernel_value(prior, 0.7) - oracle) <= 1e-8

    def test_cauchy_tail(self):
        prior = CauchyLorentz(1.5)
        for dt in (0.0, 0.01, 0.4, 2.0):
            assert abs(kernel_quadrature(prior, dt, 1e-9) - kernel_value(prior, dt)) <= 1e-9

    def test_quadrature_hermitian(self):
        prior = GaussianMixture(((1.0, 0.5, 0.3), (-2.0, 0.3, 0.7)))
        a = kernel_quadrature(prior, -0.3, 1e-10)
        b = kernel_quadrature(prior, 0.3, 1e-10).conjugate()
        assert abs(a - b) <= 1e-10

    def test_rejects_nonpositive_tol(self):
        with pytest.raises(ValueError):
            kernel_quadrature(Gaussian(1.0), 0.1, 0.0)

    def test_nonconvergence_is_reported(self):
        from sigrecon.errors import QuadratureNonConvergent

        with pytest.raises(QuadratureNonConvergent):
            kernel_quadrature(NumericDensity(triangle, 1.0), 0.3, 1e-14, limit=1)


@settings(max_examples=60, deadline=None)
@given(F=st.floats(0.05, 20.0), dt=st.floats(-5.0, 5.0))
def test_bandlimited_oracle_property(F, dt):
    prior = Bandlimited(F)
    assert abs(kernel_value(prior, dt) - kernel_quadrature(prior, dt, 1e-9)) <= 1e-7


@settings(max_examples=60, deadline=None)
@given(c=st.floats(-10, 10), s=st.floats(0.1, 3.0), dt=st.floats(-2.0, 2.0))
def test_mixture_oracle_property(c, s, dt):
    prior = GaussianMixture(((c, s, 1.0),))
    assert abs(kernel_value(prior, dt) - kernel_quadrature(prior, dt, 1e-9)) <= 1e-7


class TestSerialization:
    @pytest.mark.parametrize("prior", [p for p in ALL])
    def test_round_trip(self, prior):
        back = prior_from_json(prior.to_json())
        dts = np.linspace(-2, 2, 9)
        assert np.array_equal(kernel_value(back, dts), kernel_value(prior, dts))

    def test_unknown_type(self):
        with pytest.raises(PriorError):
            prior_from_dict({"type": "matern"})

    def test_loading_validates(self):
        with pytest.raises(NonNormalized):
            prior_from_dict({"type": "sparse", "atoms": [[0, 0.5], [3, 0.6]]})

    def test_callable_density_not_serializable(self):
        with pytest.raises(TypeError):
            NumericDensity(triangle, 1.0).to_dict()
