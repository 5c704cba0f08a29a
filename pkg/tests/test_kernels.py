import math

import numpy as np
import pytest

from covasym.core import QuadratureSpec, derived_rng
from covasym.kernels import (
    dirichlet_moment,
    gef_partial_sum,
    gef_tail_bound,
    is_exact_zero_moment,
    kernel_convolution_measure,
    kernel_fourier,
    kernel_gef_zeros,
    kernel_ginibre,
    kernel_moments,
    kernel_poisson,
    load_radial_kernel,
    radial_moment,
    save_radial_kernel,
    sphere_surface_area,
    tensor_moment,
    triangular_covariance,
)

ZETA3 = 1.2020569031595943
ALL_BUILTINS = lambda: [
    kernel_poisson(2, 1.0),
    kernel_ginibre(),
    kernel_gef_zeros(),
    kernel_convolution_measure(1),
    kernel_convolution_measure(2),
]


class TestPoisson:
    def test_defect_is_intensity(self):
        k = kernel_poisson(2, 1.0)
        report = kernel_moments(k, 2)
        assert tensor_moment(k, (0, 0)) == 0.0
        assert report.defect == 1.0
        assert all(v == 0.0 for v in report.tensor.values())

    def test_radial_moments_vanish(self):
        k = kernel_poisson(1, 2.0)
        assert all(radial_moment(k, p) == 0.0 for p in range(6))

    def test_rejects_nonpositive_intensity(self):
        with pytest.raises(ValueError):
            kernel_poisson(3, 0.0)


class TestGinibre:
    def test_zeroth_moment_and_defect(self):
        k = kernel_ginibre()
        assert tensor_moment(k, (0, 0)) == pytest.approx(-1.0 / math.pi, abs=1e-10)
        assert kernel_moments(k, 2).defect == pytest.approx(0.0, abs=1e-10)

    def test_third_radial_moment(self):
        # truncation at the stored radius leaves a ~1e-12 tail by construction
        assert radial_moment(kernel_ginibre(), 3) == pytest.approx(
            -1.0 / (2.0 * math.pi**2), abs=1e-10
        )

    def test_second_tensor_moment_gaussian_oracle(self):
        # int z1^2 kappa dz for the Gaussian profile, in closed form
        assert tensor_moment(kernel_ginibre(), (2, 0)) == pytest.approx(
            -1.0 / (2.0 * math.pi), abs=1e-10
        )

    def test_transform_values(self):
        k = kernel_ginibre()
        assert kernel_fourier(k, np.zeros(2)) == pytest.approx(-1.0 / math.pi)
        assert kernel_fourier(k, np.array([2.0, 0.0])) == pytest.approx(
            -math.exp(-1.0) / math.pi, abs=1e-14
        )

    def test_total_variation(self):
        assert kernel_ginibre().total_variation == pytest.approx(1.0 / math.pi)


class TestGefZeros:
    def test_density_integral_full_sum(self):
        # quadrature of the summed series, NOT term by term: each individual
        # term integrates to zero over the plane
        k = kernel_gef_zeros()
        assert tensor_moment(k, (0, 0)) == pytest.approx(-1.0 / math.pi, abs=1e-6)

    def test_third_radial_moment_vanishes(self):
        assert abs(radial_moment(kernel_gef_zeros(), 3)) < 1e-8

    def test_fifth_radial_moment(self):
        assert radial_moment(kernel_gef_zeros(), 5) == pytest.approx(
            2.0 * ZETA3 / math.pi**2, abs=1e-6
        )

    def test_moment_report(self):
        rep = kernel_moments(kernel_gef_zeros(), 4)
        assert abs(rep.defect) < 1e-6
        assert all(rep.tensor[g] == pytest.approx(0.0, abs=1e-8) for g in [(2, 0), (1, 1), (0, 2)])
        assert rep.tensor[(4, 0)] == pytest.approx(3.0 * ZETA3 / (2.0 * math.pi), rel=1e-8)

    def test_density_near_origin_matches_coincidence_limit(self):
        # pair density with repulsion: kappa(0+) = -lambda^2
        k = kernel_gef_zeros()
        val = k.density_at(np.array([[1e-7, 0.0]]))[0]
        assert val == pytest.approx(-1.0 / math.pi**2, rel=1e-6)

    def test_partial_sum_within_certified_tail_bound(self):
        k = kernel_gef_zeros()
        u = np.linspace(0.15, 12.0, 200)
        full = k.density_at(
            np.stack([np.sqrt(u), np.zeros_like(u)], axis=-1)
        ) * math.pi**2
        for terms in (64, 128):
            partial = gef_partial_sum(u, terms)
            bound = gef_tail_bound(u, terms)
            assert np.all(np.abs(full - partial) <= bound + 1e-12)

    def test_series_terms_do_not_move_integrals(self):
        k64 = kernel_gef_zeros(64)
        k128 = kernel_gef_zeros(128)
        assert abs(tensor_moment(k64, (0, 0)) - tensor_moment(k128, (0, 0))) < 1e-8
        assert abs(radial_moment(k64, 3) - radial_moment(k128, 3)) < 1e-8
        assert abs(radial_moment(k64, 5) - radial_moment(k128, 5)) < 1e-8

    def test_transform_limits(self):
        k = kernel_gef_zeros()
        assert kernel_fourier(k, np.zeros(2)) == pytest.approx(-1.0 / math.pi, abs=1e-12)
        # structure factor vanishes quartically: khat + lambda_D ~ c t^4
        t = np.array([[0.2, 0.0], [0.4, 0.0]])
        s = kernel_fourier(k, t) + k.diagonal_intensity
        ratio = (s[1] / s[0])
        assert ratio == pytest.approx(16.0, rel=0.05)


class TestConvolutionMeasure:
    def test_zeroth_moment_vanishes_exactly(self):
        for p in (1, 2, 3):
            k = kernel_convolution_measure(p)
            assert tensor_moment(k, (0,)) == 0.0
            assert kernel_moments(k, 2).defect == 0.0

    def test_moments_below_order_2p_vanish(self):
        k = kernel_convolution_measure(2)
        for order in range(0, 4):
            assert tensor_moment(k, (order,)) == pytest.approx(0.0, abs=1e-8)
        assert tensor_moment(k, (4,)) != 0.0

    def test_p1_second_moment_matches_transform_curvature(self):
        # khat ~ sigma_hat(0) t^2/16, so I(2) = -2/16
        k = kernel_convolution_measure(1)
        assert tensor_moment(k, (2,)) == pytest.approx(-0.125, abs=1e-10)

    def test_zero_base_field(self):
        from covasym.kernels import RadialCovariance

        zero = RadialCovariance(
            func=lambda t: np.zeros_like(np.asarray(t, float)),
            support_radius=2.0,
        )
        k = kernel_convolution_measure(1, sigma_y=zero)
        z = np.linspace(-3, 3, 17)[:, None]
        assert np.all(k.density_at(z) == 0.0)

    def test_cost_guard(self):
        with pytest.raises(ValueError):
            kernel_convolution_measure(5)

    def test_transform_nonnegative(self):
        for p in (1, 2):
            k = kernel_convolution_measure(p)
            w = np.linspace(0.0, 40.0, 2001)
            assert np.all(k.fourier_radial(w) >= -1e-15)


class TestSharedInvariants:
    @pytest.mark.parametrize("kernel", ALL_BUILTINS(), ids=lambda k: k.name)
    def test_density_symmetry_on_random_points(self, kernel):
        rng = derived_rng(202)
        z = rng.uniform(-2.0, 2.0, size=(1000, kernel.dimension))
        assert np.allclose(kernel.density_at(z), kernel.density_at(-z), atol=1e-12)

    @pytest.mark.parametrize("kernel", ALL_BUILTINS(), ids=lambda k: k.name)
    def test_isotropy_on_random_rotations(self, kernel):
        if not kernel.isotropic or kernel.dimension != 2:
            pytest.skip("planar isotropic kernels only")
        rng = derived_rng(203)
        z = rng.uniform(-2.0, 2.0, size=(200, 2))
        theta = rng.uniform(0.0, 2.0 * math.pi, size=200)
        rot = np.stack(
            [
                z[:, 0] * np.cos(theta) - z[:, 1] * np.sin(theta),
                z[:, 0] * np.sin(theta) + z[:, 1] * np.cos(theta),
            ],
            axis=-1,
        )
        assert np.allclose(kernel.density_at(z), kernel.density_at(rot), atol=1e-10)

    @pytest.mark.parametrize("kernel", ALL_BUILTINS(), ids=lambda k: k.name)
    def test_structure_factor_nonnegative_on_grid(self, kernel):
        d = kernel.dimension
        axis = np.linspace(-8.0, 8.0, 64)
        if d == 1:
            pts = axis[:, None]
        else:
            mesh = np.meshgrid(*([axis] * d), indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = kernel_fourier(kernel, pts) + kernel.diagonal_intensity
        assert np.min(vals) >= -1e-8

    @pytest.mark.parametrize("kernel", ALL_BUILTINS(), ids=lambda k: k.name)
    def test_absolute_mass_below_total_variation(self, kernel):
        if kernel.total_variation == 0.0:
            return
        spec = QuadratureSpec(truncation_radius=kernel.truncation_radius)
        d = kernel.dimension
        from covasym.core import integrate_radial

        mass = sphere_surface_area(d) * integrate_radial(
            lambda r: r ** (d - 1),
            lambda r: np.abs(kernel.radial_density(r)),
            QuadratureSpec(
                truncation_radius=kernel.truncation_radius,
                relative_tolerance=1e-6,
            ),
        )
        assert mass <= kernel.total_variation * (1.0 + 1e-6) + 1e-12

    def test_isotropic_moments_two_routes(self):
        # tensor quadrature against the radial-moment x sphere-average route
        for kernel in (kernel_ginibre(), kernel_gef_zeros()):
            for gamma in [(2, 0), (0, 2), (2, 2), (4, 0)]:
                direct = _tensor_by_quadrature(kernel, gamma)
                reduced = (
                    sphere_surface_area(2)
                    * radial_moment(kernel, 1 + sum(gamma))
                    * dirichlet_moment(gamma)
                )
                if abs(reduced) < 1e-9:
                    assert abs(direct) < 1e-9
                else:
                    assert direct == pytest.approx(reduced, rel=1e-6)


def _tensor_by_quadrature(kernel, gamma):
    from covasym.core import integrate_tensor

    def monomial(z):
        out = np.ones(z.shape[:-1])
        for axis, g in enumerate(gamma):
            if g:
                out = out * z[..., axis] ** g
        return out

    spec = QuadratureSpec(
        truncation_radius=kernel.truncation_radius, relative_tolerance=1e-9
    )
    return integrate_tensor(monomial, kernel.density_at, spec, kernel.dimension)


class TestExactZeroRules:
    def test_odd_total_order(self):
        k = kernel_ginibre()
        assert is_exact_zero_moment(k, (1, 2))
        assert tensor_moment(k, (1, 2)) == 0.0

    def test_flip_invariance_kills_odd_components(self):
        k = kernel_ginibre()
        assert is_exact_zero_moment(k, (1, 1))
        assert tensor_moment(k, (1, 1)) == 0.0

    def test_moment_report_marks_exact_zeros(self):
        rep = kernel_moments(kernel_ginibre(), 2)
        assert rep.tensor[(1, 1)] == 0.0
        assert rep.tensor[(1, 0)] == 0.0


class TestTabulatedKernels:
    def test_round_trip_preserves_moments(self, tmp_path):
        k = kernel_ginibre()
        path = tmp_path / "kernel.txt"
        save_radial_kernel(path, k, radii=np.linspace(0.0, 5.5, 4096))
        loaded = load_radial_kernel(path)
        assert loaded.dimension == 2
        assert loaded.intensity == pytest.approx(k.intensity)
        assert loaded.diagonal_intensity == pytest.approx(k.diagonal_intensity)
        assert tensor_moment(loaded, (0, 0)) == pytest.approx(
            -1.0 / math.pi, abs=1e-6
        )
        assert radial_moment(loaded, 3) == pytest.approx(
            -1.0 / (2.0 * math.pi**2), abs=1e-6
        )
        assert loaded.total_variation == pytest.approx(1.0 / math.pi, rel=1e-4)

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0.0 1.0\n1.0 0.5\n")
        with pytest.raises(ValueError):
            load_radial_kernel(path)

    def test_transform_of_tabulated(self, tmp_path):
        path = tmp_path / "kernel.txt"
        save_radial_kernel(path, kernel_ginibre(), radii=np.linspace(0.0, 5.5, 4096))
        loaded = load_radial_kernel(path)
        val = kernel_fourier(loaded, np.array([2.0, 0.0]))
        assert val == pytest.approx(-math.exp(-1.0) / math.pi, abs=1e-5)


def test_triangular_covariance_transform():
    cov = triangular_covariance()
    w = np.linspace(0.0, 10.0, 101)
    direct = np.array(
        [
            np.trapezoid(
                cov.func(t := np.linspace(-2, 2, 4001)) * np.cos(wi * t), t
            )
            for wi in w
        ]
    )
    assert np.allclose(cov.fourier(w), direct, atol=1e-6)
