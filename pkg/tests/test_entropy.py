import math

import numpy as np
import pytest

from lpentropy import (
    BandwidthRule,
    ConvergenceError,
    DensityEstimate,
    Finite,
    Geometric,
    Grid,
    InnovationModel,
    SampleSeries,
    ThresholdOrderWarning,
    ThresholdRule,
    bandwidth,
    default_grid,
    gaussian_density,
    get_kernel,
    innovation_density,
    integral_estimator,
    kde_on_grid,
    level_set,
    marginal_density_by_convolution,
    materialize_coefficients,
    quadrature_entropy,
    simulate,
    symmetric_grid,
    threshold,
    true_entropy_gaussian,
    truncated_true_term,
)

EPA = get_kernel("epanechnikov")
GAUSS = InnovationModel("gaussian", 1.0)

STD_NORMAL_ENTROPY = 0.5 * math.log(2 * math.pi * math.e)


def synthetic_estimate(grid, values, h=0.1, n=1):
    return DensityEstimate(
        grid=grid, values=np.asarray(values, dtype=float), bandwidth=h, n=n, kernel=EPA
    )


# --- threshold rule -------------------------------------------------------


@pytest.mark.parametrize("kappa", [0.0, 1.0, 1.2, -0.3])
def test_threshold_exponent_must_be_inside_unit_interval(kappa):
    with pytest.raises(ValueError, match=r"\(0, 1\)"):
        ThresholdRule(exponent=kappa)


def test_threshold_value_at_100():
    assert threshold(100) == pytest.approx(0.61110988612115, abs=1e-9)


def test_threshold_to_bandwidth_ratio_grows():
    r1 = threshold(10**3) / bandwidth(10**3)
    r2 = threshold(10**6) / bandwidth(10**6)
    assert r2 > r1 > 1.0


def test_threshold_warns_when_not_exceeding_bandwidth():
    with pytest.warns(ThresholdOrderWarning):
        threshold(1000, ThresholdRule(constant=0.005))


# --- level sets -----------------------------------------------------------


def test_level_set_constant_estimate_is_whole_grid():
    grid = Grid(0.0, 1.0, 11)
    est = synthetic_estimate(grid, np.full(11, 0.5))
    ls = level_set(est, 0.4)
    assert ls.intervals == ((0.0, 1.0),)
    assert ls.total_length == pytest.approx(1.0)


def test_level_set_above_maximum_is_empty():
    grid = Grid(0.0, 1.0, 11)
    est = synthetic_estimate(grid, np.full(11, 0.5))
    ls = level_set(est, 0.6)
    assert ls.is_empty


def test_level_set_requires_positive_gamma():
    grid = Grid(0.0, 1.0, 11)
    est = synthetic_estimate(grid, np.full(11, 0.5))
    with pytest.raises(ValueError, match="gamma"):
        level_set(est, 0.0)


def test_bimodal_two_samples_give_two_intervals():
    series = SampleSeries(values=np.array([-2.0, 2.0]), n=2, provenance=())
    grid = default_grid(series, 0.5, EPA)
    est = kde_on_grid(series, EPA, 0.5, grid)
    # each sample contributes a bump peaking at K(0)/(2*0.5) = 0.75
    ls = level_set(est, 0.3)
    assert len(ls.intervals) == 2
    assert ls.intervals[0][1] < 0 < ls.intervals[1][0]


def test_level_set_containment_is_interval_wise():
    series = simulate(GAUSS, materialize_coefficients(Geometric(0.5)), 600, seed=21)
    h = bandwidth(600)
    est = kde_on_grid(series, EPA, h, default_grid(series, h, EPA))
    small = level_set(est, 0.05)
    large = level_set(est, 0.12)
    for lo, hi in large.intervals:
        assert any(a <= lo and hi <= b for a, b in small.intervals)


# --- integral estimator ---------------------------------------------------


def test_empty_level_set_gives_zero():
    grid = Grid(0.0, 1.0, 11)
    est = synthetic_estimate(grid, np.full(11, 0.2))
    result = integral_estimator(est, 0.5)
    assert result.value == 0.0
    assert result.level_set.is_empty
    assert result.diagnostics.interval_count == 0


def test_unit_density_has_zero_entropy():
    grid = Grid(0.0, 1.0, 101)
    est = synthetic_estimate(grid, np.ones(101))
    assert integral_estimator(est, 0.5).value == 0.0


def test_triangular_density_matches_fine_quadrature():
    grid = Grid(-1.0, 1.0, 20001)
    tri = np.maximum(0.0, 1.0 - np.abs(grid.nodes()))
    est = synthetic_estimate(grid, tri)
    result = integral_estimator(est, 0.1)
    oracle = quadrature_entropy(
        lambda x: np.maximum(0.0, 1.0 - np.abs(x)), (-0.9, 0.9), 1e-10
    )
    assert result.value == pytest.approx(oracle, abs=1e-4)


def test_estimator_on_tabulated_truth_approaches_exact_entropy():
    grid = Grid(-10.0, 10.0, 40001)
    est = synthetic_estimate(grid, gaussian_density(1.0)(grid.nodes()))
    result = integral_estimator(est, 1e-9)
    assert result.value == pytest.approx(STD_NORMAL_ENTROPY, abs=1e-4)


# --- oracles --------------------------------------------------------------


def test_gaussian_entropy_closed_form():
    assert true_entropy_gaussian(1.0) == pytest.approx(1.4189385332046727, abs=1e-12)
    assert true_entropy_gaussian(4.0 / 3.0) == pytest.approx(1.562779569430563, abs=1e-12)
    assert true_entropy_gaussian(1.0 / (2 * math.pi * math.e)) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        true_entropy_gaussian(0.0)


def test_quadrature_entropy_standard_normal():
    value = quadrature_entropy(gaussian_density(1.0), (-12.0, 12.0), 1e-8)
    assert value == pytest.approx(STD_NORMAL_ENTROPY, abs=1e-6)


def test_quadrature_entropy_uniform():
    uniform = lambda x: np.where((np.asarray(x) >= 0) & (np.asarray(x) <= 1), 1.0, 0.0)
    assert quadrature_entropy(uniform, (0.0, 1.0), 1e-8) == pytest.approx(0.0, abs=1e-6)


def test_quadrature_entropy_logistic():
    logistic = lambda x: innovation_density(InnovationModel("logistic", 1.0), x)
    assert quadrature_entropy(logistic, (-60.0, 60.0), 1e-8) == pytest.approx(2.0, abs=1e-6)


def test_quadrature_entropy_refinement_cap():
    spike = gaussian_density(1e-18)
    with pytest.raises(ConvergenceError):
        quadrature_entropy(spike, (-1.0, 1.0), 1e-12, max_refinements=3)


def test_quadrature_entropy_domain_validation():
    with pytest.raises(ValueError):
        quadrature_entropy(gaussian_density(1.0), (1.0, -1.0), 1e-8)


def test_truncated_term_on_full_support_matches_entropy():
    ls_full = level_set(
        synthetic_estimate(Grid(-12.0, 12.0, 3), np.ones(3)), 0.5
    )
    value = truncated_true_term(gaussian_density(1.0), ls_full, 1e-8)
    assert value == pytest.approx(STD_NORMAL_ENTROPY, abs=1e-6)


def test_truncated_term_empty_is_zero():
    grid = Grid(0.0, 1.0, 5)
    empty = level_set(synthetic_estimate(grid, np.zeros(5) + 0.1), 0.5)
    assert truncated_true_term(gaussian_density(1.0), empty) == 0.0


def test_truncated_term_standard_normal_unit_interval():
    # frozen against the closed form (P - 2 phi(1))/2 + P log(2 pi)/2 and an
    # independent adaptive quadrature, both give 0.7267237...
    from lpentropy import LevelSet

    ls = LevelSet(intervals=((-1.0, 1.0),), spans=((0, 1),), total_length=2.0, mass=0.68)
    value = truncated_true_term(gaussian_density(1.0), ls, 1e-10)
    assert value == pytest.approx(0.7267237020880961, abs=1e-8)


# --- convolution oracle ---------------------------------------------------


def test_convolution_matches_gaussian_closure():
    coeffs = materialize_coefficients(Geometric(0.5), m=40, tail_tolerance=1e-12)
    grid = symmetric_grid(8.0, 16001)
    table = marginal_density_by_convolution(GAUSS, coeffs, grid)
    exact = gaussian_density(4.0 / 3.0)(grid.nodes())
    assert np.max(np.abs(table.values - exact)) <= 1e-6
    assert table.mass == pytest.approx(1.0, abs=1e-9)


def test_convolution_identity_filter_returns_innovation_density():
    coeffs = materialize_coefficients(Finite((1.0,)))
    grid = symmetric_grid(10.0, 20001)
    table = marginal_density_by_convolution(GAUSS, coeffs, grid)
    exact = innovation_density(GAUSS, grid.nodes())
    assert np.max(np.abs(table.values - exact)) <= 1e-5


def test_convolution_logistic_pair_mass_and_variance():
    model = InnovationModel("logistic", 1.0)
    coeffs = materialize_coefficients(Finite((1.0, 0.5)))
    sigma = math.sqrt(model.variance * 1.25)
    grid = symmetric_grid(15 * sigma, 2 * int(15 * sigma / (1e-3 * sigma)) + 1)
    table = marginal_density_by_convolution(model, coeffs, grid)
    assert table.mass == pytest.approx(1.0, abs=1e-6)
    xs = grid.nodes()
    variance = float(np.sum(xs**2 * table.values) * grid.spacing)
    assert variance == pytest.approx(model.variance * 1.25, abs=1e-3)


def test_convolution_rejects_asymmetric_grid():
    coeffs = materialize_coefficients(Geometric(0.5))
    with pytest.raises(ValueError, match="symmetric"):
        marginal_density_by_convolution(GAUSS, coeffs, Grid(-1.0, 2.0, 301))


def test_convolution_reports_mass_deficit():
    coeffs = materialize_coefficients(Geometric(0.5))
    with pytest.raises(ValueError, match="mass"):
        marginal_density_by_convolution(GAUSS, coeffs, symmetric_grid(2.0, 4001))


def test_convolution_rejects_all_zero_coefficients():
    coeffs = materialize_coefficients(Finite((0.0, 0.0)))
    with pytest.raises(ValueError, match="zero"):
        marginal_density_by_convolution(GAUSS, coeffs, symmetric_grid(8.0, 1601))


def test_density_table_interpolation():
    coeffs = materialize_coefficients(Finite((1.0,)))
    grid = symmetric_grid(10.0, 2001)
    table = marginal_density_by_convolution(GAUSS, coeffs, grid)
    assert table.density(0.0) == pytest.approx(table.values[1000])
    assert table.density(99.0) == 0.0
    assert table.entropy(1e-6) == pytest.approx(STD_NORMAL_ENTROPY, abs=1e-3)


# --- end-to-end single estimate -------------------------------------------


def test_estimate_on_simulated_benchmark_process():
    coeffs = materialize_coefficients(Geometric(0.5))
    series = simulate(GAUSS, coeffs, 4000, seed=1)
    h = bandwidth(4000, BandwidthRule(1.0))
    est = kde_on_grid(series, EPA, h, default_grid(series, h, EPA))
    gamma = 0.005 * h**0.8
    result = integral_estimator(est, gamma)
    assert abs(result.value - true_entropy_gaussian(4.0 / 3.0)) < 0.1
    assert result.diagnostics.level_set_mass > 0.9
    assert np.isfinite(result.diagnostics.boundary_error_bound)
