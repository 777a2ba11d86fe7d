import math

import numpy as np
import pytest
from scipy.stats import kstest

from lpentropy import (
    Finite,
    Geometric,
    Hyperbolic,
    InnovationModel,
    SampleSeries,
    classify_memory,
    materialize_coefficients,
    sample_innovations,
    simulate,
    stationary_variance,
)

GAUSS = InnovationModel("gaussian", 1.0)


def test_geometric_materialization():
    seq = materialize_coefficients(Geometric(0.5), m=3, tail_tolerance=0.01)
    np.testing.assert_array_equal(seq.values, [1.0, 0.5, 0.25, 0.125])
    assert seq.tail_sq == pytest.approx(0.25**4 / 0.75, rel=1e-12)


def test_finite_and_degenerate_geometric():
    seq = materialize_coefficients(Finite((1.0,)))
    np.testing.assert_array_equal(seq.values, [1.0])
    assert seq.tail_sq == 0.0

    zero = materialize_coefficients(Geometric(0.0), m=4, tail_tolerance=1e-12)
    np.testing.assert_array_equal(zero.values, [1.0, 0.0, 0.0, 0.0, 0.0])


def test_automatic_truncation_respects_tolerance():
    seq = materialize_coefficients(Geometric(0.5), tail_tolerance=1e-12)
    assert seq.tail_sq <= 1e-12
    tighter = materialize_coefficients(Geometric(0.5), tail_tolerance=1e-15)
    assert tighter.m > seq.m


def test_explicit_truncation_must_respect_tolerance():
    with pytest.raises(ValueError, match="exceeds tail_tolerance"):
        materialize_coefficients(Geometric(0.9), m=2, tail_tolerance=1e-12)


@pytest.mark.parametrize(
    "bad", [lambda: Geometric(1.0), lambda: Geometric(-1.2), lambda: Hyperbolic(0.5), lambda: Finite(())]
)
def test_invalid_schemes_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_memory_classification():
    geo = classify_memory(materialize_coefficients(Geometric(0.5)))
    assert geo.kind == "short"
    assert geo.absolutely_summable
    assert geo.coefficient_sum == pytest.approx(2.0)

    cancel = classify_memory(materialize_coefficients(Finite((1.0, -1.0))))
    assert cancel.kind == "long"
    assert cancel.absolutely_summable
    assert cancel.coefficient_sum == 0.0

    single = classify_memory(materialize_coefficients(Finite((1.0,))))
    assert single.kind == "short"

    hyper_long = classify_memory(
        materialize_coefficients(Hyperbolic(0.75), m=1000, tail_tolerance=1.0)
    )
    assert hyper_long.kind == "long"
    assert not hyper_long.absolutely_summable

    hyper_short = classify_memory(materialize_coefficients(Hyperbolic(1.5), tail_tolerance=1e-6))
    assert hyper_short.kind == "short"


def test_iid_simulation_variance():
    series = simulate(GAUSS, materialize_coefficients(Finite((1.0,))), 10**5, seed=3)
    assert abs(series.values.var() - 1.0) < 0.015


def test_geometric_simulation_variance():
    coeffs = materialize_coefficients(Geometric(0.5), tail_tolerance=1e-12)
    series = simulate(GAUSS, coeffs, 10**5, seed=3)
    assert abs(series.values.var() - 4.0 / 3.0) < 0.02 * 4.0 / 3.0


def test_zero_sum_coefficients_rejected():
    with pytest.raises(ValueError, match="long memory"):
        simulate(GAUSS, materialize_coefficients(Finite((0.0,))), 100, seed=1)
    with pytest.raises(ValueError, match="long memory"):
        simulate(GAUSS, materialize_coefficients(Finite((1.0, -1.0))), 100, seed=1)


def test_long_memory_override_is_recorded():
    series = simulate(
        GAUSS, materialize_coefficients(Finite((1.0, -1.0))), 500, seed=1, allow_long_memory=True
    )
    record = dict(series.provenance)
    assert record["allow_long_memory"] == "true"
    assert record["memory"] == "long"


def test_simulation_determinism():
    coeffs = materialize_coefficients(Geometric(0.5))
    a = simulate(GAUSS, coeffs, 1000, seed=11, stream=(2,))
    b = simulate(GAUSS, coeffs, 1000, seed=11, stream=(2,))
    np.testing.assert_array_equal(a.values, b.values)


def test_truncation_control():
    # With shared innovations, doubling m moves the sample variance by less
    # than the analytic tail bound of the shorter truncation.
    model, rho, m, n = GAUSS, 0.5, 2, 4 * 10**5
    short = materialize_coefficients(Geometric(rho), m=m, tail_tolerance=1.0)
    long = materialize_coefficients(Geometric(rho), m=2 * m, tail_tolerance=1.0)
    eps = sample_innovations(model, n + 2 * m, seed=11)
    x_short = np.convolve(eps[m:], short.values, mode="valid")
    x_long = np.convolve(eps, long.values, mode="valid")
    bound = model.variance * short.tail_sq
    assert abs(x_long.var() - x_short.var()) < bound


def test_gaussian_closure_kolmogorov_smirnov():
    coeffs = materialize_coefficients(Geometric(0.5), tail_tolerance=1e-12)
    series = simulate(GAUSS, coeffs, 10**5, seed=42)
    sigma = math.sqrt(stationary_variance(coeffs, GAUSS))
    stat = kstest(series.values, "norm", args=(0.0, sigma)).statistic
    assert stat < 1.628 / math.sqrt(series.n)  # 1% critical value


def test_stationary_variance():
    assert stationary_variance(
        materialize_coefficients(Geometric(0.5)), GAUSS
    ) == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert stationary_variance(materialize_coefficients(Finite((1.0,))), GAUSS) == 1.0
    assert stationary_variance(materialize_coefficients(Finite((3.0, 4.0))), GAUSS) == 25.0


def test_csv_round_trip():
    coeffs = materialize_coefficients(Geometric(0.25))
    series = simulate(GAUSS, coeffs, 50, seed=5)
    text = series.to_csv()
    back = SampleSeries.from_csv(text)
    np.testing.assert_array_equal(back.values, series.values)
    assert back.provenance == series.provenance


def test_csv_rejects_empty():
    with pytest.raises(ValueError, match="no values"):
        SampleSeries.from_csv("# only=comments\n")


def test_series_must_be_finite():
    with pytest.raises(ValueError, match="finite"):
        SampleSeries(values=np.array([1.0, np.inf]), n=2, provenance=())
