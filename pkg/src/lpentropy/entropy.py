"""Thresholded plug-in Shannon entropy estimation and its exact oracles.

The estimator integrates -f_n log f_n over the level set {f_n >= gamma},
where f_n is a grid-sampled kernel density estimate and gamma is a threshold
that shrinks to zero more slowly than the bandwidth.  Restricting to the
level set keeps the integrand bounded: the logarithm is only ever applied to
values at or above gamma.

Oracles for the true entropy come in three forms: the Gaussian closed form,
adaptive trapezoid quadrature of -f log f for an arbitrary density, and a
numerically convolved marginal density for non-Gaussian innovations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from .innovations import InnovationModel
from .kde import BandwidthRule, DensityEstimate, Grid, bandwidth, trapezoid_uniform
from .linear_process import CoefficientSequence


class ConvergenceError(RuntimeError):
    """Adaptive quadrature failed to converge within its refinement cap."""


class ThresholdOrderWarning(UserWarning):
    """The threshold does not exceed the bandwidth at this sample size."""


@dataclass(frozen=True)
class ThresholdRule:
    """Threshold gamma_n = constant * h_n^exponent with exponent in (0, 1).

    The open interval is mandatory: exponent >= 1 would break the
    requirement that gamma_n / h_n grows without bound, and exponent <= 0
    would stop gamma_n from shrinking to zero.
    """

    constant: float = 1.0
    exponent: float = 0.8

    def __post_init__(self) -> None:
        if not (self.constant > 0 and math.isfinite(self.constant)):
            raise ValueError("threshold constant must be a positive finite real")
        if not (0.0 < self.exponent < 1.0):
            raise ValueError(
                "threshold exponent must lie strictly inside (0, 1): values >= 1 "
                "would not dominate the bandwidth, values <= 0 would not vanish"
            )


def threshold(
    n: int,
    rule: ThresholdRule = ThresholdRule(),
    bandwidth_rule: BandwidthRule = BandwidthRule(),
) -> float:
    """Evaluate the threshold rule at sample size n.

    Warns when the constants make gamma_n <= h_n at this particular n; the
    ordering always holds for large enough n, but small constants can delay
    it past practical sample sizes.
    """
    h = bandwidth(n, bandwidth_rule)
    gamma = rule.constant * h**rule.exponent
    if gamma <= h:
        warnings.warn(
            f"threshold {gamma:.6g} does not exceed bandwidth {h:.6g} at n={n}; "
            "the rate guarantees assume the threshold dominates the bandwidth",
            ThresholdOrderWarning,
            stacklevel=2,
        )
    return gamma


@dataclass(frozen=True)
class LevelSet:
    """Maximal grid-aligned intervals on which the estimate reaches the threshold.

    ``spans`` holds the (first, last) grid-node indices of each interval;
    ``intervals`` the corresponding node coordinates.  Single-node runs give
    degenerate zero-length intervals.
    """

    intervals: tuple[tuple[float, float], ...]
    spans: tuple[tuple[int, int], ...]
    total_length: float
    mass: float

    @property
    def is_empty(self) -> bool:
        return len(self.intervals) == 0


def level_set(estimate: DensityEstimate, gamma: float) -> LevelSet:
    """Intervals of consecutive grid nodes where the estimate is >= gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    mask = estimate.values >= gamma
    if not mask.any():
        return LevelSet(intervals=(), spans=(), total_length=0.0, mass=0.0)
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, stops = edges[0::2], edges[1::2] - 1
    x = estimate.grid.nodes()
    spacing = estimate.grid.spacing
    intervals = []
    spans = []
    mass = 0.0
    length = 0.0
    for i0, i1 in zip(starts, stops):
        intervals.append((float(x[i0]), float(x[i1])))
        spans.append((int(i0), int(i1)))
        length += float(x[i1] - x[i0])
        mass += trapezoid_uniform(estimate.values[i0 : i1 + 1], spacing)
    return LevelSet(
        intervals=tuple(intervals),
        spans=tuple(spans),
        total_length=length,
        mass=mass,
    )


@dataclass(frozen=True)
class EntropyDiagnostics:
    level_set_mass: float
    interval_count: int
    boundary_error_bound: float


@dataclass(frozen=True)
class EntropyEstimate:
    """Value of the thresholded plug-in entropy estimator with its context."""

    value: float
    n: int
    h: float
    gamma: float
    level_set: LevelSet
    diagnostics: EntropyDiagnostics


def integral_estimator(estimate: DensityEstimate, gamma: float) -> EntropyEstimate:
    """Integrate -f_n log f_n over the level set {f_n >= gamma}.

    Composite trapezoid quadrature on the estimate's own grid, restricted to
    the level-set intervals; an empty level set gives zero.  The recorded
    boundary error bound accounts for the level-set endpoints being snapped
    to grid nodes: each of the two boundary nodes per interval can be off by
    at most one spacing, where the integrand is at most gamma |log gamma|.
    """
    ls = level_set(estimate, gamma)
    spacing = estimate.grid.spacing
    total = 0.0
    for i0, i1 in ls.spans:
        if i1 > i0:
            v = estimate.values[i0 : i1 + 1]
            total += trapezoid_uniform(-v * np.log(v), spacing)
    boundary_bound = 2.0 * len(ls.spans) * spacing * gamma * abs(math.log(gamma))
    return EntropyEstimate(
        value=total,
        n=estimate.n,
        h=estimate.bandwidth,
        gamma=gamma,
        level_set=ls,
        diagnostics=EntropyDiagnostics(
            level_set_mass=ls.mass,
            interval_count=len(ls.spans),
            boundary_error_bound=boundary_bound,
        ),
    )


def true_entropy_gaussian(variance: float) -> float:
    """Closed-form Shannon entropy of a centered Gaussian: log(2 pi e v) / 2."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    return 0.5 * math.log(2.0 * math.pi * math.e * variance)


def gaussian_density(variance: float) -> Callable[[np.ndarray], np.ndarray]:
    """A vectorized centered Gaussian density, for use as an oracle."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    norm = 1.0 / math.sqrt(2.0 * math.pi * variance)

    def density(x):
        x = np.asarray(x, dtype=float)
        return norm * np.exp(-0.5 * x * x / variance)

    return density


def _entropy_integrand(density, x):
    f = np.asarray(density(x), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(f > 0.0, -f * np.log(np.where(f > 0.0, f, 1.0)), 0.0)
    return g


def _adaptive_trapezoid(
    integrand: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tolerance: float,
    max_refinements: int = 26,
    initial_intervals: int = 64,
) -> float:
    """Doubling trapezoid quadrature; stops when successive estimates agree."""
    if b <= a:
        return 0.0
    intervals = initial_intervals
    x = np.linspace(a, b, intervals + 1)
    g = integrand(x)
    spacing = (b - a) / intervals
    current = trapezoid_uniform(g, spacing)
    for _ in range(max_refinements):
        mids = np.linspace(a + spacing / 2.0, b - spacing / 2.0, intervals)
        mid_sum = float(integrand(mids).sum())
        spacing /= 2.0
        intervals *= 2
        refined = current / 2.0 + spacing * mid_sum
        if abs(refined - current) < tolerance:
            return refined
        current = refined
    raise ConvergenceError(
        f"quadrature over [{a:g}, {b:g}] did not reach tolerance {tolerance:g} "
        f"within {max_refinements} refinements"
    )


def quadrature_entropy(
    density: Callable[[np.ndarray], np.ndarray],
    domain: tuple[float, float],
    tolerance: float = 1e-8,
    max_refinements: int = 26,
) -> float:
    """Entropy -integral of f log f over a finite domain, by refinement.

    The caller is responsible for the domain holding essentially all of the
    density's mass (below ``tolerance`` outside).  The integrand uses the
    convention 0 log 0 = 0.
    """
    a, b = domain
    if not (a < b):
        raise ValueError("domain must satisfy lower < upper")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    return _adaptive_trapezoid(
        lambda x: _entropy_integrand(density, x), a, b, tolerance, max_refinements
    )


def truncated_true_term(
    true_density: Callable[[np.ndarray], np.ndarray],
    ls: LevelSet,
    tolerance: float = 1e-8,
) -> float:
    """Entropy integral of the reference density restricted to a level set.

    This is the random centering quantity the convergence-rate statistics
    compare the estimator against: the same -f log f integral, but with the
    true density in place of the estimate, over exactly the same intervals.
    """
    if ls.is_empty:
        return 0.0
    per_interval = tolerance / len(ls.intervals)
    total = 0.0
    for left, right in ls.intervals:
        total += _adaptive_trapezoid(
            lambda x: _entropy_integrand(true_density, x), left, right, per_interval
        )
    return total


@dataclass(frozen=True)
class DensityTable:
    """A density tabulated on a symmetric uniform grid, linearly interpolated."""

    grid: Grid
    values: np.ndarray
    mass: float

    def __post_init__(self) -> None:
        self.values.setflags(write=False)
        object.__setattr__(self, "_nodes", self.grid.nodes())

    def density(self, x):
        return np.interp(np.asarray(x, dtype=float), self._nodes, self.values, left=0.0, right=0.0)

    def entropy(self, tolerance: float = 1e-6) -> float:
        return quadrature_entropy(self.density, (self.grid.lower, self.grid.upper), tolerance)


def marginal_density_by_convolution(
    model: InnovationModel,
    coeffs: CoefficientSequence,
    grid: Grid,
    mass_tolerance: float = 1e-6,
) -> DensityTable:
    """Marginal density of the truncated process by convolving component densities.

    Each coefficient a_i scales the innovation density to
    f_i(x) = f(x / a_i) / |a_i|; the marginal of the truncated sum is the
    convolution of all of them (zero coefficients are skipped, contributing
    a point mass at zero).  Components are represented by their exact
    per-cell masses (CDF differences), which stays well-defined even when
    |a_i| is far below the grid spacing and the scaled density is a spike no
    pointwise sample could resolve.  The result is the cell-averaged
    marginal density, accurate to O(m * spacing^2) pointwise.

    The grid must be symmetric about zero with a node at zero so that the
    repeated convolutions stay index-aligned.
    """
    nodes = grid.nodes()
    spacing = grid.spacing
    if grid.points % 2 == 0 or abs(grid.lower + grid.upper) > 1e-9 * spacing:
        raise ValueError(
            "convolution grid must be symmetric about zero with a node at zero; "
            "build one with symmetric_grid()"
        )
    edges = np.concatenate([nodes - spacing / 2.0, [nodes[-1] + spacing / 2.0]])
    masses: np.ndarray | None = None
    for a in coeffs.values:
        if a == 0.0:
            continue
        cdf = np.asarray(model.cdf(edges / abs(a)), dtype=float)
        component = np.diff(cdf)
        if masses is None:
            masses = component
        else:
            masses = fftconvolve(masses, component, mode="same")
    if masses is None:
        raise ValueError("all coefficients are zero; the marginal is degenerate")
    masses = np.maximum(masses, 0.0)
    mass = float(masses.sum())
    if abs(mass - 1.0) > mass_tolerance:
        raise ValueError(
            f"convolution grid too narrow: tabulated mass {mass:.12g} misses 1 by "
            f"{abs(mass - 1.0):.3e} (> {mass_tolerance:g}); widen the grid"
        )
    return DensityTable(grid=grid, values=masses / spacing, mass=mass)
