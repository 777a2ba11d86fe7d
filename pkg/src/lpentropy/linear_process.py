"""One-sided moving-average processes: coefficients, memory class, simulation.

The process X_t = sum_i a_i e_{t-i} is simulated by truncated convolution of
an i.i.d. innovation stream with a coefficient sequence whose discarded tail
has negligible squared mass.  Memory classification follows the dichotomy
used throughout this package: absolutely summable coefficients with a
non-zero sum give short memory, anything else long memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import zeta

from .innovations import InnovationModel, sample_innovations


@dataclass(frozen=True)
class Geometric:
    """Coefficients a_i = rho^i for |rho| < 1."""

    rho: float

    def __post_init__(self) -> None:
        if not abs(self.rho) < 1:
            raise ValueError("geometric coefficients require |rho| < 1")

    def describe(self) -> str:
        return f"geometric(rho={self.rho:g})"


@dataclass(frozen=True)
class Finite:
    """An explicit finite coefficient list a_0..a_k."""

    coefficients: tuple[float, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) == 0:
            raise ValueError("finite coefficient list must be non-empty")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("finite coefficients must all be finite reals")
        object.__setattr__(self, "coefficients", coeffs)

    def describe(self) -> str:
        return "finite(" + ",".join(f"{c:g}" for c in self.coefficients) + ")"


@dataclass(frozen=True)
class Hyperbolic:
    """Coefficients a_i = (i+1)^(-beta) for beta > 1/2.

    Square-summable for every beta > 1/2; absolutely summable only for
    beta > 1, so beta in (1/2, 1] gives a long-memory process.
    """

    beta: float

    def __post_init__(self) -> None:
        if not self.beta > 0.5:
            raise ValueError("hyperbolic coefficients require beta > 1/2")

    def describe(self) -> str:
        return f"hyperbolic(beta={self.beta:g})"


CoefficientScheme = Union[Geometric, Finite, Hyperbolic]


@dataclass(frozen=True)
class CoefficientSequence:
    """Materialized coefficients a_0..a_m with analytic facts about the full series.

    ``tail_sq`` bounds the squared mass dropped by truncation,
    sum_{i>m} a_i^2 <= tail_sq <= tail_tolerance.  ``abs_sum``,
    ``coefficient_sum`` and ``sum_sq`` refer to the untruncated series
    (``abs_sum`` may be infinite).
    """

    scheme: CoefficientScheme
    values: np.ndarray
    m: int
    tail_tolerance: float
    tail_sq: float
    abs_sum: float
    coefficient_sum: float
    sum_sq: float

    def __post_init__(self) -> None:
        self.values.setflags(write=False)


def _tail_bound(scheme: CoefficientScheme, m: int) -> float:
    if isinstance(scheme, Geometric):
        if scheme.rho == 0.0:
            return 0.0
        r2 = scheme.rho**2
        return r2 ** (m + 1) / (1.0 - r2)
    if isinstance(scheme, Finite):
        return math.fsum(c * c for c in scheme.coefficients[m + 1 :])
    # integral bound: sum_{i>m} (i+1)^(-2b) <= (m+1)^(1-2b) / (2b-1)
    return (m + 1) ** (1.0 - 2.0 * scheme.beta) / (2.0 * scheme.beta - 1.0)


def _default_truncation(scheme: CoefficientScheme, tol: float) -> int:
    if isinstance(scheme, Finite):
        return len(scheme.coefficients) - 1
    if isinstance(scheme, Geometric):
        if scheme.rho == 0.0:
            return 1
        r2 = scheme.rho**2
        needed = math.log(tol * (1.0 - r2)) / math.log(r2) - 1.0
        return max(1, math.ceil(needed))
    target = (tol * (2.0 * scheme.beta - 1.0)) ** (1.0 / (1.0 - 2.0 * scheme.beta))
    return max(1, math.ceil(target - 1.0))


def materialize_coefficients(
    scheme: CoefficientScheme,
    m: int | None = None,
    tail_tolerance: float = 1e-12,
) -> CoefficientSequence:
    """Build a_0..a_m and the analytic tail/sum facts for the scheme.

    When ``m`` is omitted it is chosen as small as possible subject to the
    truncated squared tail not exceeding ``tail_tolerance``.  An explicit
    ``m`` that violates the tolerance is rejected.
    """
    if tail_tolerance <= 0:
        raise ValueError("tail_tolerance must be positive")
    if m is None:
        m = _default_truncation(scheme, tail_tolerance)
    if m < 1 and not isinstance(scheme, Finite):
        raise ValueError("truncation length m must be at least 1")

    if isinstance(scheme, Geometric):
        values = scheme.rho ** np.arange(m + 1, dtype=float)
        rho = scheme.rho
        abs_sum = 1.0 / (1.0 - abs(rho))
        coefficient_sum = 1.0 / (1.0 - rho)
        sum_sq = 1.0 / (1.0 - rho * rho)
    elif isinstance(scheme, Finite):
        coeffs = scheme.coefficients
        m = min(m, len(coeffs) - 1) if m is not None else len(coeffs) - 1
        if m < 0:
            raise ValueError("truncation length m must be at least 0")
        values = np.asarray(coeffs[: m + 1], dtype=float)
        abs_sum = math.fsum(abs(c) for c in coeffs)
        coefficient_sum = math.fsum(coeffs)
        sum_sq = math.fsum(c * c for c in coeffs)
    else:
        values = (np.arange(1, m + 2, dtype=float)) ** (-scheme.beta)
        abs_sum = float(zeta(scheme.beta)) if scheme.beta > 1 else math.inf
        coefficient_sum = float(zeta(scheme.beta)) if scheme.beta > 1 else math.inf
        sum_sq = float(zeta(2.0 * scheme.beta))

    tail = _tail_bound(scheme, m)
    if tail > tail_tolerance:
        raise ValueError(
            f"truncated squared tail {tail:.3e} exceeds tail_tolerance "
            f"{tail_tolerance:.3e}; increase m or loosen the tolerance"
        )
    return CoefficientSequence(
        scheme=scheme,
        values=values,
        m=m,
        tail_tolerance=tail_tolerance,
        tail_sq=tail,
        abs_sum=abs_sum,
        coefficient_sum=coefficient_sum,
        sum_sq=sum_sq,
    )


@dataclass(frozen=True)
class MemoryClassification:
    kind: str  # "short", "long" or "undefined"
    absolutely_summable: bool
    coefficient_sum: float


def classify_memory(coeffs: CoefficientSequence) -> MemoryClassification:
    """Classify the coefficient scheme as short or long memory.

    Classification uses scheme-level analytic facts, not the truncated
    list: absolutely summable coefficients with a non-zero sum are short
    memory, everything else long memory.  A coefficient list summing to
    exactly zero is therefore long memory even though it is absolutely
    summable.  ``undefined`` is reserved for schemes whose facts are not
    analytic; every built-in scheme classifies as short or long.
    """
    summable = math.isfinite(coeffs.abs_sum)
    total = coeffs.coefficient_sum
    if summable and total != 0.0:
        kind = "short"
    else:
        kind = "long"
    return MemoryClassification(kind, summable, total)


@dataclass(frozen=True)
class SampleSeries:
    """A simulated path X_1..X_n with its generation record."""

    values: np.ndarray
    n: int
    provenance: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        self.values.setflags(write=False)
        if len(self.values) != self.n:
            raise ValueError("values length must equal n")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series values must all be finite")

    def to_csv(self) -> str:
        lines = [f"# {key}={value}" for key, value in self.provenance]
        lines.append("x")
        lines.extend(format(v, ".17g") for v in self.values)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "SampleSeries":
        provenance: list[tuple[str, str]] = []
        values: list[float] = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    provenance.append((key.strip(), val.strip()))
                continue
            if line == "x":
                continue
            values.append(float(line))
        if not values:
            raise ValueError("series CSV contains no values")
        return cls(
            values=np.asarray(values, dtype=float),
            n=len(values),
            provenance=tuple(provenance),
        )


def simulate(
    model: InnovationModel,
    coeffs: CoefficientSequence,
    n: int,
    seed: int,
    stream: tuple[int, ...] = (),
    allow_long_memory: bool = False,
) -> SampleSeries:
    """Simulate X_1..X_n by truncated convolution.

    Draws n + m innovations (m extra before t=1, so the first sample is
    already a full truncated sum) and convolves them with the coefficients.
    Long-memory coefficient schemes are rejected unless
    ``allow_long_memory`` is set, because the convergence guarantees this
    package verifies assume short memory; an override is recorded in the
    provenance.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    classification = classify_memory(coeffs)
    if classification.kind != "short" and not allow_long_memory:
        raise ValueError(
            f"coefficient scheme {coeffs.scheme.describe()} is {classification.kind} memory "
            f"(absolutely summable: {classification.absolutely_summable}, coefficient sum: "
            f"{classification.coefficient_sum:g}); the estimator's guarantees assume short "
            "memory. Pass allow_long_memory=True to simulate anyway."
        )
    eps = sample_innovations(model, n + coeffs.m, seed, stream)
    values = np.convolve(eps, coeffs.values, mode="valid")
    provenance = (
        ("family", model.family),
        ("scale", repr(model.scale)),
        ("scheme", coeffs.scheme.describe()),
        ("truncation_m", str(coeffs.m)),
        ("tail_tolerance", repr(coeffs.tail_tolerance)),
        ("memory", classification.kind),
        ("n", str(n)),
        ("seed", str(seed)),
        ("stream", ",".join(str(s) for s in stream)),
        ("allow_long_memory", str(allow_long_memory).lower()),
    )
    return SampleSeries(values=values, n=n, provenance=provenance)


def stationary_variance(coeffs: CoefficientSequence, model: InnovationModel) -> float:
    """Marginal variance of the untruncated process: variance * sum of a_i^2.

    Uses the analytic full-series sum where the scheme permits, so the
    truncation tail is already corrected for.
    """
    return model.variance * coeffs.sum_sq
