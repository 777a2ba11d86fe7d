"""Monte Carlo convergence experiments with deterministic CSV reports.

A convergence run simulates a short-memory process at several sample sizes,
estimates its entropy in every replicate, and records the error statistics
that the estimator's consistency and rate guarantees speak about.  Output is
a pure function of the configuration: replicate cells draw from independent
random streams keyed by (sample size, replicate index), rows are emitted in
deterministic order regardless of worker count, and all floats are formatted
with 17 significant digits.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from .entropy import (
    ThresholdRule,
    integral_estimator,
    gaussian_density,
    marginal_density_by_convolution,
    quadrature_entropy,
    threshold,
    true_entropy_gaussian,
    truncated_true_term,
)
from .innovations import InnovationModel
from .kde import BandwidthRule, bandwidth, default_grid, kde_on_grid, sup_error, symmetric_grid
from .kernels import Kernel, get_kernel
from .linear_process import (
    CoefficientScheme,
    CoefficientSequence,
    Finite,
    Geometric,
    Hyperbolic,
    classify_memory,
    materialize_coefficients,
    simulate,
    stationary_variance,
)

_ORACLES = ("gaussian", "convolution")
_SCHEMES = ("geometric", "finite", "hyperbolic")

_ORACLE_QUADRATURE_TOL = 1e-7


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved configuration of a convergence experiment.

    Field names double as the flat config-file keys and (with dashes) the
    CLI flag names.
    """

    sizes: tuple[int, ...]
    family: str = "gaussian"
    scale: float = 1.0
    scheme: str = "geometric"
    rho: float = 0.5
    coefficients: tuple[float, ...] = ()
    beta: float = 1.5
    truncation: int | None = None
    tail_tolerance: float = 1e-12
    replicates: int = 50
    seed: int = 42
    bandwidth_c: float = 1.0
    gamma_c: float = 1.0
    gamma_kappa: float = 0.8
    gamma_override: float | None = None
    kernel: str = "epanechnikov"
    grid_points_per_h: int = 8
    oracle: str = "gaussian"
    workers: int = 1
    output: str | None = None

    def __post_init__(self) -> None:
        if len(self.sizes) == 0:
            raise ValueError("sizes must contain at least one sample size")
        if any(n < 100 for n in self.sizes):
            raise ValueError("every sample size must be at least 100")
        if any(b >= a for a, b in zip(self.sizes[1:], self.sizes)):
            raise ValueError("sizes must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {_SCHEMES}")
        if self.oracle not in _ORACLES:
            raise ValueError(f"unknown oracle {self.oracle!r}; expected one of {_ORACLES}")
        if self.oracle == "gaussian" and self.family != "gaussian":
            raise ValueError(
                "the gaussian oracle is exact only for gaussian innovations; "
                "use oracle=convolution for other families"
            )
        if self.gamma_override is not None and not self.gamma_override > 0:
            raise ValueError("gamma_override must be positive when given")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        # constructing the parts validates their parameter ranges early
        self.model()
        self.coefficient_scheme()
        self.bandwidth_rule()
        self.threshold_rule()
        self.kernel_object()

    def model(self) -> InnovationModel:
        return InnovationModel(self.family, self.scale)

    def coefficient_scheme(self) -> CoefficientScheme:
        if self.scheme == "geometric":
            return Geometric(self.rho)
        if self.scheme == "finite":
            if not self.coefficients:
                raise ValueError("scheme=finite requires a non-empty coefficients list")
            return Finite(tuple(self.coefficients))
        return Hyperbolic(self.beta)

    def coefficient_sequence(self) -> CoefficientSequence:
        return materialize_coefficients(
            self.coefficient_scheme(), self.truncation, self.tail_tolerance
        )

    def bandwidth_rule(self) -> BandwidthRule:
        return BandwidthRule(self.bandwidth_c)

    def threshold_rule(self) -> ThresholdRule:
        return ThresholdRule(self.gamma_c, self.gamma_kappa)

    def kernel_object(self) -> Kernel:
        return get_kernel(self.kernel)

    def echo_items(self) -> tuple[tuple[str, str], ...]:
        # workers and output affect how the run executes, not what it computes,
        # so they stay out of the echo and the CSV is byte-identical across
        # worker counts and output destinations.
        skip = ("workers", "output")
        return tuple(
            (f.name, _canonical(getattr(self, f.name)))
            for f in fields(self)
            if f.name not in skip
        )


def _canonical(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_canonical(v) for v in value)
    return str(value)


def format_float(x: float) -> str:
    return format(x, ".17g")


@dataclass(frozen=True)
class ReplicateRow:
    n: int
    replicate: int
    entropy_estimate: float
    oracle_entropy: float
    abs_error: float
    oracle_entropy_on_level_set: float
    scaled_level_set_gap: float
    sup_density_error: float
    scaled_sup_density_error: float


@dataclass(frozen=True)
class SizeSummary:
    n: int
    median_abs_error: float
    mean_abs_error: float
    mse: float
    median_scaled_level_set_gap: float
    rms_scaled_level_set_gap: float
    median_scaled_sup_density_error: float
    truncation_gap: float


@dataclass(frozen=True)
class RateVerdict:
    name: str
    value_at_smallest_n: float
    value_at_largest_n: float
    ratio: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class ConvergenceReport:
    config_items: tuple[tuple[str, str], ...]
    rows: tuple[ReplicateRow, ...]
    summaries: tuple[SizeSummary, ...]
    verdicts: tuple[RateVerdict, ...] | None = None
    truncation_bias_vanishing: bool | None = None

    @property
    def all_verdicts_pass(self) -> bool | None:
        if self.verdicts is None:
            return None
        return all(v.passed for v in self.verdicts)


def _build_oracle(
    config: ExperimentConfig, coeffs: CoefficientSequence
) -> tuple[float, Callable[[np.ndarray], np.ndarray]]:
    variance = stationary_variance(coeffs, config.model())
    if config.oracle == "gaussian":
        return true_entropy_gaussian(variance), gaussian_density(variance)
    sigma = math.sqrt(variance)
    halfwidth = 15.0 * sigma
    points = 2 * int(math.ceil(halfwidth / (1e-3 * sigma))) + 1
    table = marginal_density_by_convolution(
        config.model(), coeffs, symmetric_grid(halfwidth, points)
    )
    value = quadrature_entropy(
        table.density, (table.grid.lower, table.grid.upper), _ORACLE_QUADRATURE_TOL
    )
    return value, table.density


def _run_cell(
    config: ExperimentConfig,
    coeffs: CoefficientSequence,
    kernel: Kernel,
    oracle_entropy: float,
    density: Callable[[np.ndarray], np.ndarray],
    gamma: float,
    n: int,
    replicate: int,
) -> ReplicateRow:
    series = simulate(
        config.model(), coeffs, n, config.seed, stream=(n, replicate)
    )
    h = bandwidth(n, config.bandwidth_rule())
    grid = default_grid(series, h, kernel, config.grid_points_per_h)
    estimate = kde_on_grid(series, kernel, h, grid)
    result = integral_estimator(estimate, gamma)
    reference = truncated_true_term(density, result.level_set, _ORACLE_QUADRATURE_TOL)
    sup = sup_error(estimate, density)
    log_n = math.log(n)
    gap_scale = (n * gamma**5 / log_n) ** 0.4
    sup_scale = (n / log_n) ** 0.4
    return ReplicateRow(
        n=n,
        replicate=replicate,
        entropy_estimate=result.value,
        oracle_entropy=oracle_entropy,
        abs_error=abs(result.value - oracle_entropy),
        oracle_entropy_on_level_set=reference,
        scaled_level_set_gap=gap_scale * abs(result.value - reference),
        sup_density_error=sup,
        scaled_sup_density_error=sup_scale * sup,
    )


def run_convergence(config: ExperimentConfig) -> ConvergenceReport:
    """Run the full replicate grid and summarize the error statistics.

    Every (n, replicate) cell simulates with an independent random stream
    keyed by the pair itself, so enlarging ``replicates`` or adding sample
    sizes never changes existing rows.  Cells may execute on a thread pool
    (``config.workers``); rows are assembled in (n, replicate) order either
    way, so the report is byte-identical across worker counts.
    """
    coeffs = config.coefficient_sequence()
    classification = classify_memory(coeffs)
    if classification.kind != "short":
        raise ValueError(
            f"convergence experiments require a short-memory process; "
            f"{coeffs.scheme.describe()} is {classification.kind} memory"
        )
    kernel = config.kernel_object()
    oracle_entropy, density = _build_oracle(config, coeffs)
    gammas = {
        n: (
            config.gamma_override
            if config.gamma_override is not None
            else threshold(n, config.threshold_rule(), config.bandwidth_rule())
        )
        for n in config.sizes
    }
    cells = [(n, r) for n in config.sizes for r in range(config.replicates)]

    def work(cell: tuple[int, int]) -> ReplicateRow:
        n, r = cell
        return _run_cell(
            config, coeffs, kernel, oracle_entropy, density, gammas[n], n, r
        )

    if config.workers == 1:
        rows = [work(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(work, cells))

    summaries = []
    for n in config.sizes:
        group = [row for row in rows if row.n == n]
        abs_errors = np.array([row.abs_error for row in group])
        gaps = np.array([row.scaled_level_set_gap for row in group])
        sups = np.array([row.scaled_sup_density_error for row in group])
        references = np.array([row.oracle_entropy_on_level_set for row in group])
        summaries.append(
            SizeSummary(
                n=n,
                median_abs_error=float(np.median(abs_errors)),
                mean_abs_error=float(np.mean(abs_errors)),
                mse=float(np.mean(abs_errors**2)),
                median_scaled_level_set_gap=float(np.median(gaps)),
                rms_scaled_level_set_gap=float(np.sqrt(np.mean(gaps**2))),
                median_scaled_sup_density_error=float(np.median(sups)),
                truncation_gap=abs(oracle_entropy - float(np.mean(references))),
            )
        )
    return ConvergenceReport(
        config_items=config.echo_items(),
        rows=tuple(rows),
        summaries=tuple(summaries),
    )


def _ratio(small: float, large: float) -> float:
    if small == 0.0:
        return math.inf if large > 0.0 else 1.0
    return large / small


def run_rate_check(config: ExperimentConfig) -> ConvergenceReport:
    """Convergence run plus boundedness verdicts on the scaled statistics.

    The asymptotic statement "the scaled statistic stays bounded" is
    operationalized as: between the smallest and largest tested sample size
    (which must differ by a factor of at least 4), the replicate median and
    root-mean-square of the scaled level-set gap, and the median of the
    scaled uniform density error, may grow by at most a factor of 2.

    The report additionally flags whether the truncation bias (the gap
    between the oracle entropy and its level-set-restricted counterpart)
    is vanishing across the tested sizes; a threshold that fails to shrink
    leaves that gap standing.
    """
    if len(config.sizes) < 2 or config.sizes[-1] < 4 * config.sizes[0]:
        raise ValueError(
            "rate verdicts need at least two sample sizes whose extremes differ "
            "by a factor of at least 4"
        )
    report = run_convergence(config)
    small = report.summaries[0]
    large = report.summaries[-1]
    bound = 2.0
    pairs = (
        ("level_set_gap_median_rate", small.median_scaled_level_set_gap, large.median_scaled_level_set_gap),
        ("level_set_gap_rms_rate", small.rms_scaled_level_set_gap, large.rms_scaled_level_set_gap),
        ("sup_density_error_median_rate", small.median_scaled_sup_density_error, large.median_scaled_sup_density_error),
    )
    verdicts = tuple(
        RateVerdict(
            name=name,
            value_at_smallest_n=vs,
            value_at_largest_n=vl,
            ratio=_ratio(vs, vl),
            bound=bound,
            passed=_ratio(vs, vl) <= bound,
        )
        for name, vs, vl in pairs
    )
    vanishing = large.truncation_gap < max(1e-3, 0.9 * small.truncation_gap)
    return replace(report, verdicts=verdicts, truncation_bias_vanishing=vanishing)


_ROW_HEADER = (
    "n,replicate,entropy_estimate,oracle_entropy,abs_error,"
    "oracle_entropy_on_level_set,scaled_level_set_gap,sup_density_error,"
    "scaled_sup_density_error"
)
_SUMMARY_HEADER = (
    "n,median_abs_error,mean_abs_error,mse,median_scaled_level_set_gap,"
    "rms_scaled_level_set_gap,median_scaled_sup_density_error,truncation_gap"
)
_VERDICT_HEADER = "name,value_at_smallest_n,value_at_largest_n,ratio,bound,status"


def render_csv(report: ConvergenceReport) -> str:
    """Render a report as deterministic CSV text (always '\\n' line endings)."""
    lines = ["# convergence-report"]
    lines.extend(f"# {key}={value}" for key, value in report.config_items)
    lines.append(_ROW_HEADER)
    for row in report.rows:
        lines.append(
            f"{row.n},{row.replicate},"
            f"{format_float(row.entropy_estimate)},{format_float(row.oracle_entropy)},"
            f"{format_float(row.abs_error)},{format_float(row.oracle_entropy_on_level_set)},"
            f"{format_float(row.scaled_level_set_gap)},{format_float(row.sup_density_error)},"
            f"{format_float(row.scaled_sup_density_error)}"
        )
    lines.append("# summary")
    lines.append(_SUMMARY_HEADER)
    for s in report.summaries:
        lines.append(
            f"{s.n},{format_float(s.median_abs_error)},{format_float(s.mean_abs_error)},"
            f"{format_float(s.mse)},{format_float(s.median_scaled_level_set_gap)},"
            f"{format_float(s.rms_scaled_level_set_gap)},"
            f"{format_float(s.median_scaled_sup_density_error)},{format_float(s.truncation_gap)}"
        )
    if report.verdicts is not None:
        lines.append("# verdicts")
        lines.append(_VERDICT_HEADER)
        for v in report.verdicts:
            lines.append(
                f"{v.name},{format_float(v.value_at_smallest_n)},"
                f"{format_float(v.value_at_largest_n)},{format_float(v.ratio)},"
                f"{format_float(v.bound)},{'pass' if v.passed else 'fail'}"
            )
        lines.append(
            f"# truncation_bias_vanishing="
            f"{'true' if report.truncation_bias_vanishing else 'false'}"
        )
    return "\n".join(lines) + "\n"


_CONFIG_DEFAULTS = {
    f.name: getattr(ExperimentConfig(sizes=(100,)), f.name)
    for f in fields(ExperimentConfig)
    if f.name != "sizes"
}


def _parse_int_or_none(text: str) -> int | None:
    return None if text.lower() == "none" else int(text)


def _parse_float_or_none(text: str) -> float | None:
    return None if text.lower() == "none" else float(text)


def _parse_str_or_none(text: str) -> str | None:
    return None if text.lower() == "none" else text


def _parse_int_tuple(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(",") if p.strip())


def _parse_float_tuple(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


_COERCERS: dict[str, Callable[[str], Any]] = {
    "sizes": _parse_int_tuple,
    "family": str,
    "scale": float,
    "scheme": str,
    "rho": float,
    "coefficients": _parse_float_tuple,
    "beta": float,
    "truncation": _parse_int_or_none,
    "tail_tolerance": float,
    "replicates": int,
    "seed": int,
    "bandwidth_c": float,
    "gamma_c": float,
    "gamma_kappa": float,
    "gamma_override": _parse_float_or_none,
    "kernel": str,
    "grid_points_per_h": int,
    "oracle": str,
    "workers": int,
    "output": _parse_str_or_none,
}


def _coerce(key: str, value: Any) -> Any:
    if key not in _COERCERS:
        raise ValueError(
            f"unknown config key {key!r}; valid keys: {', '.join(sorted(_COERCERS))}"
        )
    if isinstance(value, str):
        try:
            return _COERCERS[key](value)
        except ValueError as exc:
            raise ValueError(f"config key {key!r}: cannot parse {value!r}: {exc}") from None
    return value


def parse_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ExperimentConfig:
    """Build an ExperimentConfig from a flat key=value file and/or overrides.

    The file format is one ``key=value`` pair per line with ``#`` comments;
    every key must be known (unknown keys are errors, not warnings) and may
    appear at most once.  ``overrides`` (typically CLI flags) take precedence
    over file values, which take precedence over defaults.
    """
    merged: dict[str, Any] = dict(_CONFIG_DEFAULTS)
    present: set[str] = set()
    if path is not None:
        text = Path(path).read_text()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in present:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            present.add(key)
            merged[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        merged[key] = _coerce(key, value)
    if "sizes" not in merged or merged.get("sizes") in (None, ()):
        raise ValueError("config is missing the required key 'sizes'")
    return ExperimentConfig(**merged)
