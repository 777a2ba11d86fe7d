"""FastAPI service exposing the estimation pipeline.

The service wraps the core package one operation per endpoint; the bundled
CLI is a thin client of these endpoints.  All handlers are synchronous pure
computations, so requests are safe to issue concurrently.
"""

from __future__ import annotations

import warnings

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..entropy import (
    ThresholdOrderWarning,
    ThresholdRule,
    integral_estimator,
    gaussian_density,
    marginal_density_by_convolution,
    quadrature_entropy,
    threshold,
    true_entropy_gaussian,
    truncated_true_term,
)
from ..experiments import ExperimentConfig, render_csv, run_convergence, run_rate_check
from ..innovations import InnovationModel, validate_density_conditions
from ..kde import BandwidthRule, bandwidth, default_grid, kde_on_grid, symmetric_grid
from ..kernels import KERNELS, get_kernel, validate_kernel
from ..linear_process import (
    CoefficientScheme,
    Finite,
    Geometric,
    Hyperbolic,
    SampleSeries,
    materialize_coefficients,
    simulate,
    stationary_variance,
)
from ..reports import ConditionReport
from . import schemas


def _scheme_from_spec(spec: schemas.ProcessSpec) -> CoefficientScheme:
    if spec.scheme == "geometric":
        return Geometric(spec.rho)
    if spec.scheme == "finite":
        return Finite(tuple(spec.coefficients))
    return Hyperbolic(spec.beta)


def _simulate_from_spec(
    spec: schemas.ProcessSpec, n: int, seed: int, stream: list[int]
) -> SampleSeries:
    model = InnovationModel(spec.family, spec.scale)
    coeffs = materialize_coefficients(
        _scheme_from_spec(spec), spec.truncation, spec.tail_tolerance
    )
    return simulate(
        model, coeffs, n, seed, stream=tuple(stream),
        allow_long_memory=spec.allow_long_memory,
    )


def _report_model(report: ConditionReport) -> schemas.ConditionReportModel:
    return schemas.ConditionReportModel(
        subject=report.subject,
        passed=report.passed,
        checks=[
            schemas.CheckModel(
                name=c.name, passed=c.passed, observed=c.observed, requirement=c.requirement
            )
            for c in report.checks
        ],
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="lpentropy",
        version=__version__,
        description=(
            "Simulation of short-memory linear processes and Shannon entropy "
            "estimation via a thresholded kernel plug-in estimator."
        ),
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate_endpoint(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        try:
            series = _simulate_from_spec(
                request.process, request.n, request.seed, request.stream
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.SimulateResponse(
            values=series.values.tolist(), provenance=list(series.provenance)
        )

    @app.post("/kde", response_model=schemas.KdeResponse)
    def kde_endpoint(request: schemas.KdeRequest) -> schemas.KdeResponse:
        import numpy as np

        try:
            kernel = get_kernel(request.kernel)
            series = SampleSeries(
                values=np.asarray(request.values, dtype=float),
                n=len(request.values),
                provenance=(("source", "client"),),
            )
            h = bandwidth(series.n, BandwidthRule(request.bandwidth_c))
            grid = default_grid(series, h, kernel, request.grid_points_per_h)
            estimate = kde_on_grid(series, kernel, h, grid)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.KdeResponse(
            x=grid.nodes().tolist(),
            density=estimate.values.tolist(),
            bandwidth=h,
            n=series.n,
            kernel=kernel.name,
            integral=estimate.integral(),
        )

    @app.post("/entropy", response_model=schemas.EntropyResponse)
    def entropy_endpoint(request: schemas.EntropyRequest) -> schemas.EntropyResponse:
        import numpy as np

        try:
            kernel = get_kernel(request.estimator.kernel)
            if request.values is not None:
                series = SampleSeries(
                    values=np.asarray(request.values, dtype=float),
                    n=len(request.values),
                    provenance=(("source", "client"),),
                )
            else:
                series = _simulate_from_spec(
                    request.process, request.n, request.seed, request.stream
                )
            bw_rule = BandwidthRule(request.estimator.bandwidth_c)
            th_rule = ThresholdRule(request.estimator.gamma_c, request.estimator.gamma_kappa)
            h = bandwidth(series.n, bw_rule)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ThresholdOrderWarning)
                gamma = threshold(series.n, th_rule, bw_rule)
            grid = default_grid(series, h, kernel, request.estimator.grid_points_per_h)
            estimate = kde_on_grid(series, kernel, h, grid)
            result = integral_estimator(estimate, gamma)

            oracle_entropy = None
            abs_error = None
            reference = None
            if request.oracle is not None:
                model = InnovationModel(request.process.family, request.process.scale)
                coeffs = materialize_coefficients(
                    _scheme_from_spec(request.process),
                    request.process.truncation,
                    request.process.tail_tolerance,
                )
                variance = stationary_variance(coeffs, model)
                if request.oracle == "gaussian":
                    if model.family != "gaussian":
                        raise ValueError(
                            "the gaussian oracle is exact only for gaussian innovations"
                        )
                    oracle_entropy = true_entropy_gaussian(variance)
                    density = gaussian_density(variance)
                else:
                    import math

                    sigma = math.sqrt(variance)
                    points = 2 * int(math.ceil(15.0 * sigma / (1e-3 * sigma))) + 1
                    table = marginal_density_by_convolution(
                        model, coeffs, symmetric_grid(15.0 * sigma, points)
                    )
                    oracle_entropy = quadrature_entropy(
                        table.density, (table.grid.lower, table.grid.upper), 1e-7
                    )
                    density = table.density
                abs_error = abs(result.value - oracle_entropy)
                reference = truncated_true_term(density, result.level_set, 1e-7)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.EntropyResponse(
            entropy_estimate=result.value,
            n=series.n,
            bandwidth=h,
            gamma=gamma,
            gamma_exceeds_bandwidth=gamma > h,
            level_set=schemas.LevelSetModel(
                intervals=list(result.level_set.intervals),
                total_length=result.level_set.total_length,
                mass=result.level_set.mass,
            ),
            interval_count=result.diagnostics.interval_count,
            oracle_entropy=oracle_entropy,
            abs_error=abs_error,
            oracle_entropy_on_level_set=reference,
        )

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate_endpoint(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
        try:
            kernel_names = request.kernels if request.kernels is not None else sorted(KERNELS)
            family_names = (
                request.families if request.families is not None else ["gaussian", "logistic"]
            )
            reports = [
                validate_kernel(get_kernel(name), request.quadrature_points)
                for name in kernel_names
            ]
            reports.extend(
                validate_density_conditions(
                    InnovationModel(family, request.scale),
                    request.grid_halfwidth,
                    request.grid_points,
                )
                for family in family_names
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        models = [_report_model(r) for r in reports]
        return schemas.ValidateResponse(
            reports=models, all_passed=all(m.passed for m in models)
        )

    @app.post("/convergence", response_model=schemas.ConvergenceResponse)
    def convergence_endpoint(
        request: schemas.ConvergenceRequest,
    ) -> schemas.ConvergenceResponse:
        payload = request.model_dump()
        rate_check = payload.pop("rate_check")
        payload["sizes"] = tuple(payload["sizes"])
        payload["coefficients"] = tuple(payload["coefficients"])
        try:
            config = ExperimentConfig(**payload)
            feasible = len(config.sizes) >= 2 and config.sizes[-1] >= 4 * config.sizes[0]
            if rate_check is None:
                rate_check = feasible
            if rate_check and not feasible:
                raise ValueError(
                    "rate verdicts need at least two sample sizes whose extremes "
                    "differ by a factor of at least 4"
                )
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ThresholdOrderWarning)
                report = run_rate_check(config) if rate_check else run_convergence(config)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        verdicts = None
        if report.verdicts is not None:
            verdicts = [
                schemas.VerdictModel(
                    name=v.name,
                    value_at_smallest_n=v.value_at_smallest_n,
                    value_at_largest_n=v.value_at_largest_n,
                    ratio=v.ratio,
                    bound=v.bound,
                    passed=v.passed,
                )
                for v in report.verdicts
            ]
        return schemas.ConvergenceResponse(
            csv=render_csv(report),
            verdicts=verdicts,
            all_verdicts_pass=report.all_verdicts_pass,
            truncation_bias_vanishing=report.truncation_bias_vanishing,
        )

    return app


app = create_app()
