"""Command-line client for the lpentropy service.

Every subcommand except ``serve`` is a thin HTTP client: it builds a request,
posts it to the service, and renders the response locally.  By default the
client talks to an in-process instance of the service (no socket, fully
deterministic); pass ``--server URL`` to use a running instance instead.

Exit codes: 0 on success, 2 when a convergence rate verdict fails, 1 on any
error.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx
import numpy as np

from .experiments import ExperimentConfig, format_float, parse_config
from .linear_process import SampleSeries


class ClientError(Exception):
    pass


def _client(server: str | None) -> httpx.AsyncClient:
    if server:
        return httpx.AsyncClient(base_url=server, timeout=httpx.Timeout(None))
    from .service.app import create_app

    return httpx.AsyncClient(
        transport=httpx.ASGITransport(app=create_app()),
        base_url="http://lpentropy.internal",
        timeout=httpx.Timeout(None),
    )


async def _post(client: httpx.AsyncClient, path: str, payload: dict) -> dict:
    try:
        response = await client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise ClientError(f"request to {path} failed: {exc}") from exc
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ClientError(f"{path} returned {response.status_code}: {detail}")
    return response.json()


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_bytes(text.encode("utf-8"))


def _process_payload(args: argparse.Namespace) -> dict:
    return {
        "family": args.family,
        "scale": args.scale,
        "scheme": args.scheme,
        "rho": args.rho,
        "coefficients": [float(c) for c in args.coefficients.split(",") if c.strip()]
        if args.coefficients
        else [],
        "beta": args.beta,
        "truncation": args.truncation,
        "tail_tolerance": args.tail_tolerance,
        "allow_long_memory": args.allow_long_memory,
    }


def _parse_stream(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


async def _cmd_simulate(client: httpx.AsyncClient, args: argparse.Namespace) -> int:
    payload = {
        "process": _process_payload(args),
        "n": args.n,
        "seed": args.seed,
        "stream": _parse_stream(args.stream),
    }
    data = await _post(client, "/simulate", payload)
    series = SampleSeries(
        values=np.asarray(data["values"], dtype=float),
        n=len(data["values"]),
        provenance=tuple((k, v) for k, v in data["provenance"]),
    )
    _write_text(args.output, series.to_csv())
    return 0


async def _cmd_kde(client: httpx.AsyncClient, args: argparse.Namespace) -> int:
    series = SampleSeries.from_csv(Path(args.input).read_text())
    payload = {
        "values": series.values.tolist(),
        "kernel": args.kernel,
        "bandwidth_c": args.bandwidth_c,
        "grid_points_per_h": args.grid_points_per_h,
    }
    data = await _post(client, "/kde", payload)
    lines = ["x,f_n"]
    lines.extend(
        f"{format_float(x)},{format_float(v)}"
        for x, v in zip(data["x"], data["density"])
    )
    _write_text(args.output, "\n".join(lines) + "\n")
    print(
        f"kde: n={data['n']} kernel={data['kernel']} bandwidth={data['bandwidth']:.6g} "
        f"integral={data['integral']:.6g}",
        file=sys.stderr,
    )
    return 0


async def _cmd_entropy(client: httpx.AsyncClient, args: argparse.Namespace) -> int:
    estimator = {
        "kernel": args.kernel,
        "bandwidth_c": args.bandwidth_c,
        "gamma_c": args.gamma_c,
        "gamma_kappa": args.gamma_kappa,
        "grid_points_per_h": args.grid_points_per_h,
    }
    if args.input is not None:
        series = SampleSeries.from_csv(Path(args.input).read_text())
        payload = {"values": series.values.tolist(), "estimator": estimator}
        if args.oracle:
            raise ClientError(
                "--oracle needs the generating process; drop --input and pass "
                "process flags with --n instead"
            )
    else:
        if args.n is None:
            raise ClientError("provide either --input FILE or --n with process flags")
        payload = {
            "process": _process_payload(args),
            "n": args.n,
            "seed": args.seed,
            "stream": _parse_stream(args.stream),
            "estimator": estimator,
            "oracle": args.oracle,
        }
    data = await _post(client, "/entropy", payload)
    print(f"entropy_estimate={format_float(data['entropy_estimate'])}")
    print(
        f"n={data['n']} bandwidth={format_float(data['bandwidth'])} "
        f"gamma={format_float(data['gamma'])} "
        f"gamma_exceeds_bandwidth={str(data['gamma_exceeds_bandwidth']).lower()}"
    )
    print(
        f"level_set: intervals={data['interval_count']} "
        f"mass={format_float(data['level_set']['mass'])} "
        f"total_length={format_float(data['level_set']['total_length'])}"
    )
    if data.get("oracle_entropy") is not None:
        print(
            f"oracle_entropy={format_float(data['oracle_entropy'])} "
            f"abs_error={format_float(data['abs_error'])} "
            f"oracle_entropy_on_level_set={format_float(data['oracle_entropy_on_level_set'])}"
        )
    return 0


async def _cmd_validate(client: httpx.AsyncClient, args: argparse.Namespace) -> int:
    payload = {
        "kernels": args.kernel if args.kernel else None,
        "families": args.family if args.family else None,
        "scale": args.scale,
        "quadrature_points": args.quadrature_points,
        "grid_halfwidth": args.grid_halfwidth,
        "grid_points": args.grid_points,
    }
    data = await _post(client, "/validate", payload)
    for report in data["reports"]:
        print(f"{report['subject']}: {'PASS' if report['passed'] else 'FAIL'}")
        for check in report["checks"]:
            status = "pass" if check["passed"] else "FAIL"
            print(
                f"  [{status}] {check['name']}: observed={check['observed']:.10g} "
                f"({check['requirement']})"
            )
    return 0 if data["all_passed"] else 1


async def _cmd_convergence(client: httpx.AsyncClient, args: argparse.Namespace) -> int:
    overrides = {
        key: value
        for key, value in {
            "sizes": args.sizes,
            "family": args.family,
            "scale": args.scale,
            "scheme": args.scheme,
            "rho": args.rho,
            "coefficients": args.coefficients,
            "beta": args.beta,
            "truncation": args.truncation,
            "tail_tolerance": args.tail_tolerance,
            "replicates": args.replicates,
            "seed": args.seed,
            "bandwidth_c": args.bandwidth_c,
            "gamma_c": args.gamma_c,
            "gamma_kappa": args.gamma_kappa,
            "gamma_override": args.gamma_override,
            "kernel": args.kernel,
            "grid_points_per_h": args.grid_points_per_h,
            "oracle": args.oracle,
            "workers": args.workers,
            "output": args.output,
        }.items()
        if value is not None
    }
    try:
        config = parse_config(args.config, overrides)
    except (ValueError, OSError) as exc:
        raise ClientError(str(exc)) from exc
    payload = {
        "sizes": list(config.sizes),
        "family": config.family,
        "scale": config.scale,
        "scheme": config.scheme,
        "rho": config.rho,
        "coefficients": list(config.coefficients),
        "beta": config.beta,
        "truncation": config.truncation,
        "tail_tolerance": config.tail_tolerance,
        "replicates": config.replicates,
        "seed": config.seed,
        "bandwidth_c": config.bandwidth_c,
        "gamma_c": config.gamma_c,
        "gamma_kappa": config.gamma_kappa,
        "gamma_override": config.gamma_override,
        "kernel": config.kernel,
        "grid_points_per_h": config.grid_points_per_h,
        "oracle": config.oracle,
        "workers": config.workers,
        "rate_check": False if args.no_rate_check else None,
    }
    data = await _post(client, "/convergence", payload)
    _write_text(config.output, data["csv"])
    if data.get("verdicts") is not None:
        for verdict in data["verdicts"]:
            status = "pass" if verdict["passed"] else "FAIL"
            print(
                f"verdict {verdict['name']}: ratio={verdict['ratio']:.4g} "
                f"bound={verdict['bound']:.3g} [{status}]",
                file=sys.stderr,
            )
        print(
            "truncation_bias_vanishing="
            f"{str(data['truncation_bias_vanishing']).lower()}",
            file=sys.stderr,
        )
        if not data["all_verdicts_pass"]:
            return 2
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _add_process_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", default="gaussian", choices=["gaussian", "logistic"])
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument(
        "--scheme", default="geometric", choices=["geometric", "finite", "hyperbolic"]
    )
    parser.add_argument("--rho", type=float, default=0.5)
    parser.add_argument(
        "--coefficients", default="", help="comma-separated list for scheme=finite"
    )
    parser.add_argument("--beta", type=float, default=1.5)
    parser.add_argument("--truncation", type=int, default=None)
    parser.add_argument("--tail-tolerance", type=float, default=1e-12, dest="tail_tolerance")
    parser.add_argument("--allow-long-memory", action="store_true", dest="allow_long_memory")


def _add_estimator_flags(parser: argparse.ArgumentParser, with_gamma: bool) -> None:
    parser.add_argument("--kernel", default="epanechnikov")
    parser.add_argument("--bandwidth-c", type=float, default=1.0, dest="bandwidth_c")
    parser.add_argument(
        "--grid-points-per-h", type=int, default=8, dest="grid_points_per_h"
    )
    if with_gamma:
        parser.add_argument("--gamma-c", type=float, default=1.0, dest="gamma_c")
        parser.add_argument("--gamma-kappa", type=float, default=0.8, dest="gamma_kappa")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpentropy",
        description="Shannon entropy estimation for short-memory linear processes.",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service; default is an in-process instance",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a process and emit a series CSV")
    _add_process_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--stream", default="", help="comma-separated stream key")
    p.add_argument("--output", default=None, help="output path (default stdout)")

    p = sub.add_parser("kde", help="kernel density estimate of a series CSV")
    p.add_argument("--input", required=True, help="series CSV path")
    _add_estimator_flags(p, with_gamma=False)
    p.add_argument("--output", default=None, help="x,f_n CSV path (default stdout)")

    p = sub.add_parser("entropy", help="thresholded plug-in entropy estimate")
    p.add_argument("--input", default=None, help="series CSV path")
    _add_process_flags(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--stream", default="")
    _add_estimator_flags(p, with_gamma=True)
    p.add_argument("--oracle", choices=["gaussian", "convolution"], default=None)

    p = sub.add_parser("convergence", help="Monte Carlo convergence experiment")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--sizes", default=None, help="comma-separated sample sizes")
    p.add_argument("--family", default=None, choices=["gaussian", "logistic"])
    p.add_argument("--scale", type=float, default=None)
    p.add_argument(
        "--scheme", default=None, choices=["geometric", "finite", "hyperbolic"]
    )
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--coefficients", default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--tail-tolerance", type=float, default=None, dest="tail_tolerance")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bandwidth-c", type=float, default=None, dest="bandwidth_c")
    p.add_argument("--gamma-c", type=float, default=None, dest="gamma_c")
    p.add_argument("--gamma-kappa", type=float, default=None, dest="gamma_kappa")
    p.add_argument("--gamma-override", type=float, default=None, dest="gamma_override")
    p.add_argument("--kernel", default=None)
    p.add_argument(
        "--grid-points-per-h", type=int, default=None, dest="grid_points_per_h"
    )
    p.add_argument("--oracle", default=None, choices=["gaussian", "convolution"])
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", default=None)
    p.add_argument(
        "--no-rate-check",
        action="store_true",
        dest="no_rate_check",
        help="skip rate verdicts even when the sizes allow them",
    )

    p = sub.add_parser("validate", help="kernel and density condition reports")
    p.add_argument(
        "--kernel", action="append", default=None, help="kernel name (repeatable)"
    )
    p.add_argument(
        "--family",
        action="append",
        default=None,
        choices=["gaussian", "logistic"],
        help="innovation family (repeatable)",
    )
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument(
        "--quadrature-points", type=int, default=256, dest="quadrature_points"
    )
    p.add_argument("--grid-halfwidth", type=float, default=None, dest="grid_halfwidth")
    p.add_argument("--grid-points", type=int, default=4001, dest="grid_points")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


_HANDLERS = {
    "simulate": _cmd_simulate,
    "kde": _cmd_kde,
    "entropy": _cmd_entropy,
    "validate": _cmd_validate,
    "convergence": _cmd_convergence,
}


async def _dispatch(args: argparse.Namespace) -> int:
    async with _client(args.server) as client:
        return await _HANDLERS[args.command](client, args)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    try:
        return asyncio.run(_dispatch(args))
    except ClientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
