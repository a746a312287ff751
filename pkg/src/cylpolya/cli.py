"""Command-line surface: verdicts, searches, thresholds and plot data as
deterministic JSON/CSV reports.

Exit codes: 0 success (verdicts encoded in the report), 2 argument errors,
3 certification failures or undecidable comparisons.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import click

from . import asymptotics, liyau, polya
from .exact import (
    CertificateFailure,
    DomainError,
    ExactValue,
    Undecided,
    eval_ball,
    parse_exact,
    rational,
    value_json,
)
from .exact import sqrt as exact_sqrt
from .spectrum import counting_function, kth_eigenvalue

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    precision_cap_bits: int = 4096
    thread_count: int = 1
    output_format: str = "json"
    checkpoint_path: Optional[str] = None

    def __post_init__(self):
        if self.precision_cap_bits < 256:
            raise click.UsageError("precision cap must be >= 256 bits")
        if self.thread_count < 1:
            raise click.UsageError("thread count must be >= 1")
        if self.output_format not in ("json", "csv", "human"):
            raise click.UsageError("format must be json, csv or human")


pass_config = click.make_pass_decorator(RunConfig)


def _parse_expr(text: str) -> ExactValue:
    try:
        return parse_exact(text)
    except (ValueError, DomainError) as exc:
        raise click.UsageError(f"bad expression {text!r}: {exc}")


def _parse_range(text: str) -> Tuple[ExactValue, ExactValue]:
    parts = text.split(",")
    if len(parts) != 2:
        raise click.UsageError("range must be 'lo,hi'")
    return _parse_expr(parts[0]), _parse_expr(parts[1])


def _emit(config: RunConfig, command: str, result, csv_rows=None) -> None:
    if config.output_format == "csv" and csv_rows is not None:
        for row in csv_rows:
            click.echo(",".join(str(x) for x in row))
        return
    # worker count deliberately left out: reports are byte-identical
    # regardless of parallelism
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": {"precision_cap_bits": config.precision_cap_bits},
        "result": result,
    }
    if config.output_format == "human":
        click.echo(json.dumps(report, indent=2, sort_keys=False))
    else:
        click.echo(json.dumps(report, separators=(",", ":"), sort_keys=False))


@click.group()
@click.option("--precision-cap", default=4096, show_default=True, help="comparison ladder cap in bits")
@click.option("--threads", default=1, show_default=True, help="worker count for the level screens")
@click.option("--format", "output_format", default="json", show_default=True, type=click.Choice(["json", "csv", "human"]))
@click.option("--checkpoint", "checkpoint_path", default=None, help="plain-text checkpoint file for long sweeps")
@click.pass_context
def main(ctx, precision_cap, threads, output_format, checkpoint_path):
    """Certified verification of the counting and averaged eigenvalue
    inequalities on cylindrical strips."""
    ctx.obj = RunConfig(precision_cap, threads, output_format, checkpoint_path)


# -- polya -------------------------------------------------------------------


@main.group()
def polya_group():
    """Per-eigenvalue counting inequality on the strip."""


main.add_command(polya_group, name="polya")


@polya_group.command("verify")
@click.option("--h", "h_text", required=True, help="strip height (exact expression)")
@pass_config
def polya_verify(config, h_text):
    h = _parse_expr(h_text)
    verdict = polya.polya_verdict(h)
    result = {"h": value_json(h)}
    result.update(verdict.to_json())
    _emit(config, "polya verify", result)


@polya_group.command("failure-intervals")
@click.option("--kmax", default=polya.SEARCH_K_MAX, show_default=True)
@click.option("--h-range", "h_range", default=None, help="'lo,hi' (defaults to the full searched window)")
@pass_config
def polya_failures(config, kmax, h_range):
    if h_range:
        lo, hi = _parse_range(h_range)
    else:
        lo, hi = None, None
    reports = polya.all_failure_reports(kmax, lo, hi, thread_count=config.thread_count)
    _emit(
        config,
        "polya failure-intervals",
        {"kmax": kmax, "failures": [r.to_json() for r in reports]},
    )


# -- liyau -------------------------------------------------------------------


@main.group()
def liyau_group():
    """Averaged eigenvalue inequalities on the strip."""


main.add_command(liyau_group, name="liyau")


@liyau_group.command("verify")
@click.option("--h", "h_text", default=None, help="height; omit for the full-range certificate")
@pass_config
def liyau_verify(config, h_text):
    if h_text is not None:
        h = _parse_expr(h_text)
        verdict = liyau.liyau_verdict(h)
        result = {"h": value_json(h)}
        result.update(verdict.to_json())
        _emit(config, "liyau verify", result)
        return
    record = liyau.corollary_certificate()
    record["conclusion"] = "averaged inequalities hold on (0, pi^2]"
    _emit(config, "liyau verify", record)


@liyau_group.command("exceptional")
@click.option("--range", "h_range", default=None, help="'lo,hi' within [pi^2/2, pi^2]")
@click.option("--kmax", default=liyau.RELAXED_K_MAX, show_default=True)
@pass_config
def liyau_exceptional(config, h_range, kmax):
    if h_range:
        lo, hi = _parse_range(h_range)
    else:
        lo, hi = None, None
    orders = liyau.exceptional_orders(
        lo, hi, k_max=kmax, checkpoint_path=config.checkpoint_path
    )
    _emit(config, "liyau exceptional", {"kmax": kmax, "orders": orders})


# -- disk --------------------------------------------------------------------


@main.group()
def disk():
    """Geodesic disks on the infinite cylinder."""


@disk.command("critical-radius")
@click.option("--tol", default="1e-5", show_default=True)
@pass_config
def disk_critical(config, tol):
    try:
        tol_frac = Fraction(tol)
    except ValueError:
        raise click.UsageError(f"bad tolerance {tol!r}")
    if tol_frac <= 0:
        raise click.UsageError("tolerance must be positive")
    lo, hi = asymptotics.disk_critical_radius(tol_frac)
    _emit(
        config,
        "disk critical-radius",
        {
            "lo": value_json(lo),
            "hi": value_json(hi),
            "width": str(float(hi.as_rational() - lo.as_rational())),
        },
    )


# -- thresholds ---------------------------------------------------------------


@main.group()
def thresholds():
    """First-eigenvalue satisfiability thresholds in higher dimensions."""


@thresholds.command("sn")
@click.option("--n", required=True, type=int)
@pass_config
def thresholds_sn(config, n):
    if n < 1:
        raise click.UsageError("n must be >= 1")
    _emit(config, "thresholds sn", asymptotics.eta1(n).to_json())


@thresholds.command("hypercube")
@click.option("--n", required=True, type=int)
@pass_config
def thresholds_hypercube(config, n):
    if n < 1:
        raise click.UsageError("n must be >= 1")
    _emit(config, "thresholds hypercube", asymptotics.hypercube_threshold(n).to_json())


# -- product ------------------------------------------------------------------


@main.group()
def product():
    """Cartesian products of the circle with boxes."""


@product.command("check")
@click.option("--heights", required=True, help="comma-separated exact expressions")
@pass_config
def product_check(config, heights):
    hs = [_parse_expr(p) for p in heights.split(",") if p]
    if not hs:
        raise click.UsageError("need at least one height")
    result = {
        "heights": [value_json(h) for h in hs],
        "necessary_condition": asymptotics.product_necessary_condition(hs),
    }
    if len(hs) >= 3:
        result["sufficient_condition"] = asymptotics.product_sufficient_condition(hs)
    else:
        result["sufficient_condition"] = None
    _emit(config, "product check", result)


# -- isoperimetric ------------------------------------------------------------


@main.group()
def isoperimetric():
    """Isoperimetric domains on the infinite cylinder."""


@isoperimetric.command("ranges")
@pass_config
def isoperimetric_ranges_cmd(config):
    ranges = asymptotics.isoperimetric_ranges()
    _emit(config, "isoperimetric ranges", {"ranges": [r.to_json() for r in ranges]})


# -- plot data ----------------------------------------------------------------


@main.command("plot-data")
@click.option("--metric", type=click.Choice(["polya-deficit"]), required=True)
@click.option("--k", required=True, type=int)
@click.option("--h-range", "h_range", required=True)
@click.option("--steps", default=100, show_default=True)
@pass_config
def plot_data(config, metric, k, h_range, steps):
    if k < 1 or steps < 1:
        raise click.UsageError("k and steps must be >= 1")
    lo, hi = _parse_range(h_range)
    try:
        lo_q = lo.as_rational()
        hi_q = hi.as_rational()
    except ValueError:
        raise click.UsageError("plot-data expects rational range endpoints")
    if lo_q >= hi_q:
        raise click.UsageError("empty range")
    rows = [("h", "deficit_scaled")]
    points = []
    root_k = exact_sqrt(rational(k))
    for i in range(steps + 1):
        hq = lo_q + (hi_q - lo_q) * Fraction(i, steps)
        h = rational(hq)
        lam = kth_eigenvalue(h, k)
        deficit = (lam - rational(2 * k) / h) / root_k
        val = _seventeen_digits(eval_ball(deficit, 96))
        rows.append((_seventeen_digits(eval_ball(h, 96)), val))
        points.append({"h": str(hq), "deficit_scaled": val})
    _emit(
        config,
        "plot-data",
        {"metric": metric, "k": k, "points": points},
        csv_rows=rows,
    )


def _seventeen_digits(ball) -> str:
    import gmpy2

    digits, exp, _ = gmpy2.digits(ball.center, 10, 17)
    neg = digits.startswith("-")
    if neg:
        digits = digits[1:]
    return f"{'-' if neg else ''}{digits[0]}.{digits[1:]}e{exp - 1:+03d}"


# -- oracle -------------------------------------------------------------------


@main.group()
def oracle():
    """Brute-force cross-check entry points."""


@oracle.command("count")
@click.option("--h", "h_text", required=True)
@click.option("--lambda", "lam_text", required=True)
@pass_config
def oracle_count(config, h_text, lam_text):
    h = _parse_expr(h_text)
    lam = _parse_expr(lam_text)
    _emit(
        config,
        "oracle count",
        {
            "h": value_json(h),
            "lambda": value_json(lam),
            "count": counting_function(h, lam),
        },
    )


def entrypoint(argv: Optional[List[str]] = None) -> int:
    """Programmatic entry with the documented exit-code contract:
    0 success, 2 argument errors, 3 undecidable/certification failures."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 2
    except (Undecided, CertificateFailure) as exc:
        click.echo(f"certification error: {exc}", err=True)
        return 3
    except (DomainError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(entrypoint())
