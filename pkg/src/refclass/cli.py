"""Command-line interface.

Every setting can come from three places, in priority order: the command
line flag, a flat key=value config file named by --config, then the
built-in default. File outputs land under the --out directory and are
byte-stable: the same inputs always produce the same bytes.

Exit codes: 0 success, 1 usage error, 2 data error, 3 empty reference
class, 4 non-monotone curve where monotonicity is required.
"""

from __future__ import annotations

import io
import json
import sys
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import click

from .benchmarking import (
    benchmark_report,
    phase_breakdown,
    write_benchmark_csv,
    write_benchmark_json,
)
from .contingency import (
    DEFAULT_TIER_SCHEME,
    TierScheme,
    allocation_as_dict,
    tier_allocation,
)
from .errors import (
    EmptyClassError,
    NonMonotoneCurveError,
    RefclassError,
)
from .formatting import round_half_away
from .normalization import DEFAULT_ERA_CUTOFF, derive_all_observations
from .plot import curve_svg
from .reference_class import (
    DEFAULT_MIN_OUTTURN,
    ClassFilter,
    QuantileMethod,
    build_class,
    default_probability_grid,
    isotonic_adjust,
    smooth_curve,
    uplift_curve,
)
from .registry import (
    Metric,
    Stage,
    parse_benchmark_constants,
    parse_deflator_series,
    parse_project_records,
    parse_project_records_lenient,
)
from .validation import leave_one_out, loov_summary, write_loov_csv

_CONFIG_KEYS = (
    "projects",
    "deflators",
    "benchmark",
    "era_cutoff",
    "min_outturn",
    "method",
    "span",
    "degree",
    "grid_step",
    "out",
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one command invocation."""

    projects: Path
    deflators: Path | None
    benchmark: Path | None
    era_cutoff: date
    min_outturn: int
    method: str
    span: float
    degree: int
    grid_step: float
    out: Path


def _load_config_file(path: str) -> dict[str, str]:
    data: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.UsageError(f"cannot read config file: {exc}")
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise click.UsageError(f"config line {line_number}: expected key = value")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise click.UsageError(f"config line {line_number}: unknown key {key!r}")
        data[key] = value.strip()
    return data


def _parse_with(parser, value: str, what: str):
    try:
        return parser(value)
    except ValueError as exc:
        raise click.UsageError(f"invalid {what}: {exc}")


def _build_config(params: dict) -> RunConfig:
    file_data = _load_config_file(params["config"]) if params.get("config") else {}

    def pick(key: str, flag_value, parser, default):
        if flag_value is not None:
            return flag_value
        if key in file_data:
            return _parse_with(parser, file_data[key], key.replace("_", "-"))
        return default

    projects = pick("projects", params.get("projects"), str, None)
    if projects is None:
        raise click.UsageError("no projects file given (use --projects or a config file)")
    deflators = pick("deflators", params.get("deflators"), str, None)
    benchmark = pick("benchmark", params.get("benchmark"), str, None)
    return RunConfig(
        projects=Path(projects),
        deflators=None if deflators is None else Path(deflators),
        benchmark=None if benchmark is None else Path(benchmark),
        era_cutoff=pick("era_cutoff", params.get("era_cutoff"), date.fromisoformat, DEFAULT_ERA_CUTOFF),
        min_outturn=pick("min_outturn", params.get("min_outturn"), int, DEFAULT_MIN_OUTTURN),
        method=pick("method", params.get("method"), _parse_method_token, "interp"),
        span=pick("span", params.get("span"), float, 0.75),
        degree=pick("degree", params.get("degree"), _parse_degree_token, 2),
        grid_step=pick("grid_step", params.get("grid_step"), float, 0.01),
        out=Path(pick("out", params.get("out"), str, "out")),
    )


def _parse_method_token(token: str) -> str:
    token = token.strip().lower()
    if token not in ("inf", "interp", "both"):
        raise ValueError(f"expected inf, interp or both, got {token!r}")
    return token


def _parse_degree_token(token: str) -> int:
    value = int(token)
    if value not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {value}")
    return value


def _parse_era_cutoff(_ctx, _param, value):
    if value is None:
        return None
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise click.UsageError(f"invalid --era-cutoff: {value!r} is not an ISO date")


def _parse_p_list(_ctx, _param, value):
    if value is None:
        return None
    levels = []
    for token in value.split(","):
        token = token.strip()
        try:
            p = float(token)
        except ValueError:
            raise click.UsageError(f"invalid certainty {token!r} in --p")
        if not 0.0 < p <= 1.0:
            raise click.UsageError(f"certainty {p} in --p outside (0, 1]")
        levels.append(p)
    if not levels:
        raise click.UsageError("--p names no certainty levels")
    return tuple(levels)


def _parse_scheme(_ctx, _param, value):
    if value is None:
        return None
    tiers = []
    for token in value.split(","):
        name, sep, certainty = token.strip().partition(":")
        if not sep:
            raise click.UsageError(f"tier {token!r} is not name:certainty")
        try:
            tiers.append((name.strip(), float(certainty)))
        except ValueError:
            raise click.UsageError(f"tier {token!r} has a non-numeric certainty")
    try:
        return TierScheme(tiers=tuple(tiers))
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _common_options(command):
    options = [
        click.option("--config", type=str, default=None, help="Flat key = value settings file."),
        click.option("--projects", type=str, default=None, help="Project registry CSV."),
        click.option("--deflators", type=str, default=None, help="Deflator series CSV."),
        click.option("--benchmark", type=str, default=None, help="Benchmark constants JSON."),
        click.option("--era-cutoff", type=str, default=None, callback=_parse_era_cutoff,
                     help="Exclude projects whose Category C upgrade predates this ISO date."),
        click.option("--min-outturn", type=int, default=None,
                     help="Smallest outturn (HKD thousands) admitted to a class."),
        click.option("--method", type=click.Choice(["inf", "interp", "both"]), default=None,
                     help="Quantile convention (default interp)."),
        click.option("--span", type=float, default=None, help="Loess span fraction."),
        click.option("--degree", type=click.IntRange(1, 2), default=None, help="Loess degree."),
        click.option("--grid-step", type=float, default=None, help="Certainty grid step."),
        click.option("--out", type=str, default=None, help="Output directory (default ./out)."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


_STAGE_OPTION = click.option(
    "--stage", type=click.Choice(["C", "B", "A"]), required=True, help="Approval category."
)
_METRIC_OPTION = click.option(
    "--metric", type=click.Choice(["cost", "schedule"]), required=True, help="Overrun metric."
)


@click.group()
def cli() -> None:
    """Reference-class forecasting over a registry of completed projects."""


def _load_records(rc: RunConfig):
    with open(rc.projects, newline="") as handle:
        return parse_project_records(handle)


def _load_deflators(rc: RunConfig):
    if rc.deflators is None:
        raise click.UsageError("no deflators file given (use --deflators or a config file)")
    with open(rc.deflators, newline="") as handle:
        return parse_deflator_series(handle)


def _load_benchmark(rc: RunConfig):
    if rc.benchmark is None:
        return None
    with open(rc.benchmark) as handle:
        return parse_benchmark_constants(handle)


def _observations(rc: RunConfig):
    records = _load_records(rc)
    deflators = _load_deflators(rc)
    return records, derive_all_observations(records, deflators, rc.era_cutoff)


def _class_for(rc: RunConfig, observations, stage: Stage, metric: Metric):
    reference = build_class(
        observations,
        ClassFilter(stage=stage, metric=metric, min_outturn=rc.min_outturn),
    )
    if reference.is_empty:
        raise EmptyClassError(
            f"reference class is empty: stage {stage}, metric {metric}, "
            f"min outturn {rc.min_outturn}"
        )
    return reference


def _emit(rc: RunConfig, filename: str, text: str) -> None:
    rc.out.mkdir(parents=True, exist_ok=True)
    (rc.out / filename).write_text(text)


def _quantile_methods(rc: RunConfig) -> list[QuantileMethod]:
    if rc.method == "both":
        return [QuantileMethod.INTERPOLATED, QuantileMethod.INF]
    return [QuantileMethod.from_token(rc.method)]


def _single_method(rc: RunConfig, command: str) -> QuantileMethod:
    if rc.method == "both":
        raise click.UsageError(f"{command} needs a single quantile method, not both")
    return QuantileMethod.from_token(rc.method)


@cli.command("overruns")
@_common_options
@_STAGE_OPTION
@_METRIC_OPTION
def cmd_overruns(stage: str, metric: str, **params) -> None:
    """Normalized overrun observations for one stage and metric."""

    rc = _build_config(params)
    target_stage = Stage.from_token(stage)
    target_metric = Metric.from_token(metric)
    _, observations = _observations(rc)
    selected = [
        o for o in observations if o.stage is target_stage and o.metric is target_metric
    ]
    buffer = io.StringIO()
    buffer.write("project,stage,metric,value,reference_date,pre_era,outturn_nominal\n")
    for o in selected:
        buffer.write(
            f"{o.project_id},{o.stage},{o.metric},{o.value:.6f},"
            f"{o.reference_date.isoformat()},{'yes' if o.pre_era else 'no'},{o.outturn_nominal}\n"
        )
    text = buffer.getvalue()
    _emit(rc, f"overruns_{stage}_{metric}.csv", text)
    click.echo(text, nl=False)


@cli.command("uplift")
@_common_options
@_STAGE_OPTION
@_METRIC_OPTION
@click.option("--p", "p_levels", type=str, default=None, callback=_parse_p_list,
              help="Comma-separated certainty levels (default 0.5,0.8).")
@click.option("--smooth", is_flag=True, help="Also report the smoothed, monotone uplift.")
def cmd_uplift(stage: str, metric: str, p_levels, smooth: bool, **params) -> None:
    """Required uplifts at chosen certainty levels."""

    rc = _build_config(params)
    levels = p_levels or (0.5, 0.8)
    _, observations = _observations(rc)
    reference = _class_for(rc, observations, Stage.from_token(stage), Metric.from_token(metric))

    methods = _quantile_methods(rc)
    smoothed_curve = None
    if smooth:
        raw = uplift_curve(reference, default_probability_grid(rc.grid_step), methods[0])
        smoothed_curve = isotonic_adjust(smooth_curve(raw, span=rc.span, degree=rc.degree))

    buffer = io.StringIO()
    header = ["p"] + [f"uplift_{m.value}" for m in methods]
    if smoothed_curve is not None:
        header.append("uplift_smoothed")
    buffer.write(",".join(header) + "\n")
    from .reference_class import uplift as class_uplift

    for p in levels:
        cells = [f"{p:.2f}"] + [f"{class_uplift(reference, p, m):.6f}" for m in methods]
        if smoothed_curve is not None:
            cells.append(f"{smoothed_curve.value_at(p):.6f}")
        buffer.write(",".join(cells) + "\n")
    text = buffer.getvalue()
    _emit(rc, f"uplift_{stage}_{metric}.csv", text)
    click.echo(text, nl=False)


@cli.command("validate")
@_common_options
@_STAGE_OPTION
@_METRIC_OPTION
@click.option("--p", "p_levels", type=str, default=None, callback=_parse_p_list,
              help="Comma-separated certainty levels (default 0.5,0.8).")
def cmd_validate(stage: str, metric: str, p_levels, **params) -> None:
    """Leave-one-out check: would the uplift have covered each project?"""

    rc = _build_config(params)
    levels = p_levels or (0.5, 0.8)
    _, observations = _observations(rc)
    reference = _class_for(rc, observations, Stage.from_token(stage), Metric.from_token(metric))

    rows = leave_one_out(reference, levels, _single_method(rc, "validate"))
    buffer = io.StringIO()
    write_loov_csv(rows, buffer)
    text = buffer.getvalue()
    _emit(rc, f"loov_{stage}_{metric}.csv", text)
    click.echo(text, nl=False)
    for p in sorted(set(levels)):
        summary = loov_summary(rows, p)
        click.echo(
            f"# p{round(p * 100):d}: {summary.hits}/{summary.n} prevented "
            f"({round_half_away(summary.rate * 100):d}%)"
        )


@cli.command("benchmark")
@_common_options
@click.option("--benchmark-label", type=str, default=None,
              help="Which label to use from the benchmark file (default: international-roads, else first).")
def cmd_benchmark(benchmark_label, **params) -> None:
    """Descriptive comparison of every class against benchmark constants."""

    rc = _build_config(params)
    records, observations = _observations(rc)

    classes = {}
    for stage in Stage:
        for metric in Metric:
            reference = build_class(
                observations,
                ClassFilter(stage=stage, metric=metric, min_outturn=rc.min_outturn),
            )
            if not reference.is_empty:
                classes[(stage, metric)] = reference
    if not classes:
        raise EmptyClassError("no reference class has any observations")

    constants = None
    available = _load_benchmark(rc)
    if available:
        if benchmark_label is not None:
            if benchmark_label not in available:
                raise click.UsageError(
                    f"label {benchmark_label!r} not in benchmark file "
                    f"(has: {', '.join(sorted(available))})"
                )
            constants = available[benchmark_label]
        elif "international-roads" in available:
            constants = available["international-roads"]
        else:
            constants = available[sorted(available)[0]]

    breakdown_rows, aggregate = phase_breakdown(records)
    durations = None
    if aggregate.n:
        durations = [row.total_years for row in breakdown_rows]
    report = benchmark_report(classes, constants=constants, durations_years=durations)

    csv_buffer = io.StringIO()
    write_benchmark_csv(report, csv_buffer)
    json_buffer = io.StringIO()
    write_benchmark_json(report, json_buffer)
    _emit(rc, "benchmark.csv", csv_buffer.getvalue())
    _emit(rc, "benchmark.json", json_buffer.getvalue())
    click.echo(csv_buffer.getvalue(), nl=False)


@cli.command("curve")
@_common_options
@_STAGE_OPTION
@_METRIC_OPTION
def cmd_curve(stage: str, metric: str, **params) -> None:
    """Full uplift curve: raw quantiles, smoothed fit, confidence band."""

    rc = _build_config(params)
    _, observations = _observations(rc)
    reference = _class_for(rc, observations, Stage.from_token(stage), Metric.from_token(metric))

    raw = uplift_curve(reference, default_probability_grid(rc.grid_step), _single_method(rc, "curve"))
    smoothed = isotonic_adjust(smooth_curve(raw, span=rc.span, degree=rc.degree))

    buffer = io.StringIO()
    buffer.write("p,uplift_raw,uplift_smoothed,ci_low,ci_high\n")
    for (p, raw_value), (_, fit, lo, hi) in zip(smoothed.points, smoothed.smoothed):
        buffer.write(f"{p:.2f},{raw_value:.6f},{fit:.6f},{lo:.6f},{hi:.6f}\n")
    text = buffer.getvalue()
    _emit(rc, f"curve_{stage}_{metric}.csv", text)
    svg = curve_svg(smoothed, markers=(0.5, 0.8), title=f"uplift curve: Category {stage}, {metric}")
    _emit(rc, f"curve_{stage}_{metric}.svg", svg)
    click.echo(text, nl=False)


@cli.command("tiers")
@_common_options
@_STAGE_OPTION
@_METRIC_OPTION
@click.option("--base", type=int, required=True, help="Base estimate (HKD thousands).")
@click.option("--scheme", type=str, default=None, callback=_parse_scheme,
              help="Tiers as name:certainty,... (default contract:0.55,project:0.60,portfolio:0.80).")
@click.option("--no-isotonic", is_flag=True,
              help="Skip the monotone adjustment of the smoothed curve (may fail with exit 4).")
def cmd_tiers(stage: str, metric: str, base: int, scheme, no_isotonic: bool, **params) -> None:
    """Tiered contingency allocation along the smoothed uplift curve."""

    rc = _build_config(params)
    if base <= 0:
        raise click.UsageError(f"--base must be positive, got {base}")
    _, observations = _observations(rc)
    reference = _class_for(rc, observations, Stage.from_token(stage), Metric.from_token(metric))

    raw = uplift_curve(reference, default_probability_grid(rc.grid_step), _single_method(rc, "tiers"))
    curve = smooth_curve(raw, span=rc.span, degree=rc.degree)
    if not no_isotonic:
        curve = isotonic_adjust(curve)

    tier_scheme = scheme if scheme is not None else DEFAULT_TIER_SCHEME
    allocation = tier_allocation(base, curve, tier_scheme)
    text = json.dumps(allocation_as_dict(allocation), indent=2, sort_keys=True) + "\n"
    _emit(rc, f"tiers_{stage}_{metric}.json", text)
    click.echo(text, nl=False)


@cli.command("check")
@_common_options
def cmd_check(**params) -> None:
    """Registry validation only: report every consistency violation."""

    rc = _build_config(params)
    with open(rc.projects, newline="") as handle:
        records, reports = parse_project_records_lenient(handle)

    problem_count = 0
    for record in records:
        for violation in reports[record.id]:
            problem_count += 1
            click.echo(f"{violation.code}: {violation.message}")

    if rc.deflators is not None:
        with open(rc.deflators, newline="") as handle:
            parse_deflator_series(handle)
    if rc.benchmark is not None:
        with open(rc.benchmark) as handle:
            parse_benchmark_constants(handle)

    if problem_count:
        click.echo(f"{problem_count} violation(s) in {len(records)} record(s)")
        raise click.exceptions.Exit(2)
    click.echo(f"registry OK ({len(records)} records)")


def main(argv: list[str] | None = None) -> int:
    """Run the CLI, mapping failures onto the exit-code contract."""

    try:
        # Click returns an Exit's code instead of raising when not standalone.
        result = cli.main(args=argv, prog_name="refclass", standalone_mode=False)
        if isinstance(result, int):
            return result
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except EmptyClassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NonMonotoneCurveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (RefclassError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def entrypoint() -> None:
    sys.exit(main())
