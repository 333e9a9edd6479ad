"""Project registry: proforma parsing, validation, and benchmark constants.

Three file-backed inputs feed the toolkit:

* ``projects.csv`` -- one wide row per completed project (the standard
  proforma): approval-stage dates and estimates, outturn, disbursements.
* ``deflators.csv`` -- a contiguous year -> price-index series.
* ``benchmark.json`` -- published summary constants for external comparison.

Money is carried as integer thousands of HKD exactly as ingested; fractional
money appears only in derived figures downstream.
"""

from __future__ import annotations

import csv
import enum
import json
import re
from dataclasses import dataclass, field
from datetime import date
from typing import IO, Iterable, Mapping, Sequence

from .errors import DataFormatError, DeflatorCoverageError, RecordConsistencyError

# Relative tolerance for money bookkeeping checks (approved vs base +
# contingency, disbursement sum vs outturn).
CONSISTENCY_TOLERANCE = 0.005

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_.-]+$")
_INT_PATTERN = re.compile(r"^[+-]?[0-9]+$")
_YEAR_PATTERN = re.compile(r"^[0-9]{4}$")


class Stage(enum.IntEnum):
    """Approval categories in upgrade order: C, then B, then A."""

    C = 0
    B = 1
    A = 2

    @classmethod
    def from_token(cls, token: str) -> "Stage":
        try:
            return cls[token.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown stage {token!r}, expected C, B or A") from None

    def __str__(self) -> str:
        return self.name


class Metric(enum.Enum):
    COST = "cost"
    SCHEDULE = "schedule"

    @classmethod
    def from_token(cls, token: str) -> "Metric":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise ValueError(f"unknown metric {token!r}, expected cost or schedule") from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class StageEstimate:
    """Everything the proforma records about one approval stage.

    All fields are optional: a project may enter the registry at any stage.
    Money is integer thousands of HKD; ``base`` excludes ``contingency`` and
    ``approved`` should equal their sum.
    """

    upgrade_date: date | None = None
    base: int | None = None
    contingency: int | None = None
    approved: int | None = None
    planned_completion: date | None = None
    price_level_year: int | None = None

    @property
    def is_blank(self) -> bool:
        return all(
            v is None
            for v in (
                self.upgrade_date,
                self.base,
                self.contingency,
                self.approved,
                self.planned_completion,
                self.price_level_year,
            )
        )


@dataclass(frozen=True)
class ProjectRecord:
    """One completed project as recorded in the registry proforma."""

    id: str
    stages: Mapping[Stage, StageEstimate] = field(default_factory=dict)
    construction_start: date | None = None
    actual_completion: date | None = None
    outturn_nominal: int | None = None
    disbursements: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        # Every record carries all three stages; absent ones are blank.
        stages = dict(self.stages)
        for stage in Stage:
            stages.setdefault(stage, StageEstimate())
        object.__setattr__(self, "stages", stages)

    def stage(self, stage: Stage) -> StageEstimate:
        return self.stages[stage]


@dataclass(frozen=True)
class Violation:
    """One registry-invariant failure, reported as data rather than raised."""

    code: str
    message: str
    stage: Stage | None = None


@dataclass(frozen=True)
class DeflatorSeries:
    """Contiguous year -> price-index series, normalized so that
    ``index(base_year) == 1.0``.

    Only index ratios matter downstream, so the choice of base year is
    presentational.
    """

    base_year: int
    start_year: int
    values: tuple[float, ...]

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[int, float]], base_year: int | None = None
    ) -> "DeflatorSeries":
        items = sorted(pairs)
        if not items:
            raise DataFormatError("deflator series is empty")
        years = [y for y, _ in items]
        if len(set(years)) != len(years):
            dup = next(y for i, y in enumerate(years) if y in years[:i])
            raise DataFormatError(f"duplicate deflator year {dup}")
        for prev, cur in zip(years, years[1:]):
            if cur != prev + 1:
                raise DataFormatError(f"deflator series is missing year {prev + 1}")
        for year, value in items:
            if not value > 0:
                raise DataFormatError(f"deflator index for {year} must be positive, got {value}")
        if base_year is None:
            base_year = years[0]
        if not years[0] <= base_year <= years[-1]:
            raise DataFormatError(f"base year {base_year} outside series {years[0]}-{years[-1]}")
        base_value = dict(items)[base_year]
        return cls(
            base_year=base_year,
            start_year=years[0],
            values=tuple(value / base_value for _, value in items),
        )

    @property
    def years(self) -> range:
        return range(self.start_year, self.start_year + len(self.values))

    def covers(self, year: int) -> bool:
        return self.start_year <= year < self.start_year + len(self.values)

    def index(self, year: int) -> float:
        if not self.covers(year):
            last = self.start_year + len(self.values) - 1
            raise DeflatorCoverageError(
                f"year {year} outside deflator coverage {self.start_year}-{last}"
            )
        return self.values[year - self.start_year]

    def as_dict(self) -> dict[int, float]:
        return {year: self.values[year - self.start_year] for year in self.years}


@dataclass(frozen=True)
class BenchmarkConstants:
    """Published summary statistics for an external comparison group."""

    label: str
    n_projects: int
    mean_cost_overrun: float
    cost_overrun_frequency: float
    cost_overrun_sd: float
    mean_schedule_overrun: float
    schedule_overrun_frequency: float
    schedule_overrun_sd: float
    mean_duration_years: float

    def __post_init__(self) -> None:
        if self.n_projects < 1:
            raise ValueError(f"benchmark {self.label!r}: n_projects must be >= 1")
        for name in ("cost_overrun_frequency", "schedule_overrun_frequency"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"benchmark {self.label!r}: {name} must lie in [0, 1], got {value}")
        for name in ("cost_overrun_sd", "schedule_overrun_sd"):
            if getattr(self, name) < 0:
                raise ValueError(f"benchmark {self.label!r}: {name} must be non-negative")
        if self.mean_duration_years <= 0:
            raise ValueError(f"benchmark {self.label!r}: mean_duration_years must be positive")


#: Published road-project comparison group used as the default external anchor.
INTERNATIONAL_ROADS = BenchmarkConstants(
    label="international-roads",
    n_projects=863,
    mean_cost_overrun=0.20,
    cost_overrun_frequency=0.9,
    cost_overrun_sd=0.30,
    mean_schedule_overrun=0.38,
    schedule_overrun_frequency=0.6,
    schedule_overrun_sd=0.85,
    mean_duration_years=5.5,
)


PROJECT_COLUMNS: tuple[str, ...] = (
    "id",
    "date_c",
    "date_b",
    "date_a",
    "base_c",
    "cont_c",
    "approved_c",
    "planned_completion_c",
    "base_b",
    "cont_b",
    "approved_b",
    "planned_completion_b",
    "base_a",
    "cont_a",
    "approved_a",
    "planned_completion_a",
    "price_level_year_c",
    "price_level_year_b",
    "price_level_year_a",
    "construction_start",
    "actual_completion",
    "outturn_nominal",
    "disbursements",
)


def _parse_id(text: str) -> str:
    if not _ID_PATTERN.match(text):
        raise ValueError(f"invalid project id {text!r}")
    return text


def _parse_money(text: str) -> int:
    if not _INT_PATTERN.match(text):
        raise ValueError(f"invalid money amount {text!r} (integer HKD thousands expected)")
    return int(text)


def _parse_year(text: str) -> int:
    if not _YEAR_PATTERN.match(text):
        raise ValueError(f"invalid year {text!r}")
    return int(text)


def _parse_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ValueError(f"invalid ISO date {text!r}") from None


def _parse_disbursements(text: str) -> dict[int, int]:
    spent: dict[int, int] = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError("empty disbursement entry")
        year_text, sep, amount_text = chunk.partition(":")
        if not sep:
            raise ValueError(f"disbursement entry {chunk!r} is not year:amount")
        year = _parse_year(year_text.strip())
        amount = _parse_money(amount_text.strip())
        if year in spent:
            raise ValueError(f"duplicate disbursement year {year}")
        spent[year] = amount
    return spent


def validate_record(record: ProjectRecord) -> list[Violation]:
    """Check every registry invariant, reporting failures as data.

    Total by design: any syntactically well-formed record yields a report.
    An empty report means the record is internally consistent.
    """

    problems: list[Violation] = []

    if record.actual_completion is None:
        problems.append(Violation("missing-completion", f"{record.id}: actual completion date is missing"))
    if record.outturn_nominal is None:
        problems.append(Violation("missing-outturn", f"{record.id}: nominal outturn is missing"))
    elif record.outturn_nominal <= 0:
        problems.append(
            Violation("non-positive-outturn", f"{record.id}: outturn must be positive, got {record.outturn_nominal}")
        )

    dated = [(s, record.stages[s].upgrade_date) for s in Stage if record.stages[s].upgrade_date is not None]
    for (s0, d0), (s1, d1) in zip(dated, dated[1:]):
        if d1 < d0:
            problems.append(
                Violation(
                    "stage-order",
                    f"{record.id}: {s1} upgrade ({d1.isoformat()}) precedes {s0} upgrade ({d0.isoformat()})",
                    stage=s1,
                )
            )

    for stage in Stage:
        est = record.stages[stage]
        for label, amount, floor in (
            ("base", est.base, 1),
            ("contingency", est.contingency, 0),  # a zero contingency is legal
            ("approved", est.approved, 1),
        ):
            if amount is not None and amount < floor:
                problems.append(
                    Violation(
                        "non-positive-money",
                        f"{record.id}: {label} at Category {stage} must be at least {floor}, got {amount}",
                        stage=stage,
                    )
                )
        if est.base is not None and est.price_level_year is None:
            problems.append(
                Violation(
                    "missing-price-year",
                    f"{record.id}: base estimate at Category {stage} has no price-level year",
                    stage=stage,
                )
            )
        if est.base is not None and est.contingency is not None and est.approved is not None:
            expected = est.base + est.contingency
            if expected > 0 and abs(est.approved - expected) > CONSISTENCY_TOLERANCE * expected:
                problems.append(
                    Violation(
                        "estimate-consistency",
                        f"{record.id}: Category {stage} approved estimate {est.approved} differs from "
                        f"base + contingency = {expected} by more than {CONSISTENCY_TOLERANCE:.1%}",
                        stage=stage,
                    )
                )
        if est.upgrade_date is not None and record.actual_completion is not None:
            if record.actual_completion < est.upgrade_date:
                problems.append(
                    Violation(
                        "completion-before-upgrade",
                        f"{record.id}: actual completion {record.actual_completion.isoformat()} precedes "
                        f"Category {stage} upgrade {est.upgrade_date.isoformat()}",
                        stage=stage,
                    )
                )
        if est.upgrade_date is not None and est.planned_completion is not None:
            if est.planned_completion <= est.upgrade_date:
                problems.append(
                    Violation(
                        "non-positive-planned-duration",
                        f"{record.id}: Category {stage} planned completion {est.planned_completion.isoformat()} "
                        f"does not follow the upgrade date {est.upgrade_date.isoformat()}",
                        stage=stage,
                    )
                )

    if record.disbursements is not None:
        for year, amount in sorted(record.disbursements.items()):
            if amount <= 0:
                problems.append(
                    Violation(
                        "non-positive-disbursement",
                        f"{record.id}: disbursement for {year} must be positive, got {amount}",
                    )
                )
        if record.outturn_nominal is not None and record.outturn_nominal > 0:
            total = sum(record.disbursements.values())
            if abs(total - record.outturn_nominal) > CONSISTENCY_TOLERANCE * record.outturn_nominal:
                problems.append(
                    Violation(
                        "disbursement-sum",
                        f"{record.id}: disbursements sum to {total}, outturn is {record.outturn_nominal} "
                        f"(difference exceeds {CONSISTENCY_TOLERANCE:.1%})",
                    )
                )

    return problems


def _record_from_row(cells: dict[str, str], row_number: int) -> ProjectRecord:
    def parsed(column: str, parser):
        text = cells[column].strip()
        if text == "":
            return None
        try:
            return parser(text)
        except ValueError as exc:
            raise DataFormatError(f"row {row_number}, column {column!r}: {exc}") from None

    project_id = parsed("id", _parse_id)
    if project_id is None:
        raise DataFormatError(f"row {row_number}, column 'id': project id is missing")

    stages = {}
    for stage, suffix in ((Stage.C, "c"), (Stage.B, "b"), (Stage.A, "a")):
        stages[stage] = StageEstimate(
            upgrade_date=parsed(f"date_{suffix}", _parse_date),
            base=parsed(f"base_{suffix}", _parse_money),
            contingency=parsed(f"cont_{suffix}", _parse_money),
            approved=parsed(f"approved_{suffix}", _parse_money),
            planned_completion=parsed(f"planned_completion_{suffix}", _parse_date),
            price_level_year=parsed(f"price_level_year_{suffix}", _parse_year),
        )

    return ProjectRecord(
        id=project_id,
        stages=stages,
        construction_start=parsed("construction_start", _parse_date),
        actual_completion=parsed("actual_completion", _parse_date),
        outturn_nominal=parsed("outturn_nominal", _parse_money),
        disbursements=parsed("disbursements", _parse_disbursements),
    )


def parse_project_records_lenient(
    source: Iterable[str] | IO[str],
) -> tuple[list[ProjectRecord], dict[str, list[Violation]]]:
    """Parse the proforma, reporting invariant violations instead of raising.

    Structural problems (bad header, bad cell, duplicate id) still raise
    DataFormatError; only record-level consistency is deferred to the report.
    """

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("projects file is empty (header row required)") from None
    if tuple(cell.strip() for cell in header) != PROJECT_COLUMNS:
        raise DataFormatError(
            "unexpected projects header: expected exactly "
            f"{','.join(PROJECT_COLUMNS)}"
        )

    records: list[ProjectRecord] = []
    reports: dict[str, list[Violation]] = {}
    for row_number, row in enumerate(reader, start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        if len(row) != len(PROJECT_COLUMNS):
            raise DataFormatError(
                f"row {row_number}: expected {len(PROJECT_COLUMNS)} columns, got {len(row)}"
            )
        record = _record_from_row(dict(zip(PROJECT_COLUMNS, row)), row_number)
        if record.id in reports:
            raise DataFormatError(f"row {row_number}: duplicate project id {record.id!r}")
        records.append(record)
        reports[record.id] = validate_record(record)
    return records, reports


def parse_project_records(source: Iterable[str] | IO[str]) -> list[ProjectRecord]:
    """Parse the proforma strictly: any registry-invariant violation raises."""

    records, reports = parse_project_records_lenient(source)
    for record in records:
        problems = reports[record.id]
        if problems:
            raise RecordConsistencyError("; ".join(v.message for v in problems))
    return records


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def record_to_row(record: ProjectRecord) -> list[str]:
    # Column order is fixed by PROJECT_COLUMNS; build explicitly.
    est = {s: record.stages[s] for s in Stage}
    return [
        record.id,
        _format_cell(est[Stage.C].upgrade_date),
        _format_cell(est[Stage.B].upgrade_date),
        _format_cell(est[Stage.A].upgrade_date),
        _format_cell(est[Stage.C].base),
        _format_cell(est[Stage.C].contingency),
        _format_cell(est[Stage.C].approved),
        _format_cell(est[Stage.C].planned_completion),
        _format_cell(est[Stage.B].base),
        _format_cell(est[Stage.B].contingency),
        _format_cell(est[Stage.B].approved),
        _format_cell(est[Stage.B].planned_completion),
        _format_cell(est[Stage.A].base),
        _format_cell(est[Stage.A].contingency),
        _format_cell(est[Stage.A].approved),
        _format_cell(est[Stage.A].planned_completion),
        _format_cell(est[Stage.C].price_level_year),
        _format_cell(est[Stage.B].price_level_year),
        _format_cell(est[Stage.A].price_level_year),
        _format_cell(record.construction_start),
        _format_cell(record.actual_completion),
        _format_cell(record.outturn_nominal),
        "" if record.disbursements is None else ";".join(
            f"{year}:{amount}" for year, amount in sorted(record.disbursements.items())
        ),
    ]


def write_project_records(records: Sequence[ProjectRecord], sink: IO[str]) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(PROJECT_COLUMNS)
    for record in records:
        writer.writerow(record_to_row(record))


def parse_deflator_series(
    source: Iterable[str] | IO[str], base_year: int | None = None
) -> DeflatorSeries:
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("deflators file is empty (header row required)") from None
    if tuple(cell.strip() for cell in header) != ("year", "index"):
        raise DataFormatError("unexpected deflators header: expected year,index")
    pairs: list[tuple[int, float]] = []
    for row_number, row in enumerate(reader, start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        if len(row) != 2:
            raise DataFormatError(f"row {row_number}: expected 2 columns, got {len(row)}")
        try:
            year = _parse_year(row[0].strip())
        except ValueError as exc:
            raise DataFormatError(f"row {row_number}, column 'year': {exc}") from None
        try:
            value = float(row[1].strip())
        except ValueError:
            raise DataFormatError(f"row {row_number}, column 'index': invalid number {row[1]!r}") from None
        pairs.append((year, value))
    return DeflatorSeries.from_pairs(pairs, base_year=base_year)


_BENCHMARK_FIELDS = (
    "n_projects",
    "mean_cost_overrun",
    "cost_overrun_frequency",
    "cost_overrun_sd",
    "mean_schedule_overrun",
    "schedule_overrun_frequency",
    "schedule_overrun_sd",
    "mean_duration_years",
)


def parse_benchmark_constants(source: str | IO[str]) -> dict[str, BenchmarkConstants]:
    """Parse benchmark.json: a mapping from label to summary constants."""

    text = source if isinstance(source, str) else source.read()
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"benchmark file is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise DataFormatError("benchmark file must hold an object keyed by label")
    result: dict[str, BenchmarkConstants] = {}
    for label, body in payload.items():
        if not isinstance(body, dict):
            raise DataFormatError(f"benchmark {label!r}: entry must be an object")
        missing = [name for name in _BENCHMARK_FIELDS if name not in body]
        if missing:
            raise DataFormatError(f"benchmark {label!r}: missing fields {', '.join(missing)}")
        try:
            result[label] = BenchmarkConstants(
                label=label,
                n_projects=int(body["n_projects"]),
                mean_cost_overrun=float(body["mean_cost_overrun"]),
                cost_overrun_frequency=float(body["cost_overrun_frequency"]),
                cost_overrun_sd=float(body["cost_overrun_sd"]),
                mean_schedule_overrun=float(body["mean_schedule_overrun"]),
                schedule_overrun_frequency=float(body["schedule_overrun_frequency"]),
                schedule_overrun_sd=float(body["schedule_overrun_sd"]),
                mean_duration_years=float(body["mean_duration_years"]),
            )
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"benchmark {label!r}: {exc}") from None
    return result


def has_cost_data(record: ProjectRecord, stage: Stage) -> bool:
    """True when a cost overrun at this stage is computable from the record
    alone (deflator coverage is checked later, at derivation time)."""

    est = record.stages[stage]
    if est.upgrade_date is None or est.base is None or est.base <= 0:
        return False
    if est.price_level_year is None:
        return False
    if record.outturn_nominal is None or record.outturn_nominal <= 0:
        return False
    if record.disbursements is not None:
        return True
    # Without actual disbursements the outturn is spread over construction
    # years, which needs a start date and the completion date.
    start = record.construction_start or record.stages[Stage.A].upgrade_date
    return start is not None and record.actual_completion is not None


def has_schedule_data(record: ProjectRecord, stage: Stage) -> bool:
    est = record.stages[stage]
    if est.upgrade_date is None or est.planned_completion is None:
        return False
    if record.actual_completion is None:
        return False
    return est.planned_completion > est.upgrade_date and record.actual_completion > est.upgrade_date


def stage_availability(records: Sequence[ProjectRecord]) -> dict[tuple[Stage, Metric], int]:
    """Count records with a computable overrun, per stage and metric."""

    counts = {(stage, metric): 0 for stage in Stage for metric in Metric}
    for record in records:
        for stage in Stage:
            if has_cost_data(record, stage):
                counts[(stage, Metric.COST)] += 1
            if has_schedule_data(record, stage):
                counts[(stage, Metric.SCHEDULE)] += 1
    return counts
