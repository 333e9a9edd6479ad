"""Leave-one-out validation of a reference class.

Each project is held out in turn, the uplift curve is rebuilt from the
remaining n - 1 outcomes, and the held-out project's actual overrun is
compared with the uplift it would have been given. An overrun is counted as
prevented when the actual outcome does not exceed the uplift (the boundary
case counts as covered: funding exactly met the outcome).

Across many classes the hit rate at certainty p should approach p; that is
the calibration property this module exists to check.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Sequence

from .errors import InsufficientDataError
from .formatting import signed_percent, yes_no
from .reference_class import QuantileMethod, ReferenceClass, empirical_quantile

DEFAULT_P_LEVELS = (0.5, 0.8)


@dataclass(frozen=True)
class LoovRow:
    """One held-out project: the uplifts the rest of the class implies for
    it, its actual overrun, and whether funding at each level covered it."""

    project_id: str
    uplift_at: dict[float, float]
    actual: float
    prevented_at: dict[float, bool]


@dataclass(frozen=True)
class LoovSummary:
    p_level: float
    hits: int
    n: int
    rate: float


def leave_one_out(
    reference: ReferenceClass,
    p_levels: Sequence[float] = DEFAULT_P_LEVELS,
    method: QuantileMethod = QuantileMethod.INTERPOLATED,
) -> list[LoovRow]:
    """One row per class member, in class input order."""

    if reference.n < 2:
        raise InsufficientDataError(
            f"leave-one-out needs at least 2 observations, got {reference.n}"
        )
    if not p_levels:
        raise ValueError("at least one certainty level is required")
    levels = sorted(set(p_levels))

    values = [o.value for o in reference.entries]
    rows: list[LoovRow] = []
    for i, held_out in enumerate(reference.entries):
        rest = sorted(values[:i] + values[i + 1 :])
        uplifts = {p: empirical_quantile(rest, p, method) for p in levels}
        prevented = {p: held_out.value <= uplifts[p] for p in levels}
        rows.append(
            LoovRow(
                project_id=held_out.project_id,
                uplift_at=uplifts,
                actual=held_out.value,
                prevented_at=prevented,
            )
        )
    return rows


def loov_summary(rows: Sequence[LoovRow], p_level: float) -> LoovSummary:
    if not rows:
        raise ValueError("no rows to summarize")
    try:
        hits = sum(1 for row in rows if row.prevented_at[p_level])
    except KeyError:
        raise ValueError(f"rows carry no certainty level {p_level}") from None
    return LoovSummary(p_level=p_level, hits=hits, n=len(rows), rate=hits / len(rows))


def _level_token(p: float) -> str:
    return f"p{round(p * 100):d}"


def write_loov_csv(rows: Sequence[LoovRow], sink: IO[str]) -> None:
    """CSV report; uplifts and actuals appear as whole percentages, the way
    they are read in review meetings, while the prevented flags were decided
    on the unrounded values."""

    if not rows:
        raise ValueError("no rows to write")
    levels = sorted(rows[0].uplift_at)
    header = ["project"]
    header += [f"{_level_token(p)}_uplift" for p in levels]
    header += ["actual"]
    header += [f"{_level_token(p)}_prevented" for p in levels]
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        cells = [row.project_id]
        cells += [signed_percent(row.uplift_at[p]) for p in levels]
        cells += [signed_percent(row.actual)]
        cells += [yes_no(row.prevented_at[p]) for p in levels]
        writer.writerow(cells)
