"""Small deterministic formatting helpers shared by reports and the CLI."""

from __future__ import annotations

import math


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""

    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def signed_percent(fraction: float) -> str:
    """Format an overrun fraction as a signed whole-percent string: +18%."""

    return f"{round_half_away(fraction * 100.0):+d}%"


def yes_no(flag: bool) -> str:
    return "yes" if flag else "no"
