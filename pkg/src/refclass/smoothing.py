"""Local regression and monotone projection for uplift curves and trends.

loess_smooth fits a tricube-weighted local polynomial (degree 1 or 2) at
every input x. The window holds the ceil(span * n) nearest points, never
fewer than degree + 2. Because the fit at each point is a linear map of the
responses, the same hat vector that produces the fit also yields a pointwise
standard error; the 95 percent band is fit +/- 1.96 * SE with the residual
variance estimated globally.

pool_adjacent_violators is the least-squares projection onto non-decreasing
sequences: scan forward, merge adjacent blocks whose means are out of order,
and write each block's weighted mean back over its span.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError

_Z_95 = 1.96


def loess_smooth(
    points: Sequence[tuple[float, float]],
    span: float = 0.75,
    degree: int = 2,
) -> list[tuple[float, float, float, float]]:
    """Smooth (x, y) points, returning (x, fit, ci_low, ci_high) per point
    in ascending x order.

    Exactly reproduces polynomial data of the fitted degree. A window whose
    x values have collapsed to a single point degenerates to the local mean.
    """

    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    if not 0.0 < span <= 1.0:
        raise ValueError(f"span must lie in (0, 1], got {span}")
    n = len(points)
    if n < degree + 2:
        raise InsufficientDataError(
            f"loess needs at least {degree + 2} points for degree {degree}, got {n}"
        )

    order = sorted(range(n), key=lambda i: (points[i][0], i))
    x = np.array([points[i][0] for i in order], dtype=float)
    y = np.array([points[i][1] for i in order], dtype=float)

    window_size = min(n, max(math.ceil(span * n), degree + 2))

    fits = np.empty(n)
    hat = np.zeros((n, n))
    for i in range(n):
        distance = np.abs(x - x[i])
        window = np.argsort(distance, kind="stable")[:window_size]
        d_max = float(distance[window].max())
        if d_max == 0.0:
            # All window points share this x: the local design is degenerate,
            # so fall back to their plain mean.
            fits[i] = float(np.mean(y[window]))
            hat[i, window] = 1.0 / window_size
            continue
        u = distance[window] / d_max
        weights = np.clip((1.0 - u**3) ** 3, 0.0, None)
        sqrt_w = np.sqrt(weights)
        design = np.vander(x[window] - x[i], degree + 1, increasing=True)
        # beta = pinv(sqrt(W) X) sqrt(W) y; row 0 of the pseudo-inverse gives
        # the hat vector for the centred intercept, i.e. the fit at x[i].
        pseudo = np.linalg.pinv(design * sqrt_w[:, None])
        fits[i] = float(pseudo[0] @ (y[window] * sqrt_w))
        hat[i, window] = pseudo[0] * sqrt_w

    residuals = y - fits
    effective_df = float(np.trace(hat))
    denom = max(float(n) - effective_df, 1.0)
    sigma2 = float(residuals @ residuals) / denom
    se = np.sqrt(sigma2 * np.sum(hat * hat, axis=1))

    return [
        (float(x[i]), float(fits[i]), float(fits[i] - _Z_95 * se[i]), float(fits[i] + _Z_95 * se[i]))
        for i in range(n)
    ]


def pool_adjacent_violators(
    values: Sequence[float], weights: Sequence[float] | None = None
) -> list[float]:
    """Least-squares non-decreasing fit to ``values``.

    The result is flat over each pooled block, taking the block's weighted
    mean; already-monotone input comes back unchanged.
    """

    n = len(values)
    if n == 0:
        raise ValueError("cannot project an empty sequence")
    if weights is None:
        weights = [1.0] * n
    elif len(weights) != n:
        raise ValueError("weights must match values in length")
    elif any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")

    # Each block is [mean, weight, count]; merge while out of order.
    blocks: list[list[float]] = []
    for value, weight in zip(values, weights):
        blocks.append([float(value), float(weight), 1])
        while len(blocks) >= 2 and blocks[-2][0] > blocks[-1][0]:
            mean_b, w_b, c_b = blocks.pop()
            mean_a, w_a, c_a = blocks.pop()
            w = w_a + w_b
            blocks.append([(mean_a * w_a + mean_b * w_b) / w, w, c_a + c_b])

    result: list[float] = []
    for mean, _, count in blocks:
        result.extend([mean] * count)
    return result
