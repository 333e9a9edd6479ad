import numpy as np
import pytest
from hypothesis import given, strategies as st

from refclass.smoothing import loess_smooth, pool_adjacent_violators


def isotonic_minimax(values):
    """Independent oracle: x*_i = max_{j<=i} min_{k>=i} mean(values[j..k])."""

    n = len(values)
    out = []
    for i in range(n):
        best = -np.inf
        for j in range(i + 1):
            inner = min(
                sum(values[j : k + 1]) / (k + 1 - j) for k in range(i, n)
            )
            best = max(best, inner)
        out.append(best)
    return out


@pytest.mark.parametrize("degree", [1, 2])
@pytest.mark.parametrize("span", [0.3, 0.5, 0.75, 1.0])
def test_loess_exact_on_line(degree, span):
    xs = [0.0, 0.7, 1.1, 2.4, 3.0, 4.2, 5.5, 6.1, 7.8, 9.0]
    points = [(x, 2 * x + 1) for x in xs]
    for x, fit, lo, hi in loess_smooth(points, span=span, degree=degree):
        assert fit == pytest.approx(2 * x + 1, abs=1e-9)
        assert lo <= fit <= hi


@pytest.mark.parametrize("span", [0.4, 0.75, 1.0])
def test_loess_exact_on_quadratic(span):
    points = [(float(x), float(x * x)) for x in range(11)]
    for x, fit, lo, hi in loess_smooth(points, span=span, degree=2):
        assert fit == pytest.approx(x * x, abs=1e-9)


def test_loess_constant_data_zero_width_band():
    points = [(float(x), 3.5) for x in range(8)]
    for x, fit, lo, hi in loess_smooth(points, degree=1):
        assert fit == pytest.approx(3.5, abs=1e-12)
        assert hi - lo == pytest.approx(0.0, abs=1e-9)


def test_loess_degenerate_window_falls_back_to_mean():
    points = [(1.0, 0.0), (1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]
    for _, fit, _, _ in loess_smooth(points, degree=1, span=1.0):
        assert fit == pytest.approx(1.5)


def test_loess_output_sorted_regardless_of_input_order():
    points = [(3.0, 9.0), (0.0, 0.0), (2.0, 4.0), (4.0, 16.0), (1.0, 1.0)]
    result = loess_smooth(points, span=1.0, degree=2)
    assert [x for x, *_ in result] == [0.0, 1.0, 2.0, 3.0, 4.0]


def test_loess_parameter_validation():
    from refclass.errors import InsufficientDataError

    points = [(float(x), float(x)) for x in range(6)]
    with pytest.raises(ValueError):
        loess_smooth(points, degree=3)
    with pytest.raises(ValueError):
        loess_smooth(points, span=0.0)
    with pytest.raises(ValueError):
        loess_smooth(points, span=1.2)
    with pytest.raises(InsufficientDataError):
        loess_smooth(points[:3], degree=2)


def test_pav_pools_single_violation():
    assert pool_adjacent_violators([1.0, 3.0, 2.0]) == pytest.approx([1.0, 2.5, 2.5])


def test_pav_decreasing_collapses_to_mean():
    assert pool_adjacent_violators([3.0, 2.0, 1.0]) == pytest.approx([2.0, 2.0, 2.0])


def test_pav_monotone_input_unchanged():
    values = [-0.5, -0.1, 0.0, 0.0, 0.3, 1.2]
    assert pool_adjacent_violators(values) == pytest.approx(values)


def test_pav_respects_weights():
    result = pool_adjacent_violators([3.0, 1.0], weights=[1.0, 3.0])
    assert result == pytest.approx([1.5, 1.5])


def test_pav_matches_minimax_formula_on_seeded_sequences():
    rng = np.random.default_rng(4711)
    for _ in range(20):
        values = rng.normal(0, 1, size=6).tolist()
        assert pool_adjacent_violators(values) == pytest.approx(
            isotonic_minimax(values), abs=1e-6
        )


@given(st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=25))
def test_pav_output_non_decreasing_and_mean_preserving(values):
    result = pool_adjacent_violators(values)
    assert all(a <= b + 1e-12 for a, b in zip(result, result[1:]))
    assert sum(result) == pytest.approx(sum(values), rel=1e-9, abs=1e-9)


@given(st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=1, max_size=25))
def test_pav_idempotent(values):
    once = pool_adjacent_violators(values)
    twice = pool_adjacent_violators(once)
    assert twice == pytest.approx(once, rel=1e-12, abs=1e-12)
