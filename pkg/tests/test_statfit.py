import json
import math
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dexnet.analytics import DegreeHistogram
from dexnet.errors import DegenerateFitError, InsufficientDataError
from dexnet.statfit import loglog_points, ols_fit, regularized_incomplete_beta, student_t_sf

GRID = json.loads((Path(__file__).parent / "data" / "student_t_sf_grid.json").read_text())["rows"]


def textbook_ols(x, y):
    """Sum-of-products formulas, written independently of the library."""
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxy = sum(a * b for a, b in zip(x, y))
    sxx = sum(a * a for a in x)
    b = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    a = (sy - b * sx) / n
    sse = sum((yi - a - b * xi) ** 2 for xi, yi in zip(x, y))
    se = math.sqrt(sse / (n - 2) / (sxx - sx * sx / n))
    return a, b, se


class TestStudentT:
    @pytest.mark.parametrize("t,df,expected", GRID)
    def test_quadrature_grid(self, t, df, expected):
        assert student_t_sf(t, df) == pytest.approx(float(expected), abs=1e-9)

    def test_analytic_values(self):
        assert student_t_sf(0.0, 7) == 0.5
        assert student_t_sf(1.0, 1) == pytest.approx(0.25, abs=1e-15)
        assert student_t_sf(2.5, 10) == pytest.approx(0.01572342211830440212, abs=1e-12)
        # df = 2 has the closed form 1/2 - t / (2 sqrt(t^2 + 2))
        for t in (0.1, 1.3, 4.0, 25.0):
            assert student_t_sf(t, 2) == pytest.approx(0.5 - t / (2 * math.sqrt(t * t + 2)),
                                                       abs=1e-13)

    @settings(max_examples=200, deadline=None)
    @given(t=st.floats(0, 50), df=st.integers(1, 200))
    def test_symmetry(self, t, df):
        assert student_t_sf(-t, df) == pytest.approx(1 - student_t_sf(t, df), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(t=st.floats(-20, 20), dt=st.floats(1e-3, 5), df=st.integers(1, 100))
    def test_monotone_decreasing(self, t, dt, df):
        assert student_t_sf(t + dt, df) <= student_t_sf(t, df)

    def test_range_and_errors(self):
        assert student_t_sf(math.inf, 3) == 0.0 and student_t_sf(-math.inf, 3) == 1.0
        with pytest.raises(ValueError):
            student_t_sf(1.0, 0)

    def test_incomplete_beta_closed_forms(self):
        # I_x(a, 1) = x^a and I_x(1, b) = 1 - (1 - x)^b
        for x in (0.1, 0.5, 0.93):
            assert regularized_incomplete_beta(x, 3.5, 1) == pytest.approx(x ** 3.5, abs=1e-13)
            assert regularized_incomplete_beta(x, 1, 4) == pytest.approx(1 - (1 - x) ** 4, abs=1e-13)


class TestLogLogPoints:
    def test_exact_decades(self):
        pts = loglog_points(DegreeHistogram({1: 100, 10: 10, 100: 1}))
        np.testing.assert_allclose(pts.x, [0, 1, 2], atol=1e-15)
        np.testing.assert_allclose(pts.y, [2, 1, 0], atol=1e-15)

    def test_star_histogram(self):
        pts = loglog_points(DegreeHistogram({1: 4, 4: 1}))
        np.testing.assert_allclose(pts.x, [0, math.log10(4)])
        np.testing.assert_allclose(pts.y, [math.log10(4), 0])

    def test_zero_degree_and_empty(self):
        pts = loglog_points(DegreeHistogram({0: 3, 2: 5}))
        assert pts.degrees == (2.0,)
        with pytest.raises(InsufficientDataError):
            loglog_points(DegreeHistogram({0: 3}))

    def test_truncation(self):
        pts = loglog_points(DegreeHistogram({1: 9, 2: 5, 3: 2, 50: 1}), xmin=2, xmax=10)
        assert pts.degrees == (2.0, 3.0)

    def test_degrees_strictly_increasing(self):
        hist = DegreeHistogram(dict(Counter(np.random.default_rng(1).zipf(2.0, 5000).tolist())))
        for kw in ({}, {"log_bins": 5}):
            d = loglog_points(hist, **kw).degrees
            assert all(a < b for a, b in zip(d, d[1:]))


class TestOls:
    def test_exact_line_example(self):
        fit = ols_fit(([0, 1, 2, 3], [2, -1, -4, -7]))
        assert fit.slope == -3 and fit.intercept == 2
        assert fit.r_squared == 1 and fit.p_value == 0.0
        assert fit.degrees_of_freedom == 2 and fit.exponent == 3

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(-100, 100), b=st.floats(-10, 10),
           xs=st.lists(st.integers(-1000, 1000), min_size=3, max_size=40, unique=True))
    def test_exact_lines_recovered(self, a, b, xs):
        x = np.array(xs, dtype=float) / 100
        fit = ols_fit((x, a + b * x))
        assert fit.slope == pytest.approx(b, abs=1e-12)
        assert fit.intercept == pytest.approx(a, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(3, 60))
    def test_matches_textbook_formulas_and_residuals_orthogonal(self, seed, n):
        rng = np.random.default_rng(seed)
        x = rng.uniform(0, 3, n)
        y = 1.5 - 0.7 * x + rng.normal(0, 0.3, n)
        fit = ols_fit((x, y))
        a, b, se = textbook_ols(x.tolist(), y.tolist())
        assert fit.slope == pytest.approx(b, abs=1e-9)
        assert fit.intercept == pytest.approx(a, abs=1e-9)
        assert fit.stderr == pytest.approx(se, rel=1e-9)
        resid = y - (fit.intercept + fit.slope * x)
        assert abs(float((x - x.mean()) @ resid)) < 1e-9
        assert 0 <= fit.p_value <= 1

    def test_zero_slope_noise_gives_large_p(self):
        x = np.arange(10.0)
        y = np.array([0.1, -0.1] * 5)  # symmetric noise, slope near zero
        fit = ols_fit((x, y))
        a, b, se = textbook_ols(x.tolist(), y.tolist())
        from scipy import stats
        p_ref = 2 * stats.t.sf(abs(b / se), 8)
        assert fit.p_value == pytest.approx(p_ref, abs=1e-12)
        assert fit.p_value > 0.5

    def test_errors(self):
        with pytest.raises(InsufficientDataError):
            ols_fit(([1, 2], [3, 4]))
        with pytest.raises(DegenerateFitError):
            ols_fit(([1, 1, 1], [3, 4, 5]))

    def test_flat_exact_line(self):
        fit = ols_fit(([0, 1, 2], [5, 5, 5]))
        assert fit.slope == 0 and fit.p_value == 1.0


@pytest.mark.parametrize("k", [1.5, 2.0, 2.5, 3.0])
@pytest.mark.parametrize("seed", range(5))
def test_powerlaw_exponent_recovery(k, seed):
    sample = np.random.default_rng(seed).zipf(k, 10_000)
    hist = DegreeHistogram(dict(Counter(sample.tolist())))
    fit = ols_fit(loglog_points(hist, log_bins=5))
    assert abs(-fit.slope - k) <= 0.3
    assert fit.p_value < 0.01
