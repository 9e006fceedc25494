"""Log-log OLS fit of a degree distribution, with a t-test on the slope.

A power law ``f(x) = a (c x)^-k`` becomes the line
``log f(x) = d - k log x`` after taking logs, so the slope estimates ``-k``.
Base-10 logs are used; the base only shifts the intercept.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .analytics import DegreeHistogram, degree_distribution
from .errors import DegenerateFitError, InsufficientDataError
from .graph import TokenGraph

__all__ = ["LogLogPoints", "PowerLawFit", "loglog_points", "ols_fit", "student_t_sf",
           "regularized_incomplete_beta", "powerlaw_fit"]


_EPS = 1e-16
_TINY = 1e-300


def _beta_cf(a, b, x, max_iter=10_000):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """``I_x(a, b)`` for ``0 <= x <= 1`` and ``a, b > 0``."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    # the fraction converges fast only below the mean; use symmetry above it
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """Survival function ``P(T > t)`` of Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    if t == 0:
        return 0.5
    tail = 0.5 * regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
    return tail if t > 0 else 1.0 - tail


@dataclass(frozen=True)
class LogLogPoints:
    degrees: tuple[float, ...]
    x: np.ndarray  # log10 degree
    y: np.ndarray  # log10 count (or binned density)

    def __len__(self):
        return len(self.degrees)


def loglog_points(hist: DegreeHistogram, *, xmin: int | None = None, xmax: int | None = None,
                  log_bins: int | None = None, min_bin_count: int = 10) -> LogLogPoints:
    """Base-10 log of (degree, count) for every degree with a nonzero count.

    By default the plain histogram is used. ``xmin``/``xmax`` truncate the
    degree range. ``log_bins`` (bins per decade) replaces raw counts with
    the mean count per integer degree in geometric bins, placed at the
    geometric mean of the bin's integers; binning stops at the first bin
    holding fewer than ``min_bin_count`` nodes, since sparse tail bins only
    survive when they happen to be hit and would flatten the slope.
    """
    items = [(d, c) for d, c in sorted(hist.items())
             if d >= 1 and c >= 1
             and (xmin is None or d >= xmin) and (xmax is None or d <= xmax)]
    if not items:
        raise InsufficientDataError("histogram has no positive-degree entries")
    if not log_bins:
        degrees = tuple(float(d) for d, _ in items)
        y = np.log10([c for _, c in items], dtype=float)
        return LogLogPoints(degrees, np.log10(np.array(degrees)), y)

    degs = np.array([d for d, _ in items], dtype=float)
    cnts = np.array([c for _, c in items], dtype=float)
    lo, hi = math.log10(degs[0]), math.log10(degs[-1] + 1)
    n_bins = max(1, math.ceil((hi - lo) * log_bins))
    edges = np.logspace(lo, hi, n_bins + 1)
    x, y, degrees = [], [], []
    for b in range(n_bins):
        first, stop = math.ceil(edges[b]), math.ceil(edges[b + 1])
        if stop <= first:  # no integer falls in this bin
            continue
        total = cnts[(degs >= first) & (degs < stop)].sum()
        if total < min_bin_count:
            break
        width = stop - first
        log_centre = (math.lgamma(stop) - math.lgamma(first)) / width / math.log(10)
        x.append(log_centre)
        y.append(math.log10(total / width))
        degrees.append(10.0 ** log_centre)
    return LogLogPoints(tuple(degrees), np.array(x), np.array(y))


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    stderr: float
    t_statistic: float
    degrees_of_freedom: int
    p_value: float
    n_points: int

    @property
    def exponent(self) -> float:
        return -self.slope

    def to_dict(self) -> dict:
        return asdict(self)


def ols_fit(points: LogLogPoints | tuple) -> PowerLawFit:
    """Closed-form OLS of y on x with a two-sided t-test of H0: slope = 0.

    ``points`` is a :class:`LogLogPoints` or an ``(x, y)`` pair of arrays.
    A zero standard error yields ``p = 0`` (or ``p = 1`` when the slope is
    itself zero).
    """
    if isinstance(points, LogLogPoints):
        x, y = points.x, points.y
    else:
        x, y = (np.asarray(v, dtype=float) for v in points)
    n = len(x)
    if n != len(y):
        raise ValueError("x and y differ in length")
    if n < 3:
        raise InsufficientDataError(f"need at least 3 points, got {n}")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(dx @ dx)
    if sxx == 0:
        raise DegenerateFitError("x has zero variance")
    syy = float(dy @ dy)
    slope = float(dx @ dy) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    sse = float(resid @ resid)
    df = n - 2
    se = math.sqrt(sse / df / sxx)
    if se == 0:
        t = 0.0 if slope == 0 else math.copysign(math.inf, slope)
        p = 1.0 if slope == 0 else 0.0
    else:
        t = slope / se
        p = min(1.0, 2.0 * student_t_sf(abs(t), df))
    r2 = 1.0 - sse / syy if syy > 0 else 1.0
    return PowerLawFit(slope, float(intercept), r2, se, t, df, p, n)


def powerlaw_fit(g: TokenGraph, **points_kw) -> PowerLawFit:
    """Fit the unweighted degree distribution of ``g``."""
    return ols_fit(loglog_points(degree_distribution(g), **points_kw))
