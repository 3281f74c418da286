"""Decay-rate evidence from norm time series.

Two tools: least-squares slopes in log-log coordinates, and sup-certificates
for bounds ``f(t) <= C t^{-p}`` judged by whether the running supremum of
``t^p f(t)`` settles down inside the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

Window = Optional[Tuple[float, float]]


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""
    normalization: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError(f"times {t.shape} and values {v.shape} must be matching 1-D arrays")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite values in series {self.label!r}")
        if t.size and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("times must be positive and strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def normalized(self) -> "TimeSeries":
        return TimeSeries(self.times, self.values / self.normalization, self.label + "/norm", 1.0)

    def window(self, window: Window) -> "TimeSeries":
        if window is None:
            return self
        lo, hi = window
        if lo > hi:
            raise ValueError(f"empty window [{lo}, {hi}]")
        m = (self.times >= lo * (1 - 1e-12)) & (self.times <= hi * (1 + 1e-12))
        return TimeSeries(self.times[m], self.values[m], self.label, self.normalization)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float
    window: Tuple[float, float]
    samples: int


@dataclass(frozen=True)
class BoundCertificate:
    exponent: float
    modifier: str
    sup_value: float
    argsup: float
    window: Tuple[float, float]
    holds: bool
    running_sup: np.ndarray = field(repr=False, compare=False, default=None)
    weighted: np.ndarray = field(repr=False, compare=False, default=None)
    times: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.sup_value))


@dataclass(frozen=True)
class TrendVerdict:
    decreasing: bool
    max_relative_rise: float
    window: Tuple[float, float]


def fit_loglog(series: TimeSeries, window: Window = None, min_samples: int = 8) -> RateFit:
    """Least-squares line through ``(log t, log f)`` on the window."""
    s = series.window(window)
    if s.times.size < min_samples:
        raise ValueError(f"need >= {min_samples} samples in window, have {s.times.size}")
    if np.any(s.values <= 0):
        raise ValueError(
            "non-positive values in fit window (exponential decay to the floor?); shrink the window"
        )
    x, y = np.log(s.times), np.log(s.values)
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    rms = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(float(slope), float(intercept), rms, (float(s.times[0]), float(s.times[-1])), s.times.size)


def _weighted(s: TimeSeries, p: float, modifier: str) -> np.ndarray:
    w = s.times**p * s.values
    if modifier == "log":
        if np.any(s.times <= 1):
            raise ValueError("log modifier needs t > 1")
        w = w / np.log(s.times)
    elif modifier == "shifted":
        w = (1 + s.times) ** p * s.values
    elif modifier != "none":
        raise ValueError(f"unknown modifier {modifier!r}")
    return w


def certify_bound(
    series: TimeSeries,
    p: float,
    modifier: str = "none",
    window: Window = None,
    tolerance: float = 0.2,
) -> BoundCertificate:
    """Certificate for ``f(t) = O(t^{-p})`` on the window.

    ``modifier`` is ``none`` (weight ``t^p``), ``log`` (``t^p / log t``) or
    ``shifted`` (``(1+t)^p``).  The certificate holds when the global sup is
    within ``1 + tolerance`` of the running sup reached by the start of the
    last quartile, i.e. the last quarter of the window adds little.
    """
    s = series.window(window)
    if s.times.size < 2:
        raise ValueError("need at least two samples in window")
    w = _weighted(s, p, modifier)
    running = np.maximum.accumulate(w)
    k = int(np.argmax(w))
    q = int(np.floor(0.75 * (s.times.size - 1)))
    sup = float(running[-1])
    holds = bool(np.isfinite(sup) and sup <= (1 + tolerance) * running[q])
    return BoundCertificate(
        exponent=p,
        modifier=modifier,
        sup_value=sup,
        argsup=float(s.times[k]),
        window=(float(s.times[0]), float(s.times[-1])),
        holds=holds,
        running_sup=running,
        weighted=w,
        times=s.times,
    )


def tail_trend_to_zero(series: TimeSeries, p: float, window: Window = None) -> TrendVerdict:
    """Is ``t^p f(t)`` strictly decreasing over the last half of the window?"""
    s = series.window(window)
    if s.times.size < 4:
        raise ValueError("need at least four samples in window")
    w = s.times**p * s.values
    tail = w[s.times.size // 2 :]
    rises = np.diff(tail) / np.maximum(np.abs(tail[:-1]), np.finfo(float).tiny)
    return TrendVerdict(bool(np.all(rises < 0)), float(max(rises.max(), 0.0)), (float(s.times[0]), float(s.times[-1])))


def gap_respecting_window(t_min: float, t_max: float, lambda1: float, factor: float = 0.1) -> Tuple[float, float]:
    """``[t_min, min(t_max, factor / lambda1)]``; raises if that is empty."""
    hi = t_max if lambda1 <= 0 else min(t_max, factor / lambda1)
    if hi <= t_min:
        raise ValueError(f"gap time {factor / lambda1:.3g} is below t_min={t_min}")
    return float(t_min), float(hi)


def geometric_times(t0: float, t1: float, count: int) -> np.ndarray:
    return np.geomspace(t0, t1, count)
