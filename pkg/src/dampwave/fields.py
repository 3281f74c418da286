"""Closed-form coefficient fields with analytic gradients.

Every field maps points of shape ``(m, d)`` to values of shape ``(m,)`` and
provides ``gradient`` with shape ``(m, d)``.  Fields are built from named
presets so configs can describe them as plain key/value data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Sequence

import numpy as np


class Field:
    """Scalar field on R^d."""

    name = "field"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __add__(self, other: "Field") -> "Field":
        return Combination((self, other), (1.0, 1.0))

    def scaled(self, s: float) -> "Field":
        return Combination((self,), (s,))


def _pts(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:, None] if x.ndim == 1 else x


@dataclass(frozen=True)
class Constant(Field):
    value: float = 1.0
    name = "constant"

    def __call__(self, x):
        return np.full(_pts(x).shape[0], float(self.value))

    def gradient(self, x):
        return np.zeros_like(_pts(x))


@dataclass(frozen=True)
class Sine(Field):
    """``base + amplitude * sin(2 pi x_axis / period)``."""

    base: float = 1.0
    amplitude: float = 0.5
    period: float = 1.0
    axis: int = 0
    name = "sine"

    def __call__(self, x):
        x = _pts(x)
        return self.base + self.amplitude * np.sin(2 * np.pi * x[:, self.axis] / self.period)

    def gradient(self, x):
        x = _pts(x)
        g = np.zeros_like(x)
        k = 2 * np.pi / self.period
        g[:, self.axis] = self.amplitude * k * np.cos(k * x[:, self.axis])
        return g


@dataclass(frozen=True)
class GaussianBump(Field):
    """``base + amplitude * exp(-|x - center|^2 / width^2)``."""

    base: float = 1.0
    amplitude: float = 1.0
    width: float = 1.0
    center: Sequence[float] = (0.0,)
    name = "gaussian"

    def _r2(self, x):
        c = np.zeros(x.shape[1])
        c[: len(self.center)] = self.center[: x.shape[1]]
        dx = x - c
        return dx, (dx**2).sum(axis=1)

    def __call__(self, x):
        x = _pts(x)
        _, r2 = self._r2(x)
        return self.base + self.amplitude * np.exp(-r2 / self.width**2)

    def gradient(self, x):
        x = _pts(x)
        dx, r2 = self._r2(x)
        e = self.amplitude * np.exp(-r2 / self.width**2)
        return (-2.0 / self.width**2) * e[:, None] * dx


def _smoothstep(s):
    """Quintic C^2 ramp from 0 (s <= 0) to 1 (s >= 1); mean value 1/2."""
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s**2)


def _smoothstep_prime(s):
    inside = (s > 0) & (s < 1)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, 30 * s**2 * (1 - s) ** 2, 0.0)


@dataclass(frozen=True)
class Hole(Field):
    """Compact bump complement: ``outer`` for ``|x| >= r_outer``, ``inner``
    for ``|x| <= r_inner``, quintic ramp between."""

    r_inner: float = 1.5
    r_outer: float = 2.0
    inner: float = 0.0
    outer: float = 1.0
    name = "hole"

    def _s(self, x):
        r = np.sqrt((x**2).sum(axis=1))
        return r, (r - self.r_inner) / (self.r_outer - self.r_inner)

    def __call__(self, x):
        x = _pts(x)
        _, s = self._s(x)
        return self.inner + (self.outer - self.inner) * _smoothstep(s)

    def gradient(self, x):
        x = _pts(x)
        r, s = self._s(x)
        dr = (self.outer - self.inner) * _smoothstep_prime(s) / (self.r_outer - self.r_inner)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[:, None] > 0, x / r[:, None], 0.0)
        return dr[:, None] * unit


@dataclass(frozen=True)
class Lens(Field):
    """Conformal metric ``n(x)^{-2}`` with ``n = 1 + kappa exp(-|x|^2/sigma^2)``.

    For ``kappa = 4, sigma = 1`` the function ``r n(r)`` has an interior
    local minimum, so the metric carries a stable circular geodesic.
    """

    kappa: float = 4.0
    sigma: float = 1.0
    name = "lens"

    def _n(self, x):
        r2 = (x**2).sum(axis=1)
        e = self.kappa * np.exp(-r2 / self.sigma**2)
        return 1.0 + e, e

    def __call__(self, x):
        n, _ = self._n(_pts(x))
        return n**-2

    def gradient(self, x):
        x = _pts(x)
        n, e = self._n(x)
        grad_n = (-2.0 / self.sigma**2) * e[:, None] * x
        return (-2.0 * n**-3)[:, None] * grad_n


@dataclass(frozen=True)
class Combination(Field):
    """Linear combination ``sum_k w_k f_k``."""

    parts: tuple
    weights: tuple
    name = "combination"

    def __call__(self, x):
        return sum(w * f(x) for f, w in zip(self.parts, self.weights))

    def gradient(self, x):
        return sum(w * f.gradient(x) for f, w in zip(self.parts, self.weights))


PRESETS: Dict[str, Callable[..., Field]] = {
    "constant": Constant,
    "sine": Sine,
    "gaussian": GaussianBump,
    "hole": Hole,
    "lens": Lens,
}


def make_field(spec) -> Field:
    """Build a field from ``{"preset": name, **params}`` or a number."""
    if isinstance(spec, Field):
        return spec
    if isinstance(spec, (int, float)):
        return Constant(float(spec))
    spec = dict(spec)
    name = spec.pop("preset", None)
    if name == "sum":
        terms = [make_field(t) for t in spec.pop("terms")]
        weights = tuple(float(w) for w in spec.pop("weights", [1.0] * len(terms)))
        return Combination(tuple(terms), weights)
    if name not in PRESETS:
        raise ValueError(f"unknown field preset {name!r}; known: {sorted(PRESETS)} and 'sum'")
    if "center" in spec:
        spec["center"] = tuple(spec["center"])
    return PRESETS[name](**spec)


def central_difference_gradient(f: Field, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    x = _pts(x)
    g = np.empty_like(x)
    for k in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[k] = h
        g[:, k] = (f(x + e) - f(x - e)) / (2 * h)
    return g
