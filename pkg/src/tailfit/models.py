"""Heavy-tailed quantile models and inverse-transform sampling.

All models are parameterized through the upper quantile ``Q(1 - s)`` as a
function of the upper-tail probability ``s``, which is the natural variable
of the regression estimator:

* :class:`StrictPareto` -- ``Q(1 - s) = s**-alpha``
* :class:`Hall` -- ``Q(1 - s) = d1 * s**-alpha * (1 + d2 * s**beta)``
* :class:`TrigSeries` -- ``log Q(1 - s) = -alpha log s + theta_0
  + 2 sum_k theta_k cos(2 pi k s)``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "StrictPareto",
    "Hall",
    "TrigSeries",
    "TailModel",
    "OrderedSample",
    "upper_quantile",
    "density_quantile",
    "tail_product",
    "open_uniforms",
    "sample",
    "ordered_sample_from_uniforms",
    "stream",
    "mix64",
]


def _check_s(s):
    arr = np.asarray(s, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("upper-tail probability s must lie in (0, 1)")
    return arr


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise DomainError(f"{name} must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class StrictPareto:
    """Strict Pareto tail, ``1 - F(x) = x**(-1/alpha)`` for ``x >= 1``."""

    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))

    def upper_quantile(self, s):
        s = _check_s(s)
        return s ** -self.alpha

    def density_quantile(self, s):
        s = _check_s(s)
        return s ** (self.alpha + 1.0) / self.alpha

    def tail_product(self, s):
        s = _check_s(s)
        return s / self.alpha


@dataclass(frozen=True)
class Hall:
    """Exact member of Hall's second-order class.

    ``Q(1 - s) = d1 * s**-alpha * (1 + d2 * s**beta)``; the vanishing
    correction inside the second-order term is taken identically zero.
    """

    alpha: float
    d1: float = 0.4
    d2: float = 1.0
    beta: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "d1", _positive("d1", self.d1))
        object.__setattr__(self, "beta", _positive("beta", self.beta))
        object.__setattr__(self, "d2", float(self.d2))

    def upper_quantile(self, s):
        s = _check_s(s)
        return self.d1 * s ** -self.alpha * (1.0 + self.d2 * s ** self.beta)

    def _log_slope(self, s):
        # -(d/ds) log Q(1 - s) * s
        sb = self.d2 * s ** self.beta
        return self.alpha - self.beta * sb / (1.0 + sb)

    def density_quantile(self, s):
        s = _check_s(s)
        sb = s ** self.beta
        deriv = self.d1 * s ** (-self.alpha - 1.0) * (
            -self.alpha * (1.0 + self.d2 * sb) + self.d2 * self.beta * sb
        )
        if not np.all(deriv < 0.0):
            raise NumericError("Hall quantile is not strictly decreasing here")
        return -1.0 / deriv

    def tail_product(self, s):
        s = _check_s(s)
        slope = self._log_slope(s)
        if not np.all(slope > 0.0) or not np.all(1.0 + self.d2 * s ** self.beta > 0):
            raise NumericError("Hall quantile is not strictly decreasing here")
        return s / slope


@dataclass(frozen=True)
class TrigSeries:
    """Regular variation with a truncated cosine series slowly varying part."""

    alpha: float
    theta: tuple = field(default=(0.0,))

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        theta = tuple(float(t) for t in np.atleast_1d(self.theta))
        if len(theta) < 1:
            raise DomainError("theta needs at least theta_0")
        object.__setattr__(self, "theta", theta)

    @property
    def p(self) -> int:
        return len(self.theta) - 1

    def log_slowly_varying(self, s):
        s = _check_s(s)
        out = np.full_like(s, self.theta[0])
        for k, th in enumerate(self.theta[1:], start=1):
            out = out + 2.0 * th * np.cos(2.0 * np.pi * k * s)
        return out

    def log_upper_quantile(self, s):
        return -self.alpha * np.log(_check_s(s)) + self.log_slowly_varying(s)

    def upper_quantile(self, s):
        # power times exp(series): exactly s**-alpha when theta == (0,)
        s = _check_s(s)
        return s ** -self.alpha * np.exp(self.log_slowly_varying(s))

    def _log_slope(self, s):
        out = np.full_like(s, self.alpha)
        for k, th in enumerate(self.theta[1:], start=1):
            out = out + 4.0 * np.pi * k * th * s * np.sin(2.0 * np.pi * k * s)
        return out

    def density_quantile(self, s):
        s = _check_s(s)
        slope = self._log_slope(s)
        if not np.all(slope > 0.0):
            raise NumericError("series quantile is not strictly decreasing here")
        return s / (slope * self.upper_quantile(s))

    def tail_product(self, s):
        s = _check_s(s)
        slope = self._log_slope(s)
        if not np.all(slope > 0.0):
            raise NumericError("series quantile is not strictly decreasing here")
        return s / slope


TailModel = Union[StrictPareto, Hall, TrigSeries]


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


def upper_quantile(model: TailModel, s):
    """``Q(1 - s)`` of ``model``; ``s`` scalar or array in (0, 1)."""
    return _scalar_or_array(model.upper_quantile(s), s)


def density_quantile(model: TailModel, s):
    """``fQ(1 - s) = -1 / (d/ds Q(1 - s))``."""
    return _scalar_or_array(model.density_quantile(s), s)


def tail_product(model: TailModel, s):
    """``Q(1 - s) * fQ(1 - s)``, evaluated without forming either factor.

    This is the quantity entering the asymptotic variance kernel; for the
    strict Pareto model it is exactly ``s / alpha``.
    """
    return _scalar_or_array(model.tail_product(s), s)


@dataclass(frozen=True, eq=False)
class OrderedSample:
    """Order statistics ``X_{1,n} <= ... <= X_{n,n}``.

    ``values[i - 1]`` is ``X_{i,n}``; use :meth:`order_stat` for the
    1-based indexing of the formulas.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise DomainError("a sample needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise DomainError("sample contains non-finite values")
        if np.any(np.diff(vals) < 0):
            vals = np.sort(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    def order_stat(self, i: int) -> float:
        if not 1 <= i <= self.n:
            raise DomainError(f"order statistic index {i} outside 1..{self.n}")
        return float(self.values[i - 1])

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, OrderedSample):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def scaled(self, c: float) -> "OrderedSample":
        return OrderedSample(self.values * c)


# ---------------------------------------------------------------- random streams

_MASK64 = (1 << 64) - 1


def mix64(*keys: int) -> int:
    """SplitMix64-style hash of a tuple of nonnegative integers."""
    h = 0x9E3779B97F4A7C15
    for key in keys:
        z = (h + (int(key) & _MASK64) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        h = z ^ (z >> 31)
    return h


def stream(base_seed: int, *keys: int) -> np.random.Generator:
    """Independent counter-based generator for ``base_seed xor hash(keys)``.

    With no keys the base seed is used as is.  Streams derived from
    distinct keys do not depend on the order in which they are created.
    """
    seed = int(base_seed) & _MASK64
    if keys:
        seed ^= mix64(*keys)
    return np.random.Generator(np.random.Philox(key=seed))


def open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1): midpoints of a 2**-53 grid."""
    return (rng.integers(0, 1 << 53, size=n, dtype=np.int64) + 0.5) * 2.0 ** -53


def ordered_sample_from_uniforms(model: TailModel, u) -> OrderedSample:
    """Map uniforms through ``Q(1 - U)`` and sort ascending."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    return OrderedSample(np.sort(model.upper_quantile(u)))


def sample(model: TailModel, n: int, rng: np.random.Generator) -> OrderedSample:
    """Draw an ordered sample of size ``n`` from ``model``."""
    if int(n) < 1:
        raise DomainError("sample size must be >= 1")
    return ordered_sample_from_uniforms(model, open_uniforms(rng, int(n)))
