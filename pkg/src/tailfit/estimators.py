"""Tail index estimators: weighted least squares regression and baselines.

The regression estimator fits

    log Q_n(1 - s_j) = -alpha log s_j + theta_0 + 2 sum_k theta_k cos(2 pi k s_j)

on the percentile grid ``s_j = j / n``, ``ceil(n a) <= j <= floor(n b)``,
by weighted least squares with weights ``R(s_j)``.  Ordinary least squares
is the special case of a uniform weight.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, replace
from typing import Literal, Optional, Union

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    IllConditionedError,
    NumericError,
    SingularMatrixError,
)
from .models import OrderedSample
from .numerics import MAX_CONDITION, solve_symmetric

__all__ = [
    "Uniform",
    "Power",
    "WeightSpec",
    "RegressionConfig",
    "DesignSystem",
    "FitResult",
    "parse_weight",
    "format_weight",
    "design_columns",
    "hill",
    "pickands",
    "dedh",
    "build_design",
    "attach_response",
    "wls_fit",
    "wls_estimate",
]

# Extended precision for the normal-equation sums (80-bit on x86).
ACCUM = np.longdouble


# ------------------------------------------------------------------ baselines

def _check_k(sample: OrderedSample, k: int, upper: int, what: str):
    if isinstance(k, bool) or int(k) != k or k < 1 or k > upper:
        raise DomainError(f"{what}: k={k} invalid for n={sample.n}")
    return int(k)


def _log_excesses(sample: OrderedSample, k: int) -> np.ndarray:
    vals = sample.values
    n = sample.n
    threshold = vals[n - k - 1]  # X_{n-k,n}
    if not threshold > 0:
        raise NumericError(
            f"order statistic X_({n - k},{n}) = {threshold} is not positive"
        )
    top = vals[n - k:]  # X_{n-k+1,n} .. X_{n,n}
    return np.log(top) - math.log(threshold)


def hill(sample: OrderedSample, k: int) -> float:
    """Hill's estimator from the ``k`` largest order statistics.

    ``(1/k) sum_{j=1..k} log X_{n-j+1,n} - log X_{n-k,n}``.
    """
    k = _check_k(sample, k, sample.n - 1, "hill")
    return math.fsum(_log_excesses(sample, k)) / k


def pickands(sample: OrderedSample, k: int) -> float:
    """Pickands' estimator from the spacings at ranks k, 2k and 4k.

    Requires ``4k <= n``.  Invariant under shifts and positive rescaling of
    the data.
    """
    k = _check_k(sample, k, sample.n // 4, "pickands")
    x = sample.order_stat
    n = sample.n
    num = x(n - k + 1) - x(n - 2 * k + 1)
    den = x(n - 2 * k + 1) - x(n - 4 * k + 1)
    if den == 0 or num == 0 or (num > 0) != (den > 0):
        raise NumericError(f"degenerate Pickands spacing ratio {num}/{den}")
    return math.log(num / den) / math.log(2.0)


def dedh(sample: OrderedSample, k: int) -> float:
    """Dekkers-Einmahl-de Haan moment estimator.

    Combines the first two moments ``M1``, ``M2`` of the log excesses over
    ``X_{n-k,n}``: ``M1 + 1 - 1 / (2 (1 - M1**2 / M2))``.
    """
    k = _check_k(sample, k, sample.n - 1, "dedh")
    ex = _log_excesses(sample, k)
    m1 = math.fsum(ex) / k
    m2 = math.fsum(ex * ex) / k
    if m2 == 0:
        raise NumericError("all log excesses vanish; moment estimator undefined")
    gap = 1.0 - m1 * m1 / m2
    if gap == 0:
        raise NumericError("M1**2 == M2; moment estimator undefined")
    return m1 + 1.0 - 0.5 / gap


# ------------------------------------------------------------------ weights

@dataclass(frozen=True)
class Uniform:
    """``R(s) = 1`` (ordinary least squares)."""

    def __call__(self, s):
        return np.ones_like(np.asarray(s, dtype=np.float64))

    def scaled(self, c: float) -> "Power":
        return Power(c, 0.0)


@dataclass(frozen=True)
class Power:
    """``R(s) = c * s**k``; ``Power(1/500, 1)`` is ``R(s) = s/500``."""

    c: float
    k: float = 1.0

    def __post_init__(self):
        if not float(self.c) > 0:
            raise ConfigurationError(f"weight scale c must be positive, got {self.c}")
        if not float(self.k) >= 0:
            raise ConfigurationError(f"weight exponent k must be >= 0, got {self.k}")
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "k", float(self.k))

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.k == 0:
            return np.full_like(s, self.c)
        return self.c * s ** self.k

    def scaled(self, c: float) -> "Power":
        return Power(self.c * c, self.k)


WeightSpec = Union[Uniform, Power]


def parse_weight(text: str) -> WeightSpec:
    """Parse ``uniform`` or ``pow:c,k`` (``R(s) = c s^k``)."""
    text = text.strip().lower()
    if text == "uniform":
        return Uniform()
    if text.startswith("pow:"):
        parts = text[4:].split(",")
        try:
            if len(parts) == 1:
                return Power(float(parts[0]), 1.0)
            if len(parts) == 2:
                return Power(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ConfigurationError(f"bad weight spec {text!r}: {exc}") from None
    raise ConfigurationError(f"weight must be 'uniform' or 'pow:c,k', got {text!r}")


def format_weight(weight: WeightSpec) -> str:
    if isinstance(weight, Uniform):
        return "uniform"
    return f"pow:{weight.c!r},{weight.k!r}"


# ------------------------------------------------------------------ design

ResponseRule = Literal["step", "jth_largest"]


@dataclass(frozen=True)
class RegressionConfig:
    """Percentile range, series order and weight of the regression.

    ``response`` selects which order statistic stands for the empirical
    quantile at ``s_j = j/n``:

    * ``"step"`` -- ``Q_n(1 - j/n) = X_{n-j,n}``, the value of the
      right-continuous step function at the grid point;
    * ``"jth_largest"`` -- ``X_{n-j+1,n}``, the j-th largest observation.

    The two differ by one rank and so only in the O(1/j) bias; the tabulated
    reference Monte Carlo results follow ``"jth_largest"``.
    """

    a: float = 0.001
    b: float = 0.4
    p_tilde: int = 1
    weight: WeightSpec = Power(1.0 / 500.0, 1.0)
    response: ResponseRule = "step"

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (0.0 < a < b < 1.0):
            raise ConfigurationError(f"need 0 < a < b < 1, got a={a}, b={b}")
        if isinstance(self.p_tilde, bool) or int(self.p_tilde) != self.p_tilde or self.p_tilde < 1:
            raise ConfigurationError(f"p_tilde must be a positive integer, got {self.p_tilde}")
        if not isinstance(self.weight, (Uniform, Power)):
            raise ConfigurationError(f"unsupported weight {self.weight!r}")
        if self.response not in ("step", "jth_largest"):
            raise ConfigurationError(f"unknown response rule {self.response!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "p_tilde", int(self.p_tilde))

    @property
    def n_params(self) -> int:
        return self.p_tilde + 2

    def index_range(self, n: int) -> tuple[int, int]:
        return _ceil_times(n, self.a), _floor_times(n, self.b)


def _decimal_ratio(x: float) -> tuple[int, int]:
    f = Fraction(repr(float(x)))
    return f.numerator, f.denominator


# Grid bounds use the shortest decimal form of a and b, so that a = 0.001,
# n = 5000 gives j_lo = 5 although the binary value of 0.001 exceeds 1/1000.
def _ceil_times(n: int, x: float) -> int:
    num, den = _decimal_ratio(x)
    return -((-n * num) // den)


def _floor_times(n: int, x: float) -> int:
    num, den = _decimal_ratio(x)
    return (n * num) // den


def design_columns(s: np.ndarray, p_tilde: int) -> np.ndarray:
    """Regressors ``(-log s, 1, 2cos(2 pi s), ..., 2cos(2 pi p_tilde s))``."""
    s = np.asarray(s, dtype=np.float64)
    cols = [-np.log(s), np.ones_like(s)]
    cols += [2.0 * np.cos(2.0 * np.pi * k * s) for k in range(1, p_tilde + 1)]
    return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class DesignSystem:
    """Percentile grid, regressors, weights and (optionally) the response.

    ``gram`` (``X'WX``) and ``xtw`` (``X'W``) are held in extended
    precision; neither depends on the data, so they are computed once per
    ``(n, config)`` and reused for every sample.
    """

    n: int
    config: RegressionConfig
    j_lo: int
    j_hi: int
    s: np.ndarray
    x_cols: np.ndarray
    w: np.ndarray
    gram: np.ndarray
    xtw: np.ndarray
    y: Optional[np.ndarray] = None

    @property
    def rows(self) -> int:
        return self.j_hi - self.j_lo + 1

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.j_lo, self.j_hi + 1)

    def with_response(self, y) -> "DesignSystem":
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.rows,):
            raise ValueError(f"response needs {self.rows} values, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise NumericError("response contains non-finite values")
        return replace(self, y=y)


def build_design(n: int, config: RegressionConfig) -> DesignSystem:
    """Build the regression design for sample size ``n`` (no response yet)."""
    n = int(n)
    if n < 1:
        raise ConfigurationError("sample size must be positive")
    j_lo, j_hi = config.index_range(n)
    rows = j_hi - j_lo + 1
    if rows < config.n_params:
        raise ConfigurationError(
            f"{max(rows, 0)} grid rows for n={n}, a={config.a}, b={config.b} "
            f"cannot identify {config.n_params} coefficients"
        )
    j = np.arange(j_lo, j_hi + 1)
    s = j / n
    x_cols = design_columns(s, config.p_tilde)
    w = np.asarray(config.weight(s), dtype=np.float64)
    if not np.any(w > 0):
        raise ConfigurationError("weight vector is identically zero")
    xl = x_cols.astype(ACCUM)
    xtw = np.ascontiguousarray((xl * w.astype(ACCUM)[:, None]).T)
    gram = xtw @ xl
    gram = 0.5 * (gram + gram.T)
    for arr in (s, x_cols, w, xtw, gram):
        arr.setflags(write=False)
    return DesignSystem(n, config, j_lo, j_hi, s, x_cols, w, gram, xtw)


def attach_response(design: DesignSystem, sample: OrderedSample) -> DesignSystem:
    """Fill ``y_j = log Q_n(1 - j/n)`` from the order statistics of ``sample``."""
    if sample.n != design.n:
        raise ConfigurationError(
            f"design built for n={design.n}, sample has n={sample.n}"
        )
    shift = 1 if design.config.response == "jth_largest" else 0
    ranks = design.n - design.j + shift  # 1-based order statistic index
    vals = sample.values[ranks - 1]
    bad = np.flatnonzero(~(vals > 0))
    if bad.size:
        r = int(ranks[bad[0]])
        raise NumericError(
            f"order statistic X_({r},{design.n}) = {vals[bad[0]]} is not positive"
        )
    return replace(design, y=np.log(vals))


@dataclass(frozen=True)
class FitResult:
    alpha_hat: float
    theta_hat: np.ndarray
    condition_estimate: float

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate([[self.alpha_hat], self.theta_hat])


def wls_fit(design: DesignSystem, *, max_condition: float = MAX_CONDITION) -> FitResult:
    """Solve the weighted normal equations ``(X'WX) beta = X'Wy``."""
    if design.y is None:
        raise ConfigurationError("design has no response attached")
    if np.count_nonzero(design.w > 0) < design.config.n_params:
        raise ConfigurationError("fewer positively weighted rows than coefficients")
    rhs = design.xtw @ design.y.astype(ACCUM)
    try:
        beta, cond = solve_symmetric(design.gram, rhs, max_condition=max_condition)
    except SingularMatrixError as exc:
        raise IllConditionedError(
            f"normal equations are singular: {exc}", exc.condition_estimate
        ) from None
    beta = beta.astype(np.float64)
    return FitResult(float(beta[0]), beta[1:], cond)


def wls_estimate(sample: OrderedSample, config: RegressionConfig) -> FitResult:
    """Build, attach and fit in one call."""
    return wls_fit(attach_response(build_design(sample.n, config), sample))
