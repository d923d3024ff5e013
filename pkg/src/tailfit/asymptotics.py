"""Limit matrix, G_R functional and asymptotic variance of the WLS estimator.

``sqrt(n) (alpha_hat - alpha)`` is asymptotically normal with variance

    V = int_a^b int_a^b G_R(s) G_R(t) K(s, t) / (h(s) h(t)) ds dt,

where ``K(s, t) = min(1-s, 1-t) - (1-s)(1-t)`` is the Brownian bridge
covariance in the upper-tail variable, ``h(s) = Q(1-s) fQ(1-s)`` and
``G_R`` is the weight times the regressors combined with the first row of
the inverse limit matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConditionMError, SingularMatrixError
from .estimators import RegressionConfig, design_columns
from .models import TailModel, tail_product
from .numerics import MAX_CONDITION, quad_1d, quad_2d_triangle_symmetric, solve_symmetric

__all__ = [
    "DEFAULT_PANELS",
    "GRFunction",
    "AsymptoticSpec",
    "limit_matrix",
    "g_r_coefficients",
    "asymptotic_variance",
    "asymptotic_spec",
    "variance_kernel",
]

DEFAULT_PANELS = 64
# Integrands carry log u and 1/u factors that vary fastest near a.
GRADING = "geometric"


def limit_matrix(config: RegressionConfig, panels: int = DEFAULT_PANELS) -> np.ndarray:
    """``M(a, b, R)``: entries ``int_a^b g_i(u) g_j(u) R(u) du``."""
    d = config.n_params
    m = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            def f(u, i=i, j=j):
                g = design_columns(u, config.p_tilde)
                return g[:, i] * g[:, j] * config.weight(u)

            m[i, j] = m[j, i] = quad_1d(f, config.a, config.b, panels, grading=GRADING)
    return m


@dataclass(frozen=True)
class GRFunction:
    """``G_R(u) = R(u) (-v* log u + v_0 + 2 sum_k v_k cos(2 pi k u))``."""

    config: RegressionConfig
    v_row: np.ndarray

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        flat = np.atleast_1d(u).ravel()
        vals = (design_columns(flat, self.config.p_tilde) @ self.v_row) * self.config.weight(flat)
        return float(vals[0]) if u.ndim == 0 else vals.reshape(u.shape)


def _first_row_of_inverse(m: np.ndarray) -> tuple[np.ndarray, float]:
    e1 = np.zeros(m.shape[0])
    e1[0] = 1.0
    try:
        return solve_symmetric(m, e1, max_condition=MAX_CONDITION)
    except SingularMatrixError as exc:
        raise ConditionMError(
            f"limit matrix is not invertible: {exc}", exc.condition_estimate
        ) from None


def g_r_coefficients(
    config: RegressionConfig,
    panels: int = DEFAULT_PANELS,
    m_matrix: Optional[np.ndarray] = None,
) -> GRFunction:
    """First row ``(v*, v_0, ..., v_p)`` of ``M^-1`` with an evaluator for G_R.

    Raises :class:`ConditionMError` when ``M`` is numerically singular or
    not positive definite.
    """
    m = limit_matrix(config, panels) if m_matrix is None else m_matrix
    if np.any(np.linalg.eigvalsh(m) <= 0):
        raise ConditionMError("limit matrix is not positive definite")
    v, _ = _first_row_of_inverse(m)
    return GRFunction(config, np.asarray(v, dtype=np.float64))


def variance_kernel(model: TailModel, gr: GRFunction):
    """Integrand of the asymptotic variance as a vectorized ``f(s, t)``."""

    def kernel(s, t):
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        cov = np.minimum(1.0 - s, 1.0 - t) - (1.0 - s) * (1.0 - t)
        fs = gr(s) / tail_product(model, s)
        ft = gr(t) / tail_product(model, t)
        return fs * ft * cov

    return kernel


def asymptotic_variance(
    model: TailModel,
    config: RegressionConfig,
    panels: int = DEFAULT_PANELS,
    gr: Optional[GRFunction] = None,
) -> float:
    """Asymptotic variance ``V`` of ``sqrt(n) (alpha_hat - alpha)``."""
    gr = g_r_coefficients(config, panels) if gr is None else gr
    return quad_2d_triangle_symmetric(
        variance_kernel(model, gr), config.a, config.b, panels, grading=GRADING
    )


@dataclass(frozen=True)
class AsymptoticSpec:
    m_matrix: np.ndarray
    v_row: np.ndarray
    variance: Optional[float] = None
    condition_estimate: float = 1.0


def asymptotic_spec(
    config: RegressionConfig,
    model: Optional[TailModel] = None,
    panels: int = DEFAULT_PANELS,
) -> AsymptoticSpec:
    """Bundle ``M``, the first row of ``M^-1`` and, given a model, ``V``."""
    m = limit_matrix(config, panels)
    gr = g_r_coefficients(config, panels, m_matrix=m)
    _, cond = _first_row_of_inverse(m)
    var = None if model is None else asymptotic_variance(model, config, panels, gr)
    return AsymptoticSpec(m, gr.v_row, var, cond)
