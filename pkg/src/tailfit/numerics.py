"""Small dense symmetric solves and composite Gauss-Legendre quadrature.

Both the weighted normal equations of the regression estimator and the
limit matrix of its asymptotic theory are tiny (at most a handful of rows),
so a hand-rolled pivoted LDL' factorization is all that is needed.  The
factor diagonals double as a cheap condition surrogate.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import SingularMatrixError

__all__ = [
    "MAX_CONDITION",
    "NODES_PER_PANEL",
    "gauss_legendre",
    "panel_edges",
    "ldl_factor",
    "solve_symmetric",
    "quad_1d",
    "quad_2d_triangle_symmetric",
]

MAX_CONDITION = 1e12
NODES_PER_PANEL = 8
MAX_DIMENSION = 64


def ldl_factor(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor ``P' A P = L D L'`` with symmetric diagonal pivoting.

    At every step the remaining diagonal entry of largest magnitude is moved
    to the pivot position.  For positive definite input this is pivoted
    Cholesky in LDL' form and never breaks down before true singularity.

    Parameters
    ----------
    a : ndarray, shape (d, d)
        Symmetric matrix.  Only the values are read; the dtype of the
        factorization is ``a.dtype`` (pass ``np.longdouble`` for extended
        precision).

    Returns
    -------
    perm : ndarray of int
        Pivot order, ``A[perm][:, perm] = L D L'``.
    lower : ndarray, shape (d, d)
        Unit lower triangular factor.
    diag : ndarray, shape (d,)
        Diagonal of ``D``.

    Raises
    ------
    SingularMatrixError
        If every remaining diagonal candidate is exactly zero.
    """
    work = np.array(a, copy=True)
    d = work.shape[0]
    perm = np.arange(d)
    lower = np.eye(d, dtype=work.dtype)
    diag = np.zeros(d, dtype=work.dtype)
    for k in range(d):
        p = k + int(np.argmax(np.abs(np.diagonal(work)[k:])))
        if p != k:
            work[[k, p], :] = work[[p, k], :]
            work[:, [k, p]] = work[:, [p, k]]
            lower[[k, p], :k] = lower[[p, k], :k]
            perm[[k, p]] = perm[[p, k]]
        pivot = work[k, k]
        if pivot == 0:
            raise SingularMatrixError(f"zero pivot at step {k}")
        diag[k] = pivot
        col = work[k + 1:, k] / pivot
        lower[k + 1:, k] = col
        work[k + 1:, k + 1:] -= np.outer(col, work[k, k + 1:])
    return perm, lower, diag


def solve_symmetric(
    a: np.ndarray,
    rhs: np.ndarray,
    *,
    max_condition: float = MAX_CONDITION,
) -> tuple[np.ndarray, float]:
    """Solve ``a @ x = rhs`` for a small symmetric ``a``.

    Returns the solution (same dtype as the factorization) and the ratio of
    the largest to the smallest pivot magnitude, used as a condition
    estimate.  A zero pivot or an estimate above ``max_condition`` raises
    :class:`SingularMatrixError`.
    """
    a = np.asarray(a)
    if a.dtype.kind != "f" or a.dtype.itemsize < 8:
        a = a.astype(np.float64)
    rhs = np.asarray(rhs, dtype=a.dtype)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    d = a.shape[0]
    if not 1 <= d <= MAX_DIMENSION:
        raise ValueError(f"dimension {d} outside 1..{MAX_DIMENSION}")
    if rhs.shape != (d,):
        raise ValueError(f"rhs shape {rhs.shape} does not match matrix {a.shape}")
    scale = float(np.max(np.abs(a)))
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(rhs)):
        raise SingularMatrixError("non-finite entries in symmetric system")
    if scale > 0 and float(np.max(np.abs(a - a.T))) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")

    perm, lower, diag = ldl_factor(a)
    mags = np.abs(diag)
    cond = float(mags.max() / mags.min())
    if cond > max_condition:
        raise SingularMatrixError(
            f"condition estimate {cond:.3g} exceeds {max_condition:.3g}", cond
        )

    b = rhs[perm]
    z = np.empty_like(b)
    for i in range(d):
        z[i] = b[i] - lower[i, :i] @ z[:i]
    z /= diag
    x_perm = np.empty_like(z)
    for i in range(d - 1, -1, -1):
        x_perm[i] = z[i] - lower[i + 1:, i] @ x_perm[i + 1:]
    x = np.empty_like(x_perm)
    x[perm] = x_perm
    return x, cond


@lru_cache(maxsize=None)
def gauss_legendre(nodes: int = NODES_PER_PANEL) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(a: float, b: float, panels: int, grading: str = "uniform") -> np.ndarray:
    """Panel boundaries on ``[a, b]``.

    ``"geometric"`` spaces the edges evenly in ``log u`` (requires
    ``a > 0``), which resolves integrands behaving like powers of ``u``
    near a small left endpoint.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if panels < 1:
        raise ValueError("panels must be >= 1")
    if grading == "uniform":
        edges = np.linspace(a, b, panels + 1)
    elif grading == "geometric":
        if not a > 0:
            raise ValueError("geometric grading needs a > 0")
        edges = a * (b / a) ** (np.arange(panels + 1) / panels)
    else:
        raise ValueError(f"unknown grading {grading!r}")
    edges[0], edges[-1] = a, b
    return edges


def _panel_points(edges: np.ndarray, nodes: int):
    x, w = gauss_legendre(nodes)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = mid[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    return pts, wts


def quad_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    panels: int = 64,
    nodes: int = NODES_PER_PANEL,
    grading: str = "uniform",
) -> float:
    """Composite Gauss-Legendre integral of ``f`` over ``[a, b]``.

    ``f`` must accept an array of abscissae and return values of the same
    shape.  See :func:`panel_edges` for ``grading``.
    """
    pts, wts = _panel_points(panel_edges(a, b, panels, grading), nodes)
    vals = np.asarray(f(pts.ravel()), dtype=np.float64).reshape(pts.shape)
    # fixed reduction order: within panel, then across panels
    return float(np.sum(np.sum(vals * wts, axis=1)))


def quad_2d_triangle_symmetric(
    kernel: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a: float,
    b: float,
    panels: int = 64,
    nodes: int = NODES_PER_PANEL,
    grading: str = "uniform",
) -> float:
    """Integrate a symmetric kernel over ``[a, b]^2``.

    Computes twice the integral over the triangle ``a <= s < t <= b`` so
    that a kink along the diagonal never falls inside a quadrature cell.
    Off-diagonal panel pairs use the tensor rule; each diagonal panel uses
    the collapsed (Duffy) map ``s = c + (t - c) u`` onto the square.
    """
    x, w = gauss_legendre(nodes)
    edges = panel_edges(a, b, panels, grading)
    pts, wts = _panel_points(edges, nodes)

    total = 0.0
    # off-diagonal blocks, panel i (s) strictly below panel j (t)
    if panels > 1:
        ii, jj = np.triu_indices(panels, k=1)
        s = pts[ii][:, :, None]
        t = pts[jj][:, None, :]
        ws = wts[ii][:, :, None]
        wt = wts[jj][:, None, :]
        s, t = np.broadcast_arrays(s, t)
        vals = np.asarray(kernel(s.ravel(), t.ravel()), dtype=np.float64)
        vals = vals.reshape(s.shape) * ws * wt
        total += float(np.sum(np.sum(vals, axis=(1, 2))))

    # diagonal blocks: triangle {c <= s < t <= c + h}
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    c = edges[:-1]
    h = np.diff(edges)
    t = c[:, None, None] + h[:, None, None] * u[None, :, None]
    s = c[:, None, None] + (t - c[:, None, None]) * u[None, None, :]
    jac = h[:, None, None] * (t - c[:, None, None])
    weight = jac * wu[None, :, None] * wu[None, None, :]
    s, t = np.broadcast_arrays(s, t)
    vals = np.asarray(kernel(s.ravel(), t.ravel()), dtype=np.float64)
    vals = vals.reshape(s.shape) * weight
    total += float(np.sum(np.sum(vals, axis=(1, 2))))
    return 2.0 * total
