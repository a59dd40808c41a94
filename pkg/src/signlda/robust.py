"""Location and scatter estimators.

Robust pieces: the spatial sign map, the spatial median computed by a
Weiszfeld iteration with the Vardi-Zhang correction for iterates that land
on data points, and the spatial-sign covariance matrix. Classical moment
counterparts (sample mean, pooled maximum-likelihood covariance) live here
too so the fitting code can swap estimator families without reshuffling
imports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._validation import as_matrix, as_square_matrix, as_vector, check_positive_scalar

# Distances below this are treated as "iterate sits on a data point" inside
# the Weiszfeld loop; well above float64 noise, far below any data scale the
# estimators are used at.
_COINCIDENCE_TOL = 1e-12


@dataclass
class LocationEstimate:
    """Result of an iterative location fit.

    Attributes
    ----------
    center : ndarray of shape (p,)
        The estimated location.
    iterations : int
        Number of update steps taken.
    final_step_norm : float
        Euclidean length of the last update step (0.0 when the iteration
        stopped at an exact fixed point).
    converged : bool
        True when the step criterion was met before the iteration cap.
    objective_history : list of float
        Sum of Euclidean distances to the data, recorded at the starting
        point and after every accepted step. Non-increasing.
    """

    center: NDArray[np.float64]
    iterations: int
    final_step_norm: float
    converged: bool
    objective_history: list[float] = field(repr=False, default_factory=list)


def spatial_sign(x: ArrayLike) -> NDArray[np.float64]:
    """Map vectors to the unit sphere, sending zero to zero.

    Accepts a single vector or a matrix of row vectors. Rows with zero
    Euclidean norm map to zero rows rather than raising.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = as_vector(arr, "x")
        nrm = float(np.linalg.norm(arr))
        return arr / nrm if nrm > 0.0 else np.zeros_like(arr)
    arr = as_matrix(arr, "x")
    nrm = np.linalg.norm(arr, axis=1)
    out = np.zeros_like(arr)
    hit = nrm > 0.0
    out[hit] = arr[hit] / nrm[hit, None]
    return out


def _l1_distance_sum(x: NDArray[np.float64], point: NDArray[np.float64]) -> float:
    return float(np.linalg.norm(x - point, axis=1).sum())


def spatial_median(x: ArrayLike, tol: float = 1e-8,
                   max_iter: int = 500) -> LocationEstimate:
    """Minimize the sum of Euclidean distances to the rows of ``x``.

    Parameters
    ----------
    x : array-like of shape (n, p)
        Data rows, n >= 1.
    tol : float
        Stop once the Euclidean step length drops to ``tol`` or below.
    max_iter : int
        Iteration cap. Hitting it leaves ``converged`` False and returns
        the last iterate.

    Returns
    -------
    LocationEstimate

    Notes
    -----
    Plain Weiszfeld updates are undefined when the current iterate equals a
    data point, so the update used here follows Vardi and Zhang: with
    ``eta`` copies of the iterate among the data and ``r`` the norm of the
    summed unit vectors toward the remaining points, the next iterate is a
    convex combination ``max(0, 1 - eta/r) * T + min(1, eta/r) * y``. When
    ``r <= eta`` the iterate itself is the exact minimizer and is returned
    as-is; in particular a data point that minimizes the objective is
    returned exactly, not approximately.

    The objective is non-increasing along the iteration; the recorded
    history makes that checkable.
    """
    data = as_matrix(x, "x")
    n, _ = data.shape
    check_positive_scalar(tol, "tol")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")

    # Coordinate-wise median: cheap, sensible start inside the convex hull.
    current = np.median(data, axis=0)
    history = [_l1_distance_sum(data, current)]
    step_norm = 0.0
    converged = False
    iterations = 0

    for _ in range(max_iter):
        diff = data - current
        dist = np.linalg.norm(diff, axis=1)
        on_point = dist <= _COINCIDENCE_TOL
        eta = int(np.count_nonzero(on_point))

        if eta == n:
            # Every data row coincides with the iterate: exact minimizer.
            current = data[0].copy()
            converged = True
            step_norm = 0.0
            break

        away = ~on_point
        w = 1.0 / dist[away]
        t_step = (data[away] * w[:, None]).sum(axis=0) / w.sum()

        if eta > 0:
            resultant = (diff[away] * w[:, None]).sum(axis=0)
            r = float(np.linalg.norm(resultant))
            if r <= eta:
                # First-order condition holds at the data point itself.
                current = data[on_point][0].copy()
                converged = True
                step_norm = 0.0
                history.append(_l1_distance_sum(data, current))
                break
            shrink = eta / r
            t_step = (1.0 - shrink) * t_step + shrink * current

        step_norm = float(np.linalg.norm(t_step - current))
        current = t_step
        iterations += 1
        history.append(_l1_distance_sum(data, current))
        if step_norm <= tol:
            converged = True
            break

    return LocationEstimate(
        center=current,
        iterations=iterations,
        final_step_norm=step_norm,
        converged=converged,
        objective_history=history,
    )


def sign_covariance(x: ArrayLike, center: ArrayLike) -> NDArray[np.float64]:
    """Average outer product of spatial signs of centered rows.

    Rows exactly equal to ``center`` contribute a zero outer product. The
    result is symmetric with trace equal to the fraction of rows not
    sitting on the center (1 when none do).
    """
    data = as_matrix(x, "x")
    c = as_vector(center, "center")
    if c.size != data.shape[1]:
        raise ValueError(
            f"center has length {c.size}, expected {data.shape[1]}"
        )
    signs = spatial_sign(data - c)
    s = signs.T @ signs / data.shape[0]
    return (s + s.T) / 2.0


def pooled_sign_covariance(s1: ArrayLike, s2: ArrayLike,
                           n1: int, n2: int) -> NDArray[np.float64]:
    """Sample-size weighted average of two sign covariance matrices."""
    m1 = as_square_matrix(s1, "s1")
    m2 = as_square_matrix(s2, "s2")
    if m1.shape != m2.shape:
        raise ValueError(f"shape mismatch: {m1.shape} vs {m2.shape}")
    if n1 < 1 or n2 < 1:
        raise ValueError(f"class sizes must be >= 1, got {n1}, {n2}")
    return (n1 * m1 + n2 * m2) / (n1 + n2)


def sample_mean(x: ArrayLike) -> NDArray[np.float64]:
    """Column means of a data matrix."""
    return as_matrix(x, "x").mean(axis=0)


def pooled_sample_covariance(x1: ArrayLike, x2: ArrayLike) -> NDArray[np.float64]:
    """Pooled maximum-likelihood covariance of two samples.

    Each class is centered at its own mean; the sums of squares are divided
    by the total count n1 + n2 (no small-sample correction).
    """
    a = as_matrix(x1, "x1")
    b = as_matrix(x2, "x2")
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"x1 and x2 disagree on dimension: {a.shape[1]} vs {b.shape[1]}"
        )
    da = a - a.mean(axis=0)
    db = b - b.mean(axis=0)
    s = (da.T @ da + db.T @ db) / (a.shape[0] + b.shape[0])
    return (s + s.T) / 2.0


def ridge_stabilize(s: ArrayLike, rho: float) -> NDArray[np.float64]:
    """Add ``rho`` to the diagonal of a square matrix."""
    m = as_square_matrix(s, "s")
    r = check_positive_scalar(rho, "rho", allow_zero=True)
    return m + r * np.eye(m.shape[0])


def default_ridge(p: int, n: int) -> float:
    """Dimension-aware ridge level sqrt(log(p) / n).

    Degenerates gracefully: p = 1 gives 0.
    """
    if p < 1 or n < 1:
        raise ValueError(f"p and n must be >= 1, got p={p}, n={n}")
    return float(np.sqrt(np.log(p) / n))
