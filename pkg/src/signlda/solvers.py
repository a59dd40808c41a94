"""Sparse direction solvers.

Two engines live here: a dense revised simplex for the Dantzig-selector
style constrained l1 program, and a cyclic coordinate-descent lasso backing
the least-squares flavor.

The l1 program

    min ||gamma||_1   subject to   ||A gamma - b||_inf <= lam

is not attacked in its primal split-variable form. Its LP dual,

    max  b'v - lam ||v||_1   subject to   ||A'v||_inf <= 1,

is feasible at v = 0 for every input, so a slack basis starts the simplex
with no phase-1 work, and the number of pivots tracks the support size of
gamma rather than the ambient dimension. Writing v = beta - alpha with
alpha, beta >= 0 and slacks t1, t2 >= 0 gives the standard form

    min (lam 1 + b)' alpha + (lam 1 - b)' beta
    s.t. -A' alpha + A' beta + t1 = 1
         +A' alpha - A' beta + t2 = 1

whose constraint multipliers (pi1, pi2) at optimality satisfy pi <= 0 and
recover the primal direction as gamma = pi2 - pi1 with
||gamma||_1 = -(optimal value). The constraint matrix is never
materialized: columns come in +/- pairs built from rows of A, and pricing
reduces to a single p-by-p matrix-vector product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._validation import as_square_matrix, as_vector, check_positive_scalar
from .errors import DegenerateClassesError, SingularBasisError

STATUS_OPTIMAL = "optimal"
STATUS_SUBOPTIMAL = "feasible_suboptimal"
STATUS_INFEASIBLE = "infeasible_numerically"

# Residual slack accepted on top of lam before a solution stops counting as
# feasible. Matches the contract consumers test against.
_FEASIBILITY_SLACK = 1e-8
# Ratio-test eligibility threshold on direction entries.
_PIVOT_TOL = 1e-10
# Refactorize the basis inverse at this pivot cadence to cap drift.
_REFACTOR_EVERY = 100
# Consecutive non-improving pivots tolerated before switching permanently
# to Bland's rule (guaranteed finite termination).
_STALL_LIMIT = 200


@dataclass
class L1Program:
    """Data for min ||gamma||_1 s.t. ||a @ gamma - b||_inf <= lam."""

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    lam: float

    def __post_init__(self) -> None:
        self.a = as_square_matrix(self.a, "a")
        self.b = as_vector(self.b, "b")
        if self.a.shape[0] != self.b.size:
            raise ValueError(
                f"a is {self.a.shape[0]}x{self.a.shape[1]} but b has length {self.b.size}"
            )
        self.lam = check_positive_scalar(self.lam, "lam", allow_zero=True)


@dataclass
class DirectionSolution:
    """Solver output: the direction plus certification diagnostics."""

    gamma: NDArray[np.float64]
    objective: float
    residual_inf: float
    status: str
    pivots_or_iters: int


def solve_constrained_l1(prog: L1Program,
                         max_pivots: int | None = None) -> DirectionSolution:
    """Solve the constrained l1 program by revised simplex on its dual.

    Deterministic: Dantzig pricing with lowest-index tie-breaks, falling
    back to Bland's rule after a stall. Returns status "optimal" with a
    residual certificate, "feasible_suboptimal" if the pivot cap was hit
    at a feasible but uncertified point, or "infeasible_numerically" when
    the dual is unbounded (no feasible gamma exists) or no feasible point
    could be certified.

    Raises:
        SingularBasisError: If the working basis cannot be refactorized.
    """
    a, b, lam = prog.a, prog.b, prog.lam
    p = b.size
    m = 2 * p
    ncols = 4 * p
    if max_pivots is None:
        max_pivots = 50 * m + 2000

    bmax = float(np.abs(b).max())
    if lam >= bmax:
        # The zero vector is feasible, and no objective beats 0.
        return DirectionSolution(
            gamma=np.zeros(p),
            objective=0.0,
            residual_inf=bmax,
            status=STATUS_OPTIMAL,
            pivots_or_iters=0,
        )

    cost = np.concatenate([lam + b, lam - b, np.zeros(m)])
    tol_price = 1e-9 * max(1.0, float(np.abs(cost).max()))

    def build_column(j: int) -> NDArray[np.float64]:
        col = np.zeros(m)
        if j < p:  # alpha_j
            col[:p] = -a[j]
            col[p:] = a[j]
        elif j < m:  # beta_{j-p}
            col[:p] = a[j - p]
            col[p:] = -a[j - p]
        else:  # slack for constraint row j - m
            col[j - m] = 1.0
        return col

    basis = m + np.arange(m)  # all-slack start: B = I, x_B = 1
    in_basis = np.zeros(ncols, dtype=bool)
    in_basis[basis] = True
    binv = np.eye(m)
    xb = np.ones(m)
    cb = cost[basis].copy()

    pivots = 0
    stall = 0
    bland = False
    prev_obj = 0.0
    outcome = None

    def refactor() -> None:
        nonlocal binv, xb
        bmat = np.empty((m, m))
        for i, jj in enumerate(basis):
            bmat[:, i] = build_column(int(jj))
        try:
            binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise SingularBasisError(
                f"basis refactorization failed after {pivots} pivots "
                f"(p={p}, lam={lam!r})"
            ) from exc
        xb = binv.sum(axis=1)
        np.maximum(xb, 0.0, out=xb)

    while True:
        # Pricing. Multipliers y = c_B B^-1; reduced costs assembled from
        # one p x p product thanks to the paired +/- column structure.
        y = cb @ binv
        q = a @ (y[p:] - y[:p])
        reduced = np.concatenate([cost[:p] - q, cost[p:m] + q, -y])
        reduced[in_basis] = np.inf

        if bland:
            eligible = np.flatnonzero(reduced < -tol_price)
            if eligible.size == 0:
                outcome = "optimal"
                break
            enter = int(eligible[0])
        else:
            enter = int(np.argmin(reduced))
            if reduced[enter] >= -tol_price:
                outcome = "optimal"
                break

        if pivots >= max_pivots:
            outcome = "cap"
            break

        direction = binv @ build_column(enter)
        pos = direction > _PIVOT_TOL
        if not np.any(pos):
            outcome = "unbounded"
            break
        rows = np.flatnonzero(pos)
        ratios = xb[rows] / direction[rows]
        theta = float(ratios.min())
        near = rows[ratios <= theta + 1e-9 * (1.0 + theta)]
        # Lowest-basic-index tie-break: deterministic and, combined with
        # Bland entering, anti-cycling.
        leave = int(near[np.argmin(basis[near])])
        piv = direction[leave]

        xb -= theta * direction
        xb[leave] = theta
        np.maximum(xb, 0.0, out=xb)
        binv[leave] /= piv
        keep = np.arange(m) != leave
        binv[keep] -= np.outer(direction[keep], binv[leave])
        in_basis[basis[leave]] = False
        in_basis[enter] = True
        basis[leave] = enter
        cb[leave] = cost[enter]
        pivots += 1

        obj = float(cb @ xb)
        if obj > prev_obj - 1e-12 * max(1.0, abs(prev_obj)):
            stall += 1
            if stall >= _STALL_LIMIT:
                bland = True
        else:
            stall = 0
        prev_obj = obj

        if pivots % _REFACTOR_EVERY == 0:
            refactor()

    if outcome == "unbounded":
        # Unbounded dual certifies an empty primal feasible set.
        return DirectionSolution(
            gamma=np.zeros(p),
            objective=0.0,
            residual_inf=bmax,
            status=STATUS_INFEASIBLE,
            pivots_or_iters=pivots,
        )

    # Recover gamma from a fresh multiplier solve against the final basis.
    bmat = np.empty((m, m))
    for i, jj in enumerate(basis):
        bmat[:, i] = build_column(int(jj))
    try:
        pi = np.linalg.solve(bmat.T, cb)
    except np.linalg.LinAlgError as exc:
        raise SingularBasisError(
            f"final basis is singular after {pivots} pivots (p={p}, lam={lam!r})"
        ) from exc
    gamma = pi[p:] - pi[:p]
    # Inactive coordinates carry multiplier noise from the solve; zero them
    # so support sizes are meaningful downstream.
    scale = max(1.0, float(np.abs(gamma).max()))
    gamma[np.abs(gamma) <= 1e-11 * scale] = 0.0

    residual = float(np.abs(a @ gamma - b).max())
    objective = float(np.abs(gamma).sum())
    feasible = residual <= lam + _FEASIBILITY_SLACK
    if outcome == "optimal":
        status = STATUS_OPTIMAL if feasible else STATUS_INFEASIBLE
    else:
        status = STATUS_SUBOPTIMAL if feasible else STATUS_INFEASIBLE
    return DirectionSolution(
        gamma=gamma,
        objective=objective,
        residual_inf=residual,
        status=status,
        pivots_or_iters=pivots,
    )


def default_lambda_grid(b: ArrayLike, count: int = 20) -> NDArray[np.float64]:
    """Log-spaced penalty grid on [0.01 * ||b||_inf, ||b||_inf].

    The top endpoint yields the zero direction, the bottom endpoint sits
    near the interpolation regime.

    Raises:
        DegenerateClassesError: If b is the zero vector.
    """
    vec = as_vector(b, "b")
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")
    bmax = float(np.abs(vec).max())
    if bmax == 0.0:
        raise DegenerateClassesError(
            "center difference is the zero vector: classes are indistinguishable"
        )
    return np.geomspace(0.01 * bmax, bmax, count)


@dataclass
class LassoSolution:
    """Coordinate-descent output with convergence diagnostics."""

    beta: NDArray[np.float64]
    iterations: int
    max_update: float
    converged: bool


def _soft_threshold(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def lasso_direction(x: ArrayLike, y: ArrayLike, lam: float,
                    tol: float = 1e-9, max_sweeps: int = 10_000) -> LassoSolution:
    """Minimize (1/(2n)) ||y - x beta||_2^2 + lam ||beta||_1.

    Cyclic coordinate descent on the Gram form; a sweep whose largest
    coordinate update falls below ``tol`` stops the iteration. Columns
    with zero norm keep coefficient 0.
    """
    design = np.asarray(x, dtype=np.float64)
    if design.ndim != 2:
        raise ValueError(f"x must be 2-D, got ndim={design.ndim}")
    if not np.all(np.isfinite(design)):
        raise ValueError("x contains non-finite entries")
    response = as_vector(y, "y")
    if design.shape[0] != response.size:
        raise ValueError(
            f"x has {design.shape[0]} rows but y has length {response.size}"
        )
    lam = check_positive_scalar(lam, "lam", allow_zero=True)
    check_positive_scalar(tol, "tol")

    n, p = design.shape
    gram = design.T @ design / n
    corr = design.T @ response / n
    diag = np.diag(gram).copy()

    beta = np.zeros(p)
    gram_beta = np.zeros(p)  # gram @ beta, maintained incrementally
    max_update = np.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        max_update = 0.0
        for j in range(p):
            if diag[j] <= 0.0:
                continue
            partial = corr[j] - gram_beta[j] + diag[j] * beta[j]
            new = _soft_threshold(float(partial), lam) / diag[j]
            delta = new - beta[j]
            if delta != 0.0:
                gram_beta += gram[j] * delta
                beta[j] = new
                max_update = max(max_update, abs(delta))
        if max_update < tol:
            converged = True
            break
    return LassoSolution(
        beta=beta,
        iterations=sweeps,
        max_update=float(max_update),
        converged=converged,
    )
