"""Two-class sparse discriminant rules.

Fitting dispatches on an estimator flavor:

* ``sslda``: spatial-median centers and a ridge-stabilized spatial-sign
  scatter feed the constrained l1 direction program.
* ``lda_clime``: sample means and the pooled maximum-likelihood covariance
  feed the same program.
* ``ls_lda``: a lasso on the class-coded least-squares formulation.

Prediction assigns class 1 exactly when (z - (mu1+mu2)/2)' gamma >= 0;
ties go to class 1. Cross-validation tunes the penalty by the total count
of correctly classified held-out rows, stratified by class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._validation import (
    as_matrix,
    as_vector,
    check_labels,
    check_positive_scalar,
    check_same_width,
)
from .errors import DegenerateClassesError, SolverFailureError
from .robust import (
    default_ridge,
    pooled_sample_covariance,
    pooled_sign_covariance,
    ridge_stabilize,
    sample_mean,
    sign_covariance,
    spatial_median,
)
from .solvers import (
    STATUS_INFEASIBLE,
    L1Program,
    LassoSolution,
    default_lambda_grid,
    lasso_direction,
    solve_constrained_l1,
)

FLAVORS = ("sslda", "lda_clime", "ls_lda")

_MODEL_FIELDS = ("flavor", "lambda", "gamma", "mu1", "mu2", "p")


@dataclass
class DiscriminantModel:
    """Fitted linear rule: direction, class centers, penalty, flavor."""

    gamma: NDArray[np.float64]
    mu1: NDArray[np.float64]
    mu2: NDArray[np.float64]
    lam: float
    flavor: str

    def __post_init__(self) -> None:
        self.gamma = as_vector(self.gamma, "gamma")
        self.mu1 = as_vector(self.mu1, "mu1")
        self.mu2 = as_vector(self.mu2, "mu2")
        if not (self.gamma.size == self.mu1.size == self.mu2.size):
            raise ValueError(
                f"length mismatch: gamma {self.gamma.size}, "
                f"mu1 {self.mu1.size}, mu2 {self.mu2.size}"
            )
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}, expected one of {FLAVORS}")
        self.lam = check_positive_scalar(self.lam, "lam", allow_zero=True)
        if float(np.abs(self.mu1 - self.mu2).max()) == 0.0:
            raise DegenerateClassesError("mu1 and mu2 coincide")

    @property
    def p(self) -> int:
        return self.gamma.size

    @property
    def midpoint(self) -> NDArray[np.float64]:
        return (self.mu1 + self.mu2) / 2.0

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor,
            "lambda": self.lam,
            "gamma": self.gamma.tolist(),
            "mu1": self.mu1.tolist(),
            "mu2": self.mu2.tolist(),
            "p": self.p,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DiscriminantModel":
        missing = [k for k in _MODEL_FIELDS if k not in doc]
        if missing:
            raise ValueError(f"model document missing fields: {', '.join(missing)}")
        unknown = [k for k in doc if k not in _MODEL_FIELDS]
        if unknown:
            raise ValueError(f"model document has unknown fields: {', '.join(unknown)}")
        model = cls(
            gamma=np.asarray(doc["gamma"], dtype=np.float64),
            mu1=np.asarray(doc["mu1"], dtype=np.float64),
            mu2=np.asarray(doc["mu2"], dtype=np.float64),
            lam=float(doc["lambda"]),
            flavor=str(doc["flavor"]),
        )
        if int(doc["p"]) != model.p:
            raise ValueError(
                f"model document claims p={doc['p']} but vectors have length {model.p}"
            )
        return model


def save_model(model: DiscriminantModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> DiscriminantModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object at top level")
    return DiscriminantModel.from_dict(doc)


def support_size(gamma: ArrayLike) -> int:
    """Number of exactly nonzero coordinates."""
    return int(np.count_nonzero(as_vector(gamma, "gamma")))


def _lp_pieces(x1: NDArray[np.float64], x2: NDArray[np.float64], flavor: str,
               rho: float) -> tuple[NDArray[np.float64], NDArray[np.float64],
                                    NDArray[np.float64], NDArray[np.float64]]:
    """Centers and constraint matrix for the LP-backed flavors.

    sslda puts the ridge on the trace-p rescaled sign scatter (p*S + rho*I);
    lda_clime on the pooled covariance (Sigma + rho*I).
    """
    n1, n2 = x1.shape[0], x2.shape[0]
    p = x1.shape[1]
    if flavor == "sslda":
        mu1 = spatial_median(x1).center
        mu2 = spatial_median(x2).center
        pooled = pooled_sign_covariance(
            sign_covariance(x1, mu1), sign_covariance(x2, mu2), n1, n2
        )
        a = ridge_stabilize(p * pooled, rho)
    else:
        mu1 = sample_mean(x1)
        mu2 = sample_mean(x2)
        a = ridge_stabilize(pooled_sample_covariance(x1, x2), rho)
    b = mu1 - mu2
    if float(np.abs(b).max()) == 0.0:
        raise DegenerateClassesError(f"{flavor}: class centers coincide")
    return a, b, mu1, mu2


def _ls_design(x1: NDArray[np.float64],
               x2: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Column-centered stacked design and the +-class code vector."""
    n1, n2 = x1.shape[0], x2.shape[0]
    n = n1 + n2
    design = np.vstack([x1, x2])
    design = design - design.mean(axis=0)
    code = np.concatenate([np.full(n1, n2 / n), np.full(n2, -n1 / n)])
    return design, code


def _resolve_ridge(p: int, n: int, ridge: float | None) -> float:
    if ridge is None:
        return default_ridge(p, n)
    return check_positive_scalar(ridge, "ridge", allow_zero=True)


def fit_discriminant(x1: ArrayLike, x2: ArrayLike, lam: float,
                     flavor: str = "sslda",
                     ridge: float | None = None) -> DiscriminantModel:
    """Fit one flavor at a fixed penalty.

    Args:
        x1: Class-1 sample, shape (n1, p).
        x2: Class-2 sample, shape (n2, p).
        lam: Non-negative penalty level.
        flavor: One of ``FLAVORS``.
        ridge: Diagonal stabilizer for the LP flavors; None picks
            sqrt(log(p) / (n1 + n2)).

    Raises:
        DegenerateClassesError: If the estimated centers coincide.
        SolverFailureError: If the direction solver cannot certify a
            solution (carries the flavor in its message).
    """
    m1 = as_matrix(x1, "x1", min_rows=2)
    m2 = as_matrix(x2, "x2", min_rows=2)
    p = check_same_width(m1, m2)
    lam = check_positive_scalar(lam, "lam", allow_zero=True)
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}, expected one of {FLAVORS}")
    rho = _resolve_ridge(p, m1.shape[0] + m2.shape[0], ridge)

    if flavor == "ls_lda":
        mu1 = sample_mean(m1)
        mu2 = sample_mean(m2)
        if float(np.abs(mu1 - mu2).max()) == 0.0:
            raise DegenerateClassesError("ls_lda: class centers coincide")
        design, code = _ls_design(m1, m2)
        sol = lasso_direction(design, code, lam)
        _require_lasso_converged(sol, "ls_lda")
        gamma = sol.beta
    else:
        a, b, mu1, mu2 = _lp_pieces(m1, m2, flavor, rho)
        lp = solve_constrained_l1(L1Program(a, b, lam))
        if lp.status == STATUS_INFEASIBLE:
            raise SolverFailureError(
                f"{flavor}: direction program not solvable at lam={lam!r} "
                f"(residual {lp.residual_inf:.3e})"
            )
        gamma = lp.gamma

    return DiscriminantModel(gamma=gamma, mu1=mu1, mu2=mu2, lam=lam, flavor=flavor)


def _require_lasso_converged(sol: LassoSolution, flavor: str) -> None:
    if not sol.converged:
        raise SolverFailureError(
            f"{flavor}: lasso stopped after {sol.iterations} sweeps with "
            f"max update {sol.max_update:.3e}"
        )


def decision_values(model: DiscriminantModel, z: ArrayLike) -> float | NDArray[np.float64]:
    """Signed score(s) of one vector or a matrix of row vectors."""
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim == 1:
        vec = as_vector(arr, "z")
        if vec.size != model.p:
            raise ValueError(f"z has length {vec.size}, model expects {model.p}")
        return float((vec - model.midpoint) @ model.gamma)
    mat = as_matrix(arr, "z")
    if mat.shape[1] != model.p:
        raise ValueError(f"z has {mat.shape[1]} columns, model expects {model.p}")
    return (mat - model.midpoint) @ model.gamma


def predict(model: DiscriminantModel, z: ArrayLike) -> int | NDArray[np.int64]:
    """Class labels: 1 when the score is >= 0 (ties to class 1), else 2."""
    scores = decision_values(model, z)
    if np.isscalar(scores):
        return 1 if scores >= 0.0 else 2
    return np.where(scores >= 0.0, 1, 2).astype(np.int64)


@dataclass
class FoldAssignment:
    """Per-class partition into K index blocks (sizes differ by <= 1)."""

    class1_folds: list[NDArray[np.int64]]
    class2_folds: list[NDArray[np.int64]]
    k: int


def make_folds(n1: int, n2: int, k: int,
               seed: int | np.random.SeedSequence = 0) -> FoldAssignment:
    """Seeded shuffle of each class's indices, then contiguous chunking."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n1 < k or n2 < k:
        raise ValueError(f"each class needs >= {k} rows, got {n1} and {n2}")
    rng = np.random.default_rng(seed)
    folds1 = np.array_split(rng.permutation(n1), k)
    folds2 = np.array_split(rng.permutation(n2), k)
    return FoldAssignment(class1_folds=folds1, class2_folds=folds2, k=k)


@dataclass
class CVResult:
    """Chosen penalty plus the per-grid-point correct counts."""

    lam: float
    scores: NDArray[np.int64]
    grid: NDArray[np.float64]
    folds: FoldAssignment


def cross_validate_lambda(x1: ArrayLike, x2: ArrayLike, grid: ArrayLike,
                          k: int = 10, flavor: str = "sslda",
                          seed: int | np.random.SeedSequence = 0,
                          ridge: float | None = None) -> CVResult:
    """Pick the penalty maximizing held-out correct counts over K folds.

    Centers and scatter are recomputed on each fold's retained rows; the
    grid is shared across folds. Ties resolve to the largest penalty among
    the maximizers (sparser direction at equal validated accuracy).
    Deterministic for fixed (data, grid, k, seed).
    """
    m1 = as_matrix(x1, "x1", min_rows=2)
    m2 = as_matrix(x2, "x2", min_rows=2)
    p = check_same_width(m1, m2)
    lams = as_vector(grid, "grid")
    if lams.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(np.diff(lams) <= 0):
        raise ValueError("grid must be strictly ascending")
    if np.any(lams < 0):
        raise ValueError("grid values must be >= 0")
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}, expected one of {FLAVORS}")

    folds = make_folds(m1.shape[0], m2.shape[0], k, seed)
    scores = np.zeros(lams.size, dtype=np.int64)

    for fold_idx in range(k):
        hold1 = folds.class1_folds[fold_idx]
        hold2 = folds.class2_folds[fold_idx]
        keep1 = np.ones(m1.shape[0], dtype=bool)
        keep1[hold1] = False
        keep2 = np.ones(m2.shape[0], dtype=bool)
        keep2[hold2] = False
        train1, train2 = m1[keep1], m2[keep2]
        rho = _resolve_ridge(p, train1.shape[0] + train2.shape[0], ridge)

        # One pass of estimation per fold; only the penalty varies inside.
        if flavor == "ls_lda":
            mu1 = sample_mean(train1)
            mu2 = sample_mean(train2)
            if float(np.abs(mu1 - mu2).max()) == 0.0:
                raise DegenerateClassesError("ls_lda: class centers coincide in a fold")
            design, code = _ls_design(train1, train2)
            for gi, lam in enumerate(lams):
                sol = lasso_direction(design, code, float(lam))
                _require_lasso_converged(sol, "ls_lda")
                model = DiscriminantModel(sol.beta, mu1, mu2, float(lam), flavor)
                scores[gi] += _fold_correct(model, m1[hold1], m2[hold2])
        else:
            a, b, mu1, mu2 = _lp_pieces(train1, train2, flavor, rho)
            for gi, lam in enumerate(lams):
                lp = solve_constrained_l1(L1Program(a, b, float(lam)))
                if lp.status == STATUS_INFEASIBLE:
                    raise SolverFailureError(
                        f"{flavor}: direction program not solvable at "
                        f"lam={float(lam)!r} in fold {fold_idx}"
                    )
                model = DiscriminantModel(lp.gamma, mu1, mu2, float(lam), flavor)
                scores[gi] += _fold_correct(model, m1[hold1], m2[hold2])

    best = int(np.flatnonzero(scores == scores.max()).max())
    return CVResult(lam=float(lams[best]), scores=scores, grid=lams, folds=folds)


def flavor_centers(x1: ArrayLike, x2: ArrayLike,
                   flavor: str) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Class centers under a flavor's own location estimate.

    sslda centers at spatial medians; the moment-based flavors at sample
    means. Used to anchor the default penalty grid.
    """
    m1 = as_matrix(x1, "x1", min_rows=2)
    m2 = as_matrix(x2, "x2", min_rows=2)
    check_same_width(m1, m2)
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}, expected one of {FLAVORS}")
    if flavor == "sslda":
        return spatial_median(m1).center, spatial_median(m2).center
    return sample_mean(m1), sample_mean(m2)


def fit_cv(x1: ArrayLike, x2: ArrayLike, flavor: str = "sslda", k: int = 10,
           n_lambdas: int = 20, seed: int | np.random.SeedSequence = 0,
           ridge: float | None = None) -> tuple[DiscriminantModel, CVResult]:
    """Cross-validated fit: build the default grid, tune, refit on all rows.

    The grid anchors at the full-sample center difference under the
    requested flavor, so folds share one grid.
    """
    m1 = as_matrix(x1, "x1", min_rows=2)
    m2 = as_matrix(x2, "x2", min_rows=2)
    mu1, mu2 = flavor_centers(m1, m2, flavor)
    grid = default_lambda_grid(mu1 - mu2, n_lambdas)
    cv = cross_validate_lambda(m1, m2, grid, k=k, flavor=flavor, seed=seed, ridge=ridge)
    model = fit_discriminant(m1, m2, cv.lam, flavor=flavor, ridge=ridge)
    return model, cv


def _fold_correct(model: DiscriminantModel, hold1: NDArray[np.float64],
                  hold2: NDArray[np.float64]) -> int:
    correct = 0
    if hold1.shape[0] > 0:
        correct += int(np.count_nonzero(predict(model, hold1) == 1))
    if hold2.shape[0] > 0:
        correct += int(np.count_nonzero(predict(model, hold2) == 2))
    return correct


@dataclass
class MetricsReport:
    """Confusion counts and ratio metrics with class 1 as positive.

    Ratios with a zero denominator are NaN and listed in ``undefined``.
    """

    tp: int
    tn: int
    fp: int
    fn: int
    specificity: float
    sensitivity: float
    precision: float
    accuracy: float
    misclassification_rate: float
    undefined: tuple[str, ...]


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else float("nan")


def evaluate(predicted: ArrayLike, truth: ArrayLike) -> MetricsReport:
    """Confusion-matrix metrics for labels in {1, 2}; class 1 is positive."""
    pred = check_labels(predicted, "predicted")
    true = check_labels(truth, "truth")
    if pred.size != true.size:
        raise ValueError(
            f"length mismatch: predicted has {pred.size}, truth has {true.size}"
        )
    if pred.size == 0:
        raise ValueError("nothing to score: empty label vectors")

    tp = int(np.count_nonzero((pred == 1) & (true == 1)))
    fn = int(np.count_nonzero((pred == 2) & (true == 1)))
    tn = int(np.count_nonzero((pred == 2) & (true == 2)))
    fp = int(np.count_nonzero((pred == 1) & (true == 2)))

    specificity = _ratio(tn, tn + fp)
    sensitivity = _ratio(tp, tp + fn)
    precision = _ratio(tp, tp + fp)
    accuracy = (tp + tn) / pred.size

    undefined = tuple(
        name
        for name, value in (
            ("specificity", specificity),
            ("sensitivity", sensitivity),
            ("precision", precision),
        )
        if np.isnan(value)
    )
    return MetricsReport(
        tp=tp,
        tn=tn,
        fp=fp,
        fn=fn,
        specificity=specificity,
        sensitivity=sensitivity,
        precision=precision,
        accuracy=accuracy,
        misclassification_rate=1.0 - accuracy,
        undefined=undefined,
    )
