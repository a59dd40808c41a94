"""Scikit-learn compatible wrapper around the discriminant fitting code."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix, check_labels
from .classifier import decision_values, fit_cv, fit_discriminant, predict


class SparseLDA(BaseEstimator, ClassifierMixin):
    """Sparse linear discriminant classifier for two classes labeled 1 and 2.

    Parameters
    ----------
    flavor : {"sslda", "lda_clime", "ls_lda"}
        Estimation recipe: spatial-sign based, pooled-covariance based, or
        the lasso least-squares formulation.
    reg_lambda : float or None
        Penalty level. None tunes it by stratified cross-validation.
    cv_folds : int
        Fold count used when ``reg_lambda`` is None.
    n_lambdas : int
        Grid size used when ``reg_lambda`` is None.
    ridge : float or None
        Diagonal stabilizer for the LP flavors; None picks the
        dimension-aware default sqrt(log(p) / n).
    random_state : int
        Seed for the cross-validation fold shuffle.

    Attributes
    ----------
    model_ : DiscriminantModel
        The fitted rule.
    gamma_ : ndarray of shape (p,)
        Discriminant direction.
    mu1_, mu2_ : ndarray of shape (p,)
        Class centers.
    lambda_ : float
        Penalty actually used (chosen by CV when ``reg_lambda`` is None).
    cv_scores_ : ndarray or None
        Per-grid-point correct counts when CV ran, else None.
    classes_ : ndarray
        Always ``[1, 2]``.
    """

    def __init__(self, flavor: str = "sslda", reg_lambda: float | None = None,
                 cv_folds: int = 10, n_lambdas: int = 20,
                 ridge: float | None = None, random_state: int = 0) -> None:
        self.flavor = flavor
        self.reg_lambda = reg_lambda
        self.cv_folds = cv_folds
        self.n_lambdas = n_lambdas
        self.ridge = ridge
        self.random_state = random_state

    def fit(self, X: ArrayLike, y: ArrayLike) -> "SparseLDA":
        mat = as_matrix(X, "X", min_rows=2)
        labels = check_labels(y, "y")
        if labels.size != mat.shape[0]:
            raise ValueError(
                f"X has {mat.shape[0]} rows but y has {labels.size} labels"
            )
        x1 = mat[labels == 1]
        x2 = mat[labels == 2]
        if x1.shape[0] < 2 or x2.shape[0] < 2:
            raise ValueError(
                "both classes need at least 2 rows, got "
                f"{x1.shape[0]} and {x2.shape[0]}"
            )
        if self.reg_lambda is None:
            model, cv = fit_cv(
                x1, x2, flavor=self.flavor, k=self.cv_folds,
                n_lambdas=self.n_lambdas, seed=self.random_state,
                ridge=self.ridge,
            )
            self.cv_scores_ = cv.scores
        else:
            model = fit_discriminant(
                x1, x2, self.reg_lambda, flavor=self.flavor, ridge=self.ridge
            )
            self.cv_scores_ = None
        self.model_ = model
        self.gamma_ = model.gamma
        self.mu1_ = model.mu1
        self.mu2_ = model.mu2
        self.lambda_ = model.lam
        self.classes_ = np.array([1, 2])
        self.n_features_in_ = mat.shape[1]
        return self

    def decision_function(self, X: ArrayLike) -> NDArray[np.float64]:
        check_is_fitted(self, "model_")
        mat = as_matrix(X, "X")
        return np.asarray(decision_values(self.model_, mat))

    def predict(self, X: ArrayLike) -> NDArray[np.int64]:
        check_is_fitted(self, "model_")
        mat = as_matrix(X, "X")
        return np.asarray(predict(self.model_, mat))
