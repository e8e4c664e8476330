"""scikit-learn style wrappers around the calibration and encompassing routines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .calibration import EvidenceInput, arlb
from .linmod import Dataset, encompassing_rows

__all__ = ["ARLBCalibrator", "EncompassingComparison"]


class ARLBCalibrator(TransformerMixin, BaseEstimator):
    """Map p-values to adaptive robust lower bounds.

    Parameters
    ----------
    n_star : float
        Effective sample size shared by every p-value.
    q : int, default=1
        Dimension difference between the compared models.
    output : {"probability", "odds", "rlb"}, default="probability"
        ``"probability"`` gives ``P_L``, ``"odds"`` gives ``O_L`` and
        ``"rlb"`` the plain robust lower bound ``B_L``.
    floor_at_rlb : bool, default=True
        Keep ``O_L`` at or above ``B_L``.

    Notes
    -----
    Nothing is learned from data; ``fit`` only validates the parameters and
    records the number of input columns.  Each column of ``X`` is treated as
    an independent set of p-values.
    """

    _OUTPUTS = ("probability", "odds", "rlb")

    def __init__(self, n_star=100.0, q=1, output="probability", floor_at_rlb=True):
        self.n_star = n_star
        self.q = q
        self.output = output
        self.floor_at_rlb = floor_at_rlb

    def _validate_params(self):
        if self.output not in self._OUTPUTS:
            raise ValueError(f"output must be one of {self._OUTPUTS}, got {self.output!r}")
        # raises DomainError on bad n_star or q
        EvidenceInput(0.5, self.n_star, self.q)

    def fit(self, X, y=None):
        self._validate_params()
        X = check_array(X, ensure_2d=False)
        self.n_features_in_ = 1 if X.ndim == 1 else X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, ensure_2d=False)
        one_d = X.ndim == 1
        X2 = X.reshape(-1, 1) if one_d else X
        if X2.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X2.shape[1]} features, expected {self.n_features_in_}")
        out = np.empty_like(X2, dtype=float)
        for idx, p in np.ndenumerate(X2):
            res = arlb(EvidenceInput(float(p), self.n_star, self.q), floor_at_rlb=self.floor_at_rlb)
            out[idx] = {"probability": res.p_l, "odds": res.o_l, "rlb": res.b_l}[self.output]
        return out.ravel() if one_d else out


class EncompassingComparison(BaseEstimator):
    """Compare every sub-model of a linear regression with the full model.

    Parameters
    ----------
    n_star : float or None, default=None
        Effective sample size for ``O_L``; ``None`` uses the number of rows.
    floor_at_rlb : bool, default=True
    subsets : sequence of tuples or None, default=None
        0-based regressor subsets to compare; ``None`` means all proper subsets.

    Attributes
    ----------
    rows_ : list of EncompassingRow
    n_features_in_ : int
    """

    def __init__(self, n_star=None, floor_at_rlb=True, subsets=None):
        self.n_star = n_star
        self.floor_at_rlb = floor_at_rlb
        self.subsets = subsets

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        self.rows_ = encompassing_rows(Dataset(y, X), self.subsets, n_star=self.n_star,
                                       floor_at_rlb=self.floor_at_rlb)
        return self

    def table(self) -> list[dict]:
        check_is_fitted(self, "rows_")
        return [r.as_dict() for r in self.rows_]

    def predict(self, X=None):
        """Posterior probability bound ``P_L`` for each compared sub-model, in ``rows_`` order."""
        check_is_fitted(self, "rows_")
        return np.array([r.o_l / (1.0 + r.o_l) for r in self.rows_])
