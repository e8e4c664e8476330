"""Least squares fits, nested F-tests and the Hald encompassing comparison."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from ._validation import DomainError
from .bayes_ref import (
    NestedLinearComparison,
    bf_bic,
    bf_nested_linear_giron,
)
from .calibration import EvidenceInput, arlb
from .specfun import f_sf

__all__ = [
    "Dataset",
    "FitResult",
    "EncompassingRow",
    "RankDeficientError",
    "fit_ols",
    "f_test_nested",
    "model_label",
    "encompassing_rows",
    "hald_dataset",
    "hald_csv_text",
    "hald_encompassing_table",
    "HALD_MODELS",
    "PUBLISHED_HALD_TABLE",
    "PUBLISHED_COLUMNS",
    "CellCheck",
    "compare_with_published",
]


class RankDeficientError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Response ``y`` and regressors ``X`` (no intercept column; the fitter adds it)."""

    y: np.ndarray
    X: np.ndarray
    column_labels: tuple[str, ...] = ()

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DomainError("X", f"shape {X.shape} does not match y of shape {y.shape}")
        n, k = X.shape
        if not n > k + 1:
            raise DomainError("X", f"need more than k + 1 = {k + 1} rows, got {n}")
        labels = tuple(self.column_labels) or tuple(f"x{j + 1}" for j in range(k))
        if len(labels) != k:
            raise DomainError("column_labels", f"expected {k} labels, got {len(labels)}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_labels", labels)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray  # intercept first
    rss: float
    df_resid: int
    columns: tuple[int, ...] = ()
    residuals: np.ndarray = field(default=None, repr=False)


def fit_ols(data: Dataset, subset: Iterable[int] | None = None) -> FitResult:
    """Least squares on an intercept plus the regressors in ``subset`` (0-based).

    Uses a QR factorization; ``subset=None`` fits all regressors and an empty
    subset the intercept alone.
    """
    cols = tuple(range(data.k)) if subset is None else tuple(sorted(set(subset)))
    for j in cols:
        if not 0 <= j < data.k:
            raise DomainError("subset", f"column index {j} out of range for {data.k} regressors")
    A = np.column_stack([np.ones(data.n)] + [data.X[:, j] for j in cols])
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise RankDeficientError(f"design with columns {cols} is rank deficient")
    beta = np.linalg.solve(R, Q.T @ data.y)
    resid = data.y - A @ beta
    return FitResult(coefficients=beta, rss=float(resid @ resid),
                     df_resid=data.n - A.shape[1], columns=cols, residuals=resid)


def f_test_nested(full: FitResult, reduced: FitResult, n: int | None = None) -> tuple[float, float]:
    """F statistic and p-value for dropping regressors from ``full``.

    ``n`` is accepted for symmetry with the other comparison helpers; the
    degrees of freedom come from the fits themselves.
    """
    q = reduced.df_resid - full.df_resid
    if q < 1:
        raise DomainError("reduced", "must have fewer columns than the full model")
    if reduced.rss < full.rss * (1.0 - 1e-12):
        raise DomainError("reduced", f"RSS {reduced.rss} below full-model RSS {full.rss}")
    extra = max(reduced.rss - full.rss, 0.0)
    f_stat = (extra / q) / (full.rss / full.df_resid)
    return f_stat, f_sf(f_stat, q, full.df_resid)


def model_label(columns: Sequence[int]) -> str:
    """``(1, 2, 3) -> "234c"``: 1-based regressor numbers plus ``c`` for the constant."""
    sep = "" if all(j < 9 for j in columns) else "-"
    return sep.join(str(j + 1) for j in columns) + "c"


@dataclass(frozen=True)
class EncompassingRow:
    model_label: str
    p_value: float
    q: int
    b_lb: float
    o_l: float
    b_bic: float
    ibf_reference: float
    ibf_jeffreys: float
    ibf_mod_jeffreys: float
    f_stat: float = math.nan
    g: float = math.nan

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


def encompassing_rows(data: Dataset, subsets: Iterable[Sequence[int]] | None = None,
                      n_star: float | None = None, floor_at_rlb: bool = True) -> list[EncompassingRow]:
    """Compare each sub-model against the full model.

    ``subsets`` defaults to every proper subset of the regressors (including
    the intercept-only model).  ``n_star`` defaults to the number of rows.
    """
    full = fit_ols(data)
    n = data.n
    n_star = float(n if n_star is None else n_star)
    k = data.k + 1  # columns including the intercept
    if subsets is None:
        subsets = [c for r in range(data.k - 1, -1, -1)
                   for c in itertools.combinations(range(data.k), r)]
    rows = []
    for subset in subsets:
        reduced = fit_ols(data, subset)
        q = reduced.df_resid - full.df_resid
        f_stat, p = f_test_nested(full, reduced, n)
        cal = arlb(EvidenceInput(p, n_star, q), floor_at_rlb=floor_at_rlb)
        ratio = reduced.rss / full.rss
        k1 = len(reduced.columns) + 1
        ibf = {preset: bf_nested_linear_giron(NestedLinearComparison.with_preset(n, k, k1, ratio, preset))
               for preset in ("reference", "jeffreys", "modified_jeffreys")}
        rows.append(EncompassingRow(
            model_label=model_label(reduced.columns), p_value=p, q=q,
            b_lb=cal.b_l, o_l=cal.o_l, b_bic=bf_bic(reduced.rss, full.rss, n, q),
            ibf_reference=ibf["reference"], ibf_jeffreys=ibf["jeffreys"],
            ibf_mod_jeffreys=ibf["modified_jeffreys"], f_stat=f_stat, g=cal.g))
    return rows


# ---------------------------------------------------------------------------
# Hald cement data


def hald_csv_text() -> str:
    return resources.files("arlb").joinpath("data/hald.csv").read_text()


def hald_dataset() -> Dataset:
    reader = csv.DictReader(io.StringIO(hald_csv_text()))
    records = list(reader)
    y = [float(r["y"]) for r in records]
    X = [[float(r[f"x{j}"]) for j in range(1, 5)] for r in records]
    return Dataset(np.array(y), np.array(X), ("x1", "x2", "x3", "x4"))


# sub-models with p < 1/e, as 0-based regressor indices
HALD_MODELS = {
    "234c": (1, 2, 3), "13c": (0, 2), "14c": (0, 3), "23c": (1, 2), "24c": (1, 3),
    "34c": (2, 3), "1c": (0,), "2c": (1,), "3c": (2,), "4c": (3,),
}

# Published five-decimal values for the Hald encompassing comparison.
PUBLISHED_HALD_TABLE = {
    # label: (ibf_ref, ibf_jeffreys, ibf_mod_jeffreys, b_lb, o_l, b_bic, p_value)
    "234c": (0.60776, 0.73697, 0.67515, 0.50970, 0.70192, 0.21582, 0.07082),
    "13c": (0.00018, 0.00009, 0.00010, 0.00008, 0.00008, 0.00000, 0.00000),
    "14c": (1.15714, 2.31974, 1.76313, 0.81460, 0.89583, 0.71623, 0.16800),
    "23c": (0.00586, 0.00335, 0.00386, 0.00414, 0.00414, 0.00001, 0.00018),
    "24c": (0.00056, 0.00030, 0.00031, 0.00029, 0.00029, 0.00000, 0.00001),
    "34c": (0.07650, 0.06740, 0.07492, 0.07782, 0.07782, 0.00277, 0.00550),
    "1c": (0.00030, 0.00014, 0.00014, 0.00016, 0.00016, 0.00000, 0.00000),
    "2c": (0.00089, 0.00043, 0.00046, 0.00055, 0.00055, 0.00000, 0.00002),
    "3c": (0.00007, 0.00003, 0.00003, 0.00003, 0.00003, 0.00000, 0.00000),
    "4c": (0.00096, 0.00047, 0.00050, 0.00061, 0.00061, 0.00000, 0.00002),
}
PUBLISHED_COLUMNS = ("ibf_reference", "ibf_jeffreys", "ibf_mod_jeffreys", "b_lb", "o_l", "b_bic", "p_value")


def hald_encompassing_table(floor_at_rlb: bool = True) -> list[EncompassingRow]:
    """The ten Hald sub-models with ``p < 1/e``, each compared with the full model at ``n* = 13``."""
    return encompassing_rows(hald_dataset(), HALD_MODELS.values(), floor_at_rlb=floor_at_rlb)


@dataclass(frozen=True)
class CellCheck:
    model_label: str
    column: str
    computed: float
    published: float
    tolerance: float
    relative: bool
    informational: bool

    @property
    def deviation(self) -> float:
        diff = abs(self.computed - self.published)
        return diff / abs(self.published) if self.relative else diff

    @property
    def ok(self) -> bool:
        return self.deviation <= self.tolerance


# p-values are printed to 5 decimals, the bound columns are checked to 4.
CHECK_TOLERANCES = {"p_value": 0.5e-5, "b_lb": 0.5e-4, "o_l": 0.5e-4, "b_bic": 0.5e-4}
IBF_RELATIVE_TOLERANCE = 0.25
IBF_MIN_CELL = 0.01


def compare_with_published(rows: Sequence[EncompassingRow]) -> list[CellCheck]:
    """Cell-by-cell comparison of ``rows`` against :data:`PUBLISHED_HALD_TABLE`.

    Intrinsic Bayes factor cells are compared relatively, and only cells
    above :data:`IBF_MIN_CELL` count; they are flagged informational.
    """
    checks = []
    for row in rows:
        published = PUBLISHED_HALD_TABLE.get(row.model_label)
        if published is None:
            continue
        for column, value in zip(PUBLISHED_COLUMNS, published):
            computed = getattr(row, column)
            if column.startswith("ibf"):
                if value <= IBF_MIN_CELL:
                    continue
                checks.append(CellCheck(row.model_label, column, computed, value,
                                        IBF_RELATIVE_TOLERANCE, True, True))
            else:
                checks.append(CellCheck(row.model_label, column, computed, value,
                                        CHECK_TOLERANCES[column], False, False))
    return checks
