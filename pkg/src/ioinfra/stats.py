"""Ordinary least squares, R-squared, correlation and VIF diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    CollinearDesignError,
    ConstantColumnError,
    DegenerateResponseWarning,
    InsufficientObservationsError,
    ShapeError,
)

RANK_RTOL = 1e-10
VIF_THRESHOLD = 10.0
# 1 - R^2 at or below this is treated as perfect collinearity
_PERFECT_FIT = 1e-12


@dataclass(frozen=True, eq=False)
class RegressionResult:
    coefficients: np.ndarray
    intercept: float
    r_squared: float
    residuals: np.ndarray
    vifs: np.ndarray
    names: tuple = ()
    rank_deficient: bool = False

    @property
    def m(self) -> int:
        return len(self.residuals)

    @property
    def p(self) -> int:
        return len(self.coefficients)

    @property
    def multicollinear(self) -> bool:
        return bool(np.any(~(self.vifs < VIF_THRESHOLD)))

    def to_dict(self) -> dict:
        return {
            "predictors": list(self.names),
            "coefficients": [float(c) for c in self.coefficients],
            "intercept": float(self.intercept),
            "r_squared": float(self.r_squared),
            "vifs": [_json_float(v) for v in self.vifs],
            "multicollinear": self.multicollinear,
            "rank_deficient": self.rank_deficient,
            "m": self.m,
            "p": self.p,
        }


def _json_float(v):
    return "inf" if np.isinf(v) else float(v)


def _as_design(X, y=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-dimensional, got shape {X.shape}")
    if y is not None:
        y = np.asarray(y, dtype=float)
        if y.shape != (X.shape[0],):
            raise ShapeError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    return X, y


def _first_dependent_column(D, rtol=RANK_RTOL):
    """Index of the first column of ``D`` lying in the span of earlier ones,
    or None when ``D`` has full column rank."""
    s = np.linalg.svd(D, compute_uv=False)
    if s.size == 0 or s[-1] > rtol * s[0]:
        return None
    for j in range(1, D.shape[1] + 1):
        sj = np.linalg.svd(D[:, :j], compute_uv=False)
        if sj[0] == 0 or sj[-1] <= rtol * sj[0]:
            return j - 1
    return D.shape[1] - 1


def r_squared(y, fitted) -> float:
    y = np.asarray(y, dtype=float)
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0.0:
        warnings.warn("response has zero variance; R^2 defined as 0", DegenerateResponseWarning,
                      stacklevel=2)
        return 0.0
    ssr = float(((y - fitted) ** 2).sum())
    return float(min(max(1.0 - ssr / sst, 0.0), 1.0))


def ols_fit(X, y, with_intercept: bool = True, names=None, strict: bool = True) -> RegressionResult:
    """Least-squares fit of ``y`` on the columns of ``X``.

    Solved by orthogonal decomposition. With ``strict`` (the default) a
    rank-deficient design raises :class:`CollinearDesignError`; otherwise the
    minimum-norm solution is returned and ``rank_deficient`` is set.
    """
    X, y = _as_design(X, y)
    m, p = X.shape
    k = p + int(with_intercept)
    if m <= k:
        raise InsufficientObservationsError(
            f"need more observations than parameters (m={m}, p={p}"
            f"{', plus intercept' if with_intercept else ''})", m=m, p=p,
        )
    D = np.column_stack([np.ones(m), X]) if with_intercept else X
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(p))
    bad = _first_dependent_column(D)
    if bad is not None and strict:
        col = bad - int(with_intercept)
        label = "intercept" if col < 0 else names[col]
        raise CollinearDesignError(f"design is rank deficient: column {label!r} is dependent",
                                   column=label)
    beta, *_ = np.linalg.lstsq(D, y, rcond=None)
    fitted = D @ beta
    resid = y - fitted
    if with_intercept:
        intercept, coefs = float(beta[0]), beta[1:]
    else:
        intercept, coefs = 0.0, beta
    r2 = r_squared(y, fitted)
    vifs = vif(X) if p >= 2 else np.ones(p)
    return RegressionResult(
        coefficients=np.asarray(coefs, dtype=float),
        intercept=intercept,
        r_squared=r2,
        residuals=resid,
        vifs=vifs,
        names=names,
        rank_deficient=bad is not None,
    )


def vif(X) -> np.ndarray:
    """Variance inflation factor of each column.

    ``vif[j] = 1 / (1 - R2_j)`` with ``R2_j`` from regressing column ``j``
    on the others plus an intercept. Perfectly explained columns (including
    constant ones) get ``inf``.
    """
    X, _ = _as_design(X)
    m, p = X.shape
    if p < 2:
        raise ShapeError("vif needs at least two columns")
    out = np.empty(p)
    for j in range(p):
        target = X[:, j]
        others = np.column_stack([np.ones(m), np.delete(X, j, axis=1)])
        beta, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ beta
        sst = float(((target - target.mean()) ** 2).sum())
        if sst == 0.0:
            out[j] = np.inf
            continue
        unexplained = float(resid @ resid) / sst
        out[j] = np.inf if unexplained <= _PERFECT_FIT else 1.0 / unexplained
    return out


def standardize(X, names=None) -> np.ndarray:
    X, _ = _as_design(X)
    sd = X.std(axis=0)
    zero = np.flatnonzero(sd == 0)
    if zero.size:
        j = zero[0]
        label = names[j] if names is not None else j
        raise ConstantColumnError(f"column {label!r} has zero variance", column=label)
    return (X - X.mean(axis=0)) / sd


def correlation_matrix(X, names=None) -> np.ndarray:
    """Pearson correlation matrix of the columns of ``X``."""
    Zs = standardize(X, names)
    R = (Zs.T @ Zs) / Zs.shape[0]
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return np.clip(R, -1.0, 1.0)
