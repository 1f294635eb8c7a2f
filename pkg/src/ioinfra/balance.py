"""RAS (biproportional) balancing of nonnegative flow matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import IOTable
from .errors import (
    ConvergenceError,
    InfeasibleTargetsError,
    ShapeError,
    StructuralZeroError,
)


@dataclass(frozen=True)
class RASSettings:
    tolerance: float = 1e-9
    max_iterations: int = 10000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class RASResult:
    matrix: np.ndarray
    row_factors: np.ndarray
    col_factors: np.ndarray
    iterations: int
    residual: float
    history: np.ndarray

    def __iter__(self):
        # allows ``balanced, iterations = ras_balance(...)``
        return iter((self.matrix, self.iterations))


def marginal_residual(X, row_targets, col_targets) -> float:
    """Largest ``|achieved - target| / max(target, 1)`` over all marginals."""
    X = np.asarray(X, dtype=float)
    rr = np.abs(X.sum(axis=1) - row_targets) / np.maximum(row_targets, 1.0)
    cr = np.abs(X.sum(axis=0) - col_targets) / np.maximum(col_targets, 1.0)
    return float(max(rr.max(initial=0.0), cr.max(initial=0.0)))


def ras_balance(matrix, row_targets, col_targets, settings: RASSettings | None = None) -> RASResult:
    """Scale ``matrix`` to prescribed row and column sums.

    Returns an :class:`RASResult`; it unpacks as ``(balanced, iterations)``.
    The balanced matrix equals ``diag(row_factors) @ matrix @ diag(col_factors)``.
    Each sweep scales rows first, then columns.
    """
    settings = settings or RASSettings()
    M = np.ascontiguousarray(matrix, dtype=float)
    u = np.ascontiguousarray(row_targets, dtype=float)
    v = np.ascontiguousarray(col_targets, dtype=float)
    if M.ndim != 2 or u.shape != (M.shape[0],) or v.shape != (M.shape[1],):
        raise ShapeError(f"matrix {M.shape} incompatible with targets {u.shape}, {v.shape}")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("matrix and targets must be finite")
    if np.any(M < 0):
        raise ValueError("matrix must be nonnegative")
    if np.any(u < 0) or np.any(v < 0):
        raise InfeasibleTargetsError("targets must be nonnegative")
    su, sv = u.sum(), v.sum()
    if abs(su - sv) > settings.tolerance * max(su, sv, 1.0):
        raise InfeasibleTargetsError(
            f"row targets sum to {su!r} but column targets sum to {sv!r}"
        )
    empty_rows = np.flatnonzero((u > 0) & (M.sum(axis=1) == 0))
    empty_cols = np.flatnonzero((v > 0) & (M.sum(axis=0) == 0))
    if empty_rows.size or empty_cols.size:
        raise StructuralZeroError(
            f"positive targets on all-zero rows {empty_rows.tolist()} / columns {empty_cols.tolist()}"
        )

    max_iter = int(settings.max_iterations)
    r = np.ones(M.shape[0])
    s = np.ones(M.shape[1])
    history = np.full(max_iter, np.nan)
    iterations, residual = kernels.ras_sweeps(M, u, v, r, s, history, settings.tolerance, max_iter)
    if residual > settings.tolerance:
        raise ConvergenceError(
            f"RAS did not converge in {iterations} iterations (residual {residual:.3e})",
            residual=residual, iterations=iterations,
        )
    X = r[:, None] * M * s[None, :]
    return RASResult(X, r, s, int(iterations), float(residual), history[:iterations].copy())


def balance_table(table: IOTable, settings: RASSettings | None = None) -> IOTable:
    """RAS-balance a table's intermediate flows to its own margins.

    Row targets are ``total_output - final_demand``; column targets are
    ``total_output - value_added``. The result is marked balanced.
    """
    row_targets = table.total_output - table.final_demand
    col_targets = table.total_output - table.value_added
    res = ras_balance(table.flows, row_targets, col_targets, settings)
    return table.replace(flows=res.matrix, balanced=True)
