"""Technical coefficients, Leontief inverse, multipliers and demand shocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import IOTable
from .errors import DegenerateSectorError, ShapeError, SingularEconomyError

PRODUCTIVITY_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class LeontiefModel:
    coefficients: np.ndarray
    inverse: np.ndarray
    spectral_radius_bound: float

    @classmethod
    def from_table(cls, table: IOTable) -> "LeontiefModel":
        A = technical_coefficients(table)
        bound = certify_productive(A)
        return cls(A, leontief_inverse(A), bound)

    def multipliers(self) -> np.ndarray:
        return output_multipliers(self.inverse)

    def propagate(self, delta_f):
        return propagate_demand_shock(self.inverse, delta_f)


def technical_coefficients(table: IOTable) -> np.ndarray:
    """``A[i, j] = flows[i, j] / total_output[j]``; zero-output sectors with
    no inputs give zero columns."""
    Z = table.flows
    x = table.total_output
    zero = x == 0
    bad = np.flatnonzero(zero & np.any(Z != 0, axis=0))
    if bad.size:
        names = ", ".join(table.codes[j] for j in bad)
        raise DegenerateSectorError(f"nonzero inputs into zero-output sectors: {names}")
    A = np.zeros_like(Z)
    np.divide(Z, x[None, :], out=A, where=~zero[None, :])
    return A


def spectral_radius_bounds(A, max_iter: int = 20000, rtol: float = 1e-12):
    """Collatz-Wielandt lower/upper bounds on the spectral radius of ``|A|``.

    Iterates ``x <- (I + |A|) x`` from a positive start; the identity shift
    keeps the iteration aperiodic.
    """
    B = np.abs(np.asarray(A, dtype=float))
    n = B.shape[0]
    if n == 0:
        return 0.0, 0.0
    x = np.ones(n)
    lo, hi = 0.0, np.inf
    for _ in range(max_iter):
        y = B @ x + x
        ratio = y / x
        lo, hi = float(ratio.min()) - 1.0, float(ratio.max()) - 1.0
        if hi - lo <= rtol * max(hi, 1.0) or hi < 1.0 - PRODUCTIVITY_MARGIN or lo >= 1.0 - PRODUCTIVITY_MARGIN:
            break
        x = y / y.max()
    return max(lo, 0.0), hi


def certify_productive(A) -> float:
    """Return an upper bound on the spectral radius of ``A`` below one, or
    raise :class:`SingularEconomyError`."""
    A = np.asarray(A, dtype=float)
    colmax = float(np.abs(A).sum(axis=0).max(initial=0.0))
    if colmax < 1.0 - PRODUCTIVITY_MARGIN:
        return colmax
    lo, hi = spectral_radius_bounds(A)
    if hi < 1.0 - PRODUCTIVITY_MARGIN:
        return hi
    if lo < 1.0 - PRODUCTIVITY_MARGIN:
        # bounds did not separate; settle with the eigenvalues of A itself
        rho = float(np.abs(np.linalg.eigvals(A)).max())
        if rho < 1.0 - PRODUCTIVITY_MARGIN:
            return rho
        lo = rho
    raise SingularEconomyError(f"coefficient matrix is not productive (spectral radius >= {lo:.6g})")


def leontief_inverse(A) -> np.ndarray:
    """``(I - A)^-1`` via an LU solve, after certifying productivity."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"A must be square, got {A.shape}")
    certify_productive(A)
    eye = np.eye(A.shape[0])
    return np.linalg.solve(eye - A, eye)


def propagate_demand_shock(L, delta_f):
    """Split the output response to a final-demand change.

    Returns ``(total, direct, indirect)`` with ``total = L @ delta_f``,
    ``direct = delta_f`` and ``indirect = total - direct``.
    """
    L = np.asarray(L, dtype=float)
    f = np.asarray(delta_f, dtype=float)
    if L.ndim != 2 or f.shape != (L.shape[1],):
        raise ShapeError(f"shock of shape {f.shape} does not match L {L.shape}")
    total = L @ f
    direct = f.copy()
    indirect = total - direct
    return total, direct, indirect


def output_multipliers(L) -> np.ndarray:
    """Type I output multipliers: column sums of the Leontief inverse."""
    return np.asarray(L, dtype=float).sum(axis=0)
