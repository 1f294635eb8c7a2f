"""Correlation-matrix PCA with varimax rotation and representative selection."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    DegenerateRetentionWarning,
    EmptyRotationError,
    InvalidCorrelationError,
    NoNewRepresentativeWarning,
)

CORR_TOL = 1e-10
VARIMAX_TOL = 1e-10
VARIMAX_MAX_SWEEPS = 1000
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Retention:
    """Factor retention rule.

    ``kaiser`` keeps eigenvalues above one, ``cumulative`` keeps the smallest
    k whose cumulative percent reaches ``value``, ``fixed`` keeps ``value``.
    """

    criterion: str = "kaiser"
    value: Optional[float] = None

    def __post_init__(self):
        if self.criterion not in ("kaiser", "cumulative", "fixed"):
            raise ValueError(f"unknown retention criterion {self.criterion!r}")
        if self.criterion != "kaiser" and self.value is None:
            raise ValueError(f"{self.criterion} retention needs a value")

    @classmethod
    def parse(cls, text: str) -> "Retention":
        """``"kaiser"``, ``"fixed:4"`` or ``"cumulative:90"``."""
        name, _, val = text.partition(":")
        return cls(name, float(val) if val else None)

    def __str__(self):
        if self.value is None:
            return self.criterion
        v = int(self.value) if float(self.value).is_integer() else self.value
        return f"{self.criterion}:{v}"

    def count(self, eigenvalues, n_variables=None) -> int:
        ev = np.asarray(eigenvalues, dtype=float)
        if self.criterion == "kaiser":
            return int(np.sum(ev > 1.0))
        if self.criterion == "fixed":
            k = int(self.value)
            if not 1 <= k <= ev.size:
                raise ValueError(f"fixed retention {k} outside 1..{ev.size}")
            return k
        p = n_variables if n_variables is not None else ev.sum()
        cum = np.cumsum(100.0 * ev / p)
        hit = np.flatnonzero(cum >= float(self.value) - 1e-9)
        return int(hit[0] + 1) if hit.size else int(ev.size)


@dataclass(frozen=True)
class VarianceRow:
    component: int
    initial: tuple[float, float, float]
    extraction: Optional[tuple[float, float, float]] = None
    rotation: Optional[tuple[float, float, float]] = None


def variance_table(eigenvalues, rotated_sums=None, n_variables=None, retained=None) -> list[VarianceRow]:
    """Total-variance-explained rows: initial, extraction and rotation sums.

    Percent is ``100 * value / n_variables``; ``n_variables`` defaults to the
    number of eigenvalues. Extraction rows cover the first ``retained``
    components (default: as many as ``rotated_sums``, else the Kaiser count).
    """
    ev = np.asarray(eigenvalues, dtype=float)
    p = float(n_variables) if n_variables is not None else float(ev.size)
    if retained is None:
        retained = len(rotated_sums) if rotated_sums is not None else int(np.sum(ev > 1.0))
    pct = 100.0 * ev / p
    cum = np.cumsum(pct)
    rot = None
    if rotated_sums is not None:
        rs = np.asarray(rotated_sums, dtype=float)
        rpct = 100.0 * rs / p
        rot = list(zip(rs, rpct, np.cumsum(rpct)))
    rows = []
    for i in range(ev.size):
        init = (float(ev[i]), float(pct[i]), float(cum[i]))
        rows.append(VarianceRow(
            component=i + 1,
            initial=init,
            extraction=init if i < retained else None,
            rotation=tuple(float(x) for x in rot[i]) if rot is not None and i < len(rot) else None,
        ))
    return rows


@dataclass(frozen=True, eq=False)
class PCAResult:
    eigenvalues: np.ndarray
    components: np.ndarray
    loadings: np.ndarray
    rotated_loadings: np.ndarray
    rotation: np.ndarray
    names: tuple[str, ...]
    retention: Retention = field(default_factory=Retention)

    @property
    def p(self) -> int:
        return self.components.shape[0]

    @property
    def retained(self) -> int:
        return self.loadings.shape[1]

    @property
    def rotated_sums(self) -> np.ndarray:
        return (self.rotated_loadings ** 2).sum(axis=0)

    @property
    def communalities(self) -> np.ndarray:
        return (self.loadings ** 2).sum(axis=1)

    @property
    def variance_table(self) -> list[VarianceRow]:
        return variance_table(self.eigenvalues, self.rotated_sums, retained=self.retained)


def _check_correlation(R):
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] == 0:
        raise InvalidCorrelationError(f"correlation matrix must be square, got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise InvalidCorrelationError("correlation matrix has non-finite entries")
    if np.max(np.abs(R - R.T)) > CORR_TOL:
        raise InvalidCorrelationError("correlation matrix is not symmetric")
    if np.max(np.abs(np.diag(R) - 1.0)) > CORR_TOL:
        raise InvalidCorrelationError("correlation matrix diagonal is not 1")
    return 0.5 * (R + R.T)


def _orient(vectors):
    """Flip columns so each one's largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_fit(R, retain: Retention | str = "kaiser", names: Sequence[str] | None = None,
            rotate: bool = True) -> PCAResult:
    """Eigendecompose a correlation matrix, retain factors and rotate them.

    Rotated factors are reordered by decreasing sum of squared loadings and
    oriented to have a nonnegative column sum.
    """
    if isinstance(retain, str):
        retain = Retention.parse(retain)
    R = _check_correlation(R)
    p = R.shape[0]
    evals, evecs = np.linalg.eigh(R)
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    if evals[-1] < -CORR_TOL * p:
        raise InvalidCorrelationError(f"correlation matrix is not PSD (eigenvalue {evals[-1]:.3g})")
    evecs = _orient(evecs[:, order])
    names = tuple(names) if names is not None else tuple(f"v{i + 1}" for i in range(p))
    if len(names) != p:
        raise InvalidCorrelationError(f"{len(names)} names for {p} variables")

    k = retain.count(evals, p)
    if k == 0:
        warnings.warn("no component meets the retention rule; supply a fixed count",
                      DegenerateRetentionWarning, stacklevel=2)
    loadings = evecs[:, :k] * np.sqrt(np.clip(evals[:k], 0.0, None))
    if k >= 1 and rotate:
        rotated, T = varimax_rotate(loadings)
        perm = np.argsort(-(rotated ** 2).sum(axis=0), kind="stable")
        rotated, T = rotated[:, perm], T[:, perm]
        signs = np.where(rotated.sum(axis=0) < 0, -1.0, 1.0)
        rotated, T = rotated * signs, T * signs
    else:
        rotated, T = loadings.copy(), np.eye(k)
    return PCAResult(evals, evecs, loadings, rotated, T, names, retain)


def _normalize_rows(loadings):
    h = np.sqrt((loadings ** 2).sum(axis=1))
    safe = np.where(h > 0, h, 1.0)
    return loadings / safe[:, None], h


def varimax_criterion(loadings, normalize: bool = True) -> float:
    """Sum over factors of the variance of squared loadings."""
    L = np.asarray(loadings, dtype=float)
    if normalize:
        L, _ = _normalize_rows(L)
    return float(kernels._kernels_py.varimax_criterion(L))


def varimax_rotate(loadings, normalize: bool = True, tol: float = VARIMAX_TOL,
                   max_sweeps: int = VARIMAX_MAX_SWEEPS):
    """Varimax rotation by pairwise planar sweeps.

    Returns ``(rotated_loadings, rotation)`` with
    ``rotated_loadings = loadings @ rotation``.
    """
    L = np.asarray(loadings, dtype=float)
    if L.ndim != 2 or L.shape[1] == 0:
        raise EmptyRotationError("nothing to rotate: no retained factors")
    k = L.shape[1]
    B = np.ascontiguousarray(_normalize_rows(L)[0] if normalize else L.copy())
    T = np.eye(k)
    if k > 1:
        kernels.varimax_sweeps(B, T, tol, max_sweeps)
    return L @ T, T


@dataclass(frozen=True)
class Representative:
    factor: int
    variable: str
    unrotated_loading: float
    rotated_loading: float
    unrotated_rank: int
    rotated_rank: int
    disagreement: bool = False
    tie: bool = False


@dataclass(frozen=True)
class FactorSelection:
    retained_count: int
    criterion: str
    protected: tuple[str, ...]
    representatives: tuple[Representative, ...]
    skipped_factors: tuple[int, ...] = ()

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(r.variable for r in self.representatives)

    def to_dict(self) -> dict:
        return {
            "retained_count": self.retained_count,
            "criterion": self.criterion,
            "protected": list(self.protected),
            "representatives": [asdict(r) for r in self.representatives],
            "skipped_factors": list(self.skipped_factors),
        }


def _ranking(column):
    # stable: equal magnitudes keep declaration order
    return list(np.argsort(-np.abs(column), kind="stable"))


def select_representatives(result: PCAResult, protected: Iterable[str]) -> FactorSelection:
    """Pick one non-protected variable per factor 2..k.

    Factor 1 is represented by the protected variables as a group. For
    later factors the variable with the largest absolute unrotated loading
    is chosen; a different winner in the rotated matrix is recorded as a
    disagreement. Equal magnitudes resolve in declaration order and are
    flagged as ties.
    """
    protected = tuple(protected)
    names = result.names
    missing = [v for v in protected if v not in names]
    if missing:
        raise KeyError(f"protected variables not found: {', '.join(missing)}")
    prot_idx = {names.index(v) for v in protected}
    U, Rot = result.loadings, result.rotated_loadings
    chosen: list[Representative] = []
    taken = set(prot_idx)
    skipped = []
    for f in range(1, result.retained):
        order_u = _ranking(U[:, f])
        order_r = _ranking(Rot[:, f])
        if order_u[0] in prot_idx and order_r[0] in prot_idx:
            warnings.warn(f"factor {f + 1} is led by protected variables; no new representative",
                          NoNewRepresentativeWarning, stacklevel=2)
            skipped.append(f + 1)
            continue
        elig_u = [i for i in order_u if i not in taken]
        elig_r = [i for i in order_r if i not in taken]
        if not elig_u:
            skipped.append(f + 1)
            continue
        pick = elig_u[0]
        top = abs(U[pick, f])
        tie = len(elig_u) > 1 and abs(abs(U[elig_u[1], f]) - top) <= TIE_RTOL * max(top, 1e-300)
        chosen.append(Representative(
            factor=f + 1,
            variable=names[pick],
            unrotated_loading=float(U[pick, f]),
            rotated_loading=float(Rot[pick, f]),
            unrotated_rank=order_u.index(pick) + 1,
            rotated_rank=order_r.index(pick) + 1,
            disagreement=bool(elig_r[0] != pick),
            tie=bool(tie),
        ))
        taken.add(pick)
    return FactorSelection(
        retained_count=result.retained,
        criterion=str(result.retention),
        protected=protected,
        representatives=tuple(chosen),
        skipped_factors=tuple(skipped),
    )
