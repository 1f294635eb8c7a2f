"""Deterministic synthetic table series with a known factor structure.

Sector demands follow a four-factor model: the infrastructure aggregates
and most product groups load on the first factor, printing (C18),
textiles (C13-15) and mining (B) lead factors two to four. Transport
demand is generated from the published linear model, optionally with
Gaussian noise. Intermediate flows respect the published transport x
infrastructure dependency pattern.
"""

from __future__ import annotations

import numpy as np

from .core import INFRASTRUCTURE, IOTable, SectorTaxonomy, TableSeries
from .model import PUBLISHED_COEFFICIENTS, PUBLISHED_INTERCEPT, PUBLISHED_PREDICTORS

# loadings on (F1, F2, F3, F4); means in table units; cv = sd / mean
FACTOR_DESIGN = {
    "energy":        ((0.95, 0.10, 0.00, 0.10), 30000.0, 0.10),
    "waste":         ((0.93, 0.00, 0.15, 0.00), 9000.0, 0.12),
    "communication": ((0.94, 0.00, 0.00, 0.15), 25000.0, 0.10),
    "water":         ((0.92, 0.15, 0.10, 0.00), 8000.0, 0.08),
    "A01":           ((0.90, 0.20, 0.00, 0.00), 20000.0, 0.08),
    "C10-12":        ((0.92, 0.00, 0.20, 0.00), 60000.0, 0.06),
    "C20":           ((0.85, 0.00, 0.00, 0.40), 40000.0, 0.08),
    "C24":           ((0.88, 0.20, 0.10, 0.00), 15000.0, 0.10),
    "F":             ((0.93, 0.00, 0.00, 0.10), 150000.0, 0.07),
    "K64":           ((0.95, 0.00, 0.00, 0.00), 120000.0, 0.09),
    "O84":           ((0.90, 0.10, 0.00, 0.00), 90000.0, 0.05),
    "C18":           ((0.20, 0.95, 0.00, 0.00), 12000.0, 0.12),
    "C16":           ((0.40, 0.75, 0.00, 0.00), 7000.0, 0.10),
    "C26":           ((0.30, 0.70, 0.20, 0.00), 18000.0, 0.10),
    "C13-15":        ((0.15, 0.00, 0.95, 0.00), 10000.0, 0.15),
    "M69-70":        ((0.60, 0.00, 0.50, 0.00), 45000.0, 0.08),
    "B":             ((0.10, 0.00, 0.05, 0.95), 35000.0, 0.12),
}
FLOW_SHARE = 0.4


def _orthonormal_scores(rng, m, k):
    G = rng.standard_normal((m, k))
    G -= G.mean(axis=0)
    Q, _ = np.linalg.qr(G)
    return Q * np.sqrt(m)


def _variable_panel(rng, m):
    names = list(FACTOR_DESIGN)
    F = _orthonormal_scores(rng, m, 4)
    E = rng.standard_normal((m, len(names)))
    E -= E.mean(axis=0)
    # remove the factor directions so idiosyncratic parts are exactly unique
    E -= F @ np.linalg.lstsq(F, E, rcond=None)[0]
    E /= E.std(axis=0)
    out = {}
    for j, name in enumerate(names):
        lam, mean, cv = FACTOR_DESIGN[name]
        lam = np.asarray(lam)
        psi = np.sqrt(max(1.0 - lam @ lam, 0.0))
        z = F @ lam + psi * E[:, j]
        out[name] = mean * (1.0 + cv * z)
    return out


def _split(total, shares):
    return np.outer(total, shares)


def synthetic_series(taxonomy: SectorTaxonomy | None = None, years=range(2000, 2015),
                     noise: float = 0.0, seed: int = 0, region: str = "UK",
                     coefficients=PUBLISHED_COEFFICIENTS, intercept: float = PUBLISHED_INTERCEPT,
                     dependency_map=None) -> TableSeries:
    """Generate a balanced series whose demands follow the factor design.

    ``noise`` is the response noise sd as a fraction of the noise-free
    transport demand sd.
    """
    from .ingest import default_taxonomy
    from .interdep import published_map

    taxonomy = taxonomy or default_taxonomy()
    dependency_map = dependency_map or published_map(taxonomy)
    rng = np.random.default_rng(seed)
    years = list(years)
    m = len(years)
    if m <= 4:
        raise ValueError("need at least 5 years for a four-factor design")
    panel = _variable_panel(rng, m)

    X = np.column_stack([panel[p] for p in PUBLISHED_PREDICTORS])
    y = intercept + X @ np.asarray(coefficients, dtype=float)
    if noise > 0:
        y = y + rng.normal(0.0, noise * y.std(), size=m)

    codes = taxonomy.codes
    n = len(codes)
    demand = np.zeros((m, n))
    col = {c: i for i, c in enumerate(codes)}
    groups = {"transport": list(taxonomy.codes_in("transport"))}
    for cat in INFRASTRUCTURE:
        groups[cat] = list(taxonomy.codes_in(cat))
    for name, members in groups.items():
        total = y if name == "transport" else panel[name]
        shares = rng.dirichlet(np.full(len(members), 5.0))
        demand[:, [col[c] for c in members]] = _split(total, shares)
    for code in taxonomy.codes_in("other"):
        if code not in panel:
            raise KeyError(f"no synthetic design for sector {code!r}")
        demand[:, col[code]] = panel[code]

    W = rng.uniform(0.5, 1.5, size=(n, n))
    for r, t in enumerate(dependency_map.rows):
        for s, svc in enumerate(dependency_map.columns):
            if not dependency_map.cells[r, s]:
                W[col[svc], col[t]] = 0.0

    tables = []
    sectors = taxonomy.sectors
    for k, year in enumerate(years):
        d = demand[k]
        Z = FLOW_SHARE * W * np.outer(d, d) / d.sum()
        f = d - Z.sum(axis=1)
        x = Z.sum(axis=1) + f
        va = x - Z.sum(axis=0)
        tables.append(IOTable(year, region, sectors, Z, f, va, x, balanced=True))
    return TableSeries(tuple(tables))


def main(argv=None):
    """Regenerate the bundled dataset: ``python -m ioinfra.synthetic OUT.csv``."""
    import argparse

    from .ingest import write_canonical

    ap = argparse.ArgumentParser(description=main.__doc__)
    ap.add_argument("out")
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    write_canonical(synthetic_series(noise=args.noise, seed=args.seed), args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
