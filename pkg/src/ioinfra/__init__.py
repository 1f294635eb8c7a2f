"""Input-output analytics for transport infrastructure interdependencies.

Ingest symmetric input-output tables, balance them (RAS), compute
Leontief analytics, map transport x infrastructure dependencies, and build
a PCA-guided linear model of transport demand.
"""

__version__ = "0.1.0"

from .balance import RASSettings, balance_table, ras_balance
from .core import (
    IOTable,
    SectorCode,
    SectorTaxonomy,
    TableSeries,
    aggregate_by,
    aggregate_sectors,
    total_flow_between,
)
from .ingest import load_taxonomy, default_taxonomy, parse_table_file, write_canonical
from .interdep import InterdependencyMap, build_interdependency_map, diff_maps, published_map
from .leontief import (
    LeontiefModel,
    leontief_inverse,
    output_multipliers,
    propagate_demand_shock,
    technical_coefficients,
)
from .model import LinearModel, published_model, predict
from .pca import FactorSelection, PCAResult, Retention, pca_fit, select_representatives, varimax_rotate
from .stats import RegressionResult, correlation_matrix, ols_fit, vif

__all__ = [
    "FactorSelection", "IOTable", "InterdependencyMap", "LeontiefModel", "LinearModel",
    "PCAResult", "RASSettings", "RegressionResult", "Retention", "SectorCode",
    "SectorTaxonomy", "TableSeries", "aggregate_by", "aggregate_sectors", "balance_table",
    "build_interdependency_map", "correlation_matrix", "diff_maps", "leontief_inverse",
    "load_taxonomy", "ols_fit", "output_multipliers", "published_map", "published_model",
    "default_taxonomy", "parse_table_file", "pca_fit", "predict", "propagate_demand_shock",
    "ras_balance", "select_representatives", "technical_coefficients", "total_flow_between",
    "varimax_rotate", "vif", "write_canonical",
]
