"""Economic complexity, product-space relatedness and the direction of
diversification into new export products."""
from ._accel import BACKEND
from .complexity import (AdvantageMatrix, ComplexityScores, compute_eci_pci, compute_rca, drop_degenerate,
                         rca_matrix)
from .econometrics import build_design, cubic_minimum_fit, ols_fit, vif
from .ingest import FilterConfig, TradePanel, apply_filters, load_covariates_csv, load_trade_csv
from .jumps import JumpConfig, JumpEvent, detect_jumps, survival_time
from .product_space import compute_density, compute_proximity
from .relatedness import development_direction, option_set, relative_complexity, relative_density, \
    relative_metrics
from .stages import classify_stage, ks_two_sample, option_set_correlation

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AdvantageMatrix", "ComplexityScores", "FilterConfig", "JumpConfig", "JumpEvent", "TradePanel",
    "apply_filters", "build_design", "classify_stage", "compute_density", "compute_eci_pci", "compute_proximity",
    "compute_rca", "cubic_minimum_fit", "detect_jumps", "development_direction", "drop_degenerate",
    "ks_two_sample", "load_covariates_csv", "load_trade_csv", "ols_fit", "option_set", "option_set_correlation",
    "rca_matrix", "relative_complexity", "relative_density", "relative_metrics", "survival_time", "vif",
]
