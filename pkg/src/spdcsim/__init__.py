"""Spectral correlations of photon pairs from pulsed type-II BBO down-conversion."""

__version__ = "0.1.0"

from spdcsim.biphoton import (  # noqa: E402
    BiphotonGrid,
    biphoton_analytic,
    biphoton_numeric,
    default_frequency_grid,
    epmf_numeric,
    sigma_plus,
)
from spdcsim.dispersion import BBO_ZHANG, CrystalConfig  # noqa: E402
from spdcsim.errors import ConfigError, ConvergenceError, DomainError, SpdcError  # noqa: E402
from spdcsim.metrics import (  # noqa: E402
    SourceMetrics,
    coupling_efficiency,
    evaluate_source,
    pearson_r_analytic,
    pearson_r_grid,
)
from spdcsim.phasematch import CollectionConfig, PumpConfig, taylor_coefficients  # noqa: E402
from spdcsim.sweep import Axis, SweepPlan, recipe_lookup, run_sweep  # noqa: E402

__all__ = [
    "BBO_ZHANG", "Axis", "BiphotonGrid", "CollectionConfig", "ConfigError", "ConvergenceError",
    "CrystalConfig", "DomainError", "PumpConfig", "SourceMetrics", "SpdcError", "SweepPlan",
    "biphoton_analytic", "biphoton_numeric", "coupling_efficiency", "default_frequency_grid",
    "epmf_numeric", "evaluate_source", "pearson_r_analytic", "pearson_r_grid", "recipe_lookup",
    "run_sweep", "sigma_plus", "taylor_coefficients",
]
