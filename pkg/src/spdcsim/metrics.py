"""Figures of merit: Pearson correlation, marginal widths, pair and single rates, efficiency."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from spdcsim.biphoton import (
    BiphotonGrid,
    _rules,
    analytic_marginal_width,
    biphoton_analytic,
    biphoton_numeric,
    default_frequency_grid,
    epmf_convergence,
    epmf_grid,
    pump_spectral_amplitude,
    sigma_plus,
    single_arm_grid,
    CONVERGENCE_TOL,
    DEFAULT_GRID_POINTS,
)
from spdcsim.dispersion import CrystalConfig
from spdcsim.errors import ConvergenceError, DomainError
from spdcsim.numerics import FrequencyGrid
from spdcsim.phasematch import CollectionConfig, PumpConfig, taylor_coefficients

ETA_TOLERANCE = 1e-3
# Rates integrate a single-arm spectrum that is broader than the pair one,
# so their window is twice as wide; 48 points already resolve it to 1e-4.
RATE_GRID_POINTS = 48
RATE_GRID_SPAN = 10.0

REFERENCE_LENGTH = 7.5e-3
REFERENCE_TAU_FWHM = 150e-15
REFERENCE_WAIST = 250e-6


def _moments(p: np.ndarray, ws: np.ndarray, wi: np.ndarray):
    total = p.sum()
    if not total > 0:
        raise DomainError("correlation undefined: |psi|^2 vanishes on the grid")
    ps = p.sum(axis=1) / total
    pi = p.sum(axis=0) / total
    ms = ps @ ws
    mi = pi @ wi
    ds = ws - ms
    di = wi - mi
    var_s = ps @ ds**2
    var_i = pi @ di**2
    cov = ds @ (p / total) @ di
    return var_s, var_i, cov


def pearson_r_grid(psi: BiphotonGrid) -> float:
    """Pearson coefficient of signal and idler frequencies over |psi|^2.

    Means are the empirical means of the marginals, so a slightly
    off-centre numeric state is not biased towards omega0.

    Raises:
        DomainError: if either marginal has zero variance.
    """
    var_s, var_i, cov = _moments(psi.intensity, psi.grid.omega_s, psi.grid.omega_i)
    if not (var_s > 0 and var_i > 0):
        raise DomainError("correlation undefined: a marginal has zero variance")
    return float(np.clip(cov / np.sqrt(var_s * var_i), -1.0, 1.0))


def pearson_r_analytic(tau: float, sigma: float) -> float:
    """r = (1 - tau^2 sigma^2) / (1 + tau^2 sigma^2)."""
    if not (tau > 0 and sigma > 0):
        raise DomainError("tau and sigma must be positive")
    x = (tau * sigma) ** 2
    return float((1 - x) / (1 + x))


def marginal_std_grid(psi: BiphotonGrid) -> tuple[float, float]:
    """Standard deviations of the signal and idler marginals of |psi|^2 (rad/s)."""
    var_s, var_i, _ = _moments(psi.intensity, psi.grid.omega_s, psi.grid.omega_i)
    return float(np.sqrt(var_s)), float(np.sqrt(var_i))


def marginal_widths_grid(psi: BiphotonGrid) -> tuple[float, float]:
    """Marginal widths in the closed-form convention, i.e. twice the std.

    For a Gaussian marginal this is the half-width at which |psi|^2
    drops to 1/e^2, the quantity returned by :func:`marginal_width_analytic`.
    """
    s, i = marginal_std_grid(psi)
    return 2 * s, 2 * i


def marginal_width_analytic(tau: float, crystal: CrystalConfig, pump: PumpConfig,
                            collection: CollectionConfig) -> float:
    """sqrt((1/tau^2 + sigma_+^2) / 2) for this configuration (rad/s)."""
    coeffs = taylor_coefficients(crystal, pump.omega0)
    return analytic_marginal_width(tau, sigma_plus(coeffs, collection, crystal).value)


def rate_grid(crystal: CrystalConfig, pump: PumpConfig, collection: CollectionConfig,
              n: int = RATE_GRID_POINTS, span: float = RATE_GRID_SPAN) -> FrequencyGrid:
    return default_frequency_grid(crystal, pump, collection, n, span)


def _spectral_sum(values: np.ndarray, grid: FrequencyGrid, crystal: CrystalConfig,
                  pump: PumpConfig) -> float:
    ws, wi = grid.mesh()
    weight = pump_spectral_amplitude(ws + wi, pump) ** 2
    return float(np.sum(weight * values) * grid.cell_area * crystal.length**2)


def _check(crystal, pump, collection, rule, reduced, check_convergence):
    if not check_convergence:
        return
    change = epmf_convergence(crystal, pump, collection, rule, reduced)
    if not change < CONVERGENCE_TOL:
        raise ConvergenceError(
            f"transverse quadrature not converged (order-doubling change {change:.2e})")


def rate_coupled_absolute(crystal: CrystalConfig, pump: PumpConfig,
                          collection: CollectionConfig, rule=None,
                          grid: Optional[FrequencyGrid] = None, reduced: bool = False,
                          check_convergence: bool = False) -> float:
    """Pair rate with both photons projected, in model units.

    Integrates |A_p(ws + wi) L Theta(ws, wi)|^2 with the unnormalised EPMF.
    """
    _check(crystal, pump, collection, rule, reduced, check_convergence)
    grid = rate_grid(crystal, pump, collection) if grid is None else grid
    theta = epmf_grid(grid, crystal, pump, collection, rule, reduced)
    return _spectral_sum(theta**2, grid, crystal, pump)


def rate_single_absolute(arm: str, crystal: CrystalConfig, pump: PumpConfig,
                         collection: CollectionConfig, rule=None,
                         grid: Optional[FrequencyGrid] = None, reduced: bool = False,
                         check_convergence: bool = False) -> float:
    """Rate with only ``arm`` projected on its fibre mode, in model units."""
    _check(crystal, pump, collection, rule, reduced, check_convergence)
    grid = rate_grid(crystal, pump, collection) if grid is None else grid
    power = single_arm_grid(arm, grid, crystal, pump, collection, rule, reduced)
    return _spectral_sum(power, grid, crystal, pump)


def reference_configuration(omega0: Optional[float] = None):
    """Crystal, pump and collection that define unit pair rate."""
    crystal = CrystalConfig(REFERENCE_LENGTH)
    pump = PumpConfig.from_fwhm(REFERENCE_TAU_FWHM, REFERENCE_WAIST)
    if omega0 is not None:
        pump = PumpConfig(pump.tau, pump.waist, omega0)
    return crystal, pump, CollectionConfig(REFERENCE_WAIST)


@lru_cache(maxsize=16)
def _reference_rate(rules, reduced: bool, n: int, span: float, omega0: float) -> float:
    crystal, pump, collection = reference_configuration(omega0)
    grid = rate_grid(crystal, pump, collection, n, span)
    return rate_coupled_absolute(crystal, pump, collection, rules, grid, reduced)


def reference_rate(rule=None, reduced: bool = False, n: int = RATE_GRID_POINTS,
                   span: float = RATE_GRID_SPAN, omega0: Optional[float] = None) -> float:
    """Absolute pair rate of the reference configuration under the same numerics."""
    if omega0 is None:
        omega0 = reference_configuration()[1].omega0
    return _reference_rate(_rules(rule, reduced), reduced, n, span, float(omega0))


def rate_coupled(crystal: CrystalConfig, pump: PumpConfig, collection: CollectionConfig,
                 rule=None, grid: Optional[FrequencyGrid] = None, reduced: bool = False,
                 check_convergence: bool = True) -> float:
    """Pair rate R_c relative to the reference configuration (R_c = 1 there)."""
    ref = reference_rate(rule, reduced, omega0=pump.omega0)
    return rate_coupled_absolute(crystal, pump, collection, rule, grid, reduced,
                                 check_convergence) / ref


def rate_single(arm: str, crystal: CrystalConfig, pump: PumpConfig,
                collection: CollectionConfig, rule=None,
                grid: Optional[FrequencyGrid] = None, reduced: bool = False,
                check_convergence: bool = True) -> float:
    """Single-arm rate R_s or R_i in the same relative units as :func:`rate_coupled`."""
    ref = reference_rate(rule, reduced, omega0=pump.omega0)
    return rate_single_absolute(arm, crystal, pump, collection, rule, grid, reduced,
                                check_convergence) / ref


def coupling_efficiency(r_c: float, r_s: float, r_i: float) -> float:
    """eta = R_c / sqrt(R_s R_i).

    Quadrature noise may push eta slightly above one; values within
    ``ETA_TOLERANCE`` are clamped with a warning, larger excesses raise.
    """
    if not (r_c > 0 and r_s > 0 and r_i > 0):
        raise DomainError("rates must be positive")
    eta = r_c / np.sqrt(r_s * r_i)
    if eta > 1.0:
        if eta - 1.0 > ETA_TOLERANCE:
            raise ConvergenceError(f"coupling efficiency {eta:.6f} exceeds 1")
        warnings.warn(f"coupling efficiency {eta:.6f} clamped to 1", stacklevel=2)
        eta = 1.0
    return float(eta)


RECORD_KEYS = ("backend", "r", "width_s", "width_i", "Rc_rel", "Rs_rel", "Ri_rel", "eta",
               "converged")


@dataclass(frozen=True)
class SourceMetrics:
    """Metrics of one source configuration.

    Widths are in rad/s (twice the marginal std). Rates are relative to the
    reference configuration and are NaN when not computed.
    """

    r: float
    width_s: float
    width_i: float
    rate_c: float
    rate_s: float
    rate_i: float
    eta: float
    backend: str
    converged: bool = True
    config: dict = field(default_factory=dict)

    def _values(self) -> dict:
        return {
            "backend": self.backend,
            "r": self.r,
            "width_s": self.width_s,
            "width_i": self.width_i,
            "Rc_rel": self.rate_c,
            "Rs_rel": self.rate_s,
            "Ri_rel": self.rate_i,
            "eta": self.eta,
            "converged": int(self.converged),
        }

    def to_record(self) -> str:
        """``key = value`` lines, configuration echo first."""
        lines = [f"{k} = {_fmt(v)}" for k, v in sorted(self.config.items())]
        lines += [f"{k} = {_fmt(v)}" for k, v in self._values().items()]
        return "\n".join(lines) + "\n"

    @staticmethod
    def csv_header() -> str:
        return ",".join(RECORD_KEYS)

    def to_csv_row(self) -> str:
        return ",".join(_fmt(v) for v in self._values().values())


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def config_echo(crystal: CrystalConfig, pump: PumpConfig, collection: CollectionConfig) -> dict:
    return {
        "L_mm": float(crystal.length * 1e3),
        "tau_fwhm_fs": float(pump.tau_fwhm * 1e15),
        "wp_um": float(pump.waist * 1e6),
        "wf_um": float(collection.waist * 1e6),
    }


def evaluate_source(crystal: CrystalConfig, pump: PumpConfig, collection: CollectionConfig,
                    backend: str = "numeric", rule=None, n: int = DEFAULT_GRID_POINTS,
                    rates: bool = True, reduced: bool = False,
                    rate_points: int = RATE_GRID_POINTS) -> SourceMetrics:
    """Compute every figure of merit for one configuration.

    The analytic backend gives r and widths from the closed form; its rates
    are reported as NaN since the Gaussian model has no absolute scale.
    """
    echo = config_echo(crystal, pump, collection)
    nan = float("nan")
    if backend == "analytic":
        coeffs = taylor_coefficients(crystal, pump.omega0)
        sig = sigma_plus(coeffs, collection, crystal)
        width = analytic_marginal_width(pump.tau, sig.value)
        return SourceMetrics(pearson_r_analytic(pump.tau, sig.value), width, width,
                             nan, nan, nan, nan, "analytic", True, echo)
    if backend != "numeric":
        raise ValueError(f"unknown backend {backend!r}")
    grid = default_frequency_grid(crystal, pump, collection, n)
    psi = biphoton_numeric(grid, crystal, pump, collection, rule, reduced)
    r = pearson_r_grid(psi)
    ws, wi = marginal_widths_grid(psi)
    rc = rs = ri = eta = nan
    if rates:
        rgrid = rate_grid(crystal, pump, collection, rate_points)
        ref = reference_rate(rule, reduced, rate_points, omega0=pump.omega0)
        rc = rate_coupled_absolute(crystal, pump, collection, rule, rgrid, reduced) / ref
        rs = rate_single_absolute("signal", crystal, pump, collection, rule, rgrid, reduced) / ref
        ri = rate_single_absolute("idler", crystal, pump, collection, rule, rgrid, reduced) / ref
        eta = coupling_efficiency(rc, rs, ri)
    return SourceMetrics(r, ws, wi, rc, rs, ri, eta, "numeric", psi.converged, echo)


def analytic_state(crystal: CrystalConfig, pump: PumpConfig, collection: CollectionConfig,
                   grid: Optional[FrequencyGrid] = None,
                   n: int = DEFAULT_GRID_POINTS) -> BiphotonGrid:
    """Closed-form state on the default grid of this configuration."""
    coeffs = taylor_coefficients(crystal, pump.omega0)
    sig = sigma_plus(coeffs, collection, crystal)
    grid = default_frequency_grid(crystal, pump, collection, n) if grid is None else grid
    return biphoton_analytic(grid, pump, sig)
