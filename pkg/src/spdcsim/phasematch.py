"""Phase mismatch, its first-order expansion and the longitudinal phase-matching factor."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from spdcsim.dispersion import (
    EXTRAORDINARY,
    CrystalConfig,
    emission_kx,
    kz_component,
    omega_from_wavelength,
)
from spdcsim.errors import ConfigError

FWHM_TO_TAU = 1.0 / np.sqrt(8.0 * np.log(2.0))
DEGENERATE_WAVELENGTH = 1550e-9
DEFAULT_SYMMETRY_THRESHOLD = 0.3


@dataclass(frozen=True)
class PumpConfig:
    """Pulsed Gaussian pump.

    ``omega0`` is the degenerate signal/idler frequency; the pump is centred
    on ``2 * omega0``. ``tau`` is the amplitude duration entering
    ``A_p(w) = sqrt(tau) exp(-tau^2 (w - 2 w0)^2 / 2)`` and ``waist`` is half
    the 1/e^2-intensity beam diameter.
    """

    tau: float
    waist: float
    omega0: float = omega_from_wavelength(DEGENERATE_WAVELENGTH)

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"pulse duration must be positive, got {self.tau}")
        if not self.waist > 0:
            raise ConfigError(f"pump waist must be positive, got {self.waist}")
        if not self.omega0 > 0:
            raise ConfigError("omega0 must be positive")

    @classmethod
    def from_fwhm(cls, tau_fwhm: float, waist: float,
                  wavelength: float = DEGENERATE_WAVELENGTH) -> "PumpConfig":
        return cls(tau_fwhm * FWHM_TO_TAU, waist, omega_from_wavelength(wavelength))

    @property
    def tau_fwhm(self) -> float:
        return self.tau / FWHM_TO_TAU

    @property
    def center(self) -> float:
        return 2.0 * self.omega0


@dataclass(frozen=True)
class CollectionConfig:
    """Gaussian fibre-collection mode, shared by both arms (``waist`` = w_f)."""

    waist: float

    def __post_init__(self):
        if not self.waist > 0:
            raise ConfigError(f"collection waist must be positive, got {self.waist}")


@dataclass(frozen=True)
class TaylorCoefficients:
    """First-order expansion of the phase mismatch around the operating point.

    ``beta_*`` are d(dk)/d(omega) in s/m; ``d_*x`` are d(dk)/d(k_x), and the
    ``d_*y`` walk-off slopes are kept for diagnostics only.
    """

    beta_s: float
    beta_i: float
    d_sx: float
    d_ix: float
    d_sy: float
    d_iy: float
    omega0: float
    k_sx0: float
    k_ix0: float
    residual: float
    threshold: float = DEFAULT_SYMMETRY_THRESHOLD

    @staticmethod
    def _asym(a, b):
        return abs(abs(a) - abs(b)) / max(abs(a), abs(b))

    @property
    def beta_asymmetry(self) -> float:
        return self._asym(self.beta_s, self.beta_i)

    @property
    def d_asymmetry(self) -> float:
        return self._asym(self.d_sx, self.d_ix)

    @property
    def symmetric_valid(self) -> bool:
        return (self.beta_s * self.beta_i < 0 and self.d_sx * self.d_ix < 0
                and self.beta_asymmetry <= self.threshold
                and self.d_asymmetry <= self.threshold)

    @property
    def beta(self) -> float:
        """Symmetrised slope, carrying the sign of ``beta_s``."""
        return float(np.sign(self.beta_s) * np.sqrt(abs(self.beta_s * self.beta_i)))

    @property
    def d_x(self) -> float:
        return float(np.sign(self.d_sx) * np.sqrt(abs(self.d_sx * self.d_ix)))

    def linear_mismatch(self, dws, dwi, dqsx, dqix):
        """First-order mismatch for offsets from the expansion point."""
        return (self.beta_s * np.asarray(dws) + self.beta_i * np.asarray(dwi)
                + self.d_sx * np.asarray(dqsx) + self.d_ix * np.asarray(dqix))


def delta_kz(ws, wi, kappa_s, kappa_i, crystal: CrystalConfig):
    """Exact phase mismatch k_pz - k_sz - k_iz (1/m).

    ``kappa_s`` and ``kappa_i`` are (kx, ky) pairs of absolute transverse
    wavevectors; the pump carries their sum. Inputs broadcast.
    """
    ksx, ksy = kappa_s
    kix, kiy = kappa_i
    kp = kz_component(np.add(ws, wi), np.add(ksx, kix), np.add(ksy, kiy),
                      EXTRAORDINARY, crystal)
    ks = kz_component(ws, ksx, ksy, crystal.signal_polarization, crystal)
    ki = kz_component(wi, kix, kiy, crystal.idler_polarization, crystal)
    return kp - ks - ki


@lru_cache(maxsize=64)
def taylor_coefficients(crystal: CrystalConfig, omega0: float, rel_step: float = 1e-4,
                        threshold: float = DEFAULT_SYMMETRY_THRESHOLD) -> TaylorCoefficients:
    """Central finite-difference slopes of ``delta_kz`` at the degenerate point.

    Frequency steps are ``rel_step * omega0``; transverse steps are
    ``rel_step * |k|`` of the beam being displaced.
    """
    kx0 = emission_kx(crystal, omega0)
    ks_c = (kx0, 0.0)
    ki_c = (-kx0, 0.0)
    hw = rel_step * omega0
    k_s = kz_component(omega0, kx0, 0.0, crystal.signal_polarization, crystal)
    k_i = kz_component(omega0, -kx0, 0.0, crystal.idler_polarization, crystal)
    hs = rel_step * float(np.hypot(k_s, kx0))
    hi = rel_step * float(np.hypot(k_i, kx0))

    def dk(dws=0.0, dwi=0.0, sx=0.0, sy=0.0, ix=0.0, iy=0.0):
        return float(delta_kz(omega0 + dws, omega0 + dwi, (kx0 + sx, sy), (-kx0 + ix, iy), crystal))

    coeffs = TaylorCoefficients(
        beta_s=(dk(dws=hw) - dk(dws=-hw)) / (2 * hw),
        beta_i=(dk(dwi=hw) - dk(dwi=-hw)) / (2 * hw),
        d_sx=(dk(sx=hs) - dk(sx=-hs)) / (2 * hs),
        d_ix=(dk(ix=hi) - dk(ix=-hi)) / (2 * hi),
        d_sy=(dk(sy=hs) - dk(sy=-hs)) / (2 * hs),
        d_iy=(dk(iy=hi) - dk(iy=-hi)) / (2 * hi),
        omega0=omega0,
        k_sx0=ks_c[0],
        k_ix0=ki_c[0],
        residual=dk(),
        threshold=threshold,
    )
    if not coeffs.symmetric_valid:
        warnings.warn(
            f"symmetrised expansion is poor here (beta asymmetry "
            f"{coeffs.beta_asymmetry:.3f}, d asymmetry {coeffs.d_asymmetry:.3f})",
            stacklevel=2,
        )
    return coeffs


def group_index(lam_um, polarization, crystal: CrystalConfig, theta=None):
    """Group index n - lam dn/dlam from the analytic Sellmeier derivative.

    For the extraordinary branch ``theta`` is the angle to the optic axis.
    """
    lam = np.asarray(lam_um, dtype=float)
    model = crystal.sellmeier

    def n_and_slope(coeffs):
        a, b, cc, d, e, f = coeffs
        l2 = lam * lam
        n2 = a + b / (l2 - cc) + d * l2 + e * l2**2 + f * l2**3
        dn2 = -2 * b * lam / (l2 - cc) ** 2 + 2 * d * lam + 4 * e * lam**3 + 6 * f * lam**5
        n = np.sqrt(n2)
        return n, dn2 / (2 * n)

    no, dno = n_and_slope(model.ordinary)
    if polarization != EXTRAORDINARY:
        return no - lam * dno
    ne, dne = n_and_slope(model.extraordinary)
    if theta is None:
        theta = crystal.cut_angle
    cs2, sn2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    inv = cs2 / no**2 + sn2 / ne**2
    n = inv ** -0.5
    dinv = -2 * cs2 * dno / no**3 - 2 * sn2 * dne / ne**3
    dn = -0.5 * inv ** -1.5 * dinv
    return n - lam * dn


def sinc_pm(x):
    """sin(x)/x with the removable singularity filled."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def sinc_gaussian_approx(x):
    """Gaussian stand-in for the sinc: exp(-x^2/5)."""
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x / 5.0)

