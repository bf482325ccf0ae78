"""Refractive indices and longitudinal wavevectors in BBO.

Frame convention used throughout the package: the pump propagates along
+z. The optic axis lies in the y-z plane at ``cut_angle`` from z, so
extraordinary beams walk off along y. Signal and idler are collected at
the two crossing points of the o- and e-emission cones, which lie in the
x-z plane: the signal is centred on transverse wavevector (+k_x0, 0) and
the idler on (-k_x0, 0).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from spdcsim.errors import ConfigError, DomainError

ORDINARY = "o"
EXTRAORDINARY = "e"


@dataclass(frozen=True)
class SellmeierModel:
    """Extended Sellmeier formula for a uniaxial crystal.

    Each index uses ``n^2 = A + B / (lam^2 - C) + D lam^2 + E lam^4 + F lam^6``
    with ``lam`` in micrometres. The tuples hold ``(A, B, C, D, E, F)``.
    """

    name: str
    ordinary: tuple[float, float, float, float, float, float]
    extraordinary: tuple[float, float, float, float, float, float]
    window_um: tuple[float, float]
    reference: str = ""

    def _check(self, lam_um):
        lam = np.asarray(lam_um, dtype=float)
        lo, hi = self.window_um
        if not np.all(np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
            raise DomainError(
                f"wavelength outside the {self.name} validity window "
                f"[{lo}, {hi}] um"
            )
        return lam

    @staticmethod
    def _evaluate(coeffs, lam):
        a, b, c, d, e, f = coeffs
        l2 = lam * lam
        return np.sqrt(a + b / (l2 - c) + d * l2 + e * l2**2 + f * l2**3)

    def n_o(self, lam_um):
        return self._evaluate(self.ordinary, self._check(lam_um))

    def n_e(self, lam_um):
        return self._evaluate(self.extraordinary, self._check(lam_um))


# D. Zhang, Y. Kong, J.-Y. Zhang, Opt. Commun. 184, 485 (2000), as tabulated
# on refractiveindex.info (BaB2O4, Zhang-o / Zhang-e).
BBO_ZHANG = SellmeierModel(
    name="BBO-Zhang2000",
    ordinary=(2.7359, 0.01878, 0.01822, -0.01471, 0.0006081, -0.0000674),
    extraordinary=(2.3753, 0.01224, 0.01667, -0.01627, 0.0005716, -0.00006305),
    window_um=(0.64, 3.18),
    reference="D. Zhang, Y. Kong, J.-Y. Zhang, Opt. Commun. 184, 485 (2000)",
)


@dataclass(frozen=True)
class CrystalConfig:
    """BBO crystal geometry.

    Args:
        length: crystal length L in metres.
        cut_angle: angle between the optic axis and the pump axis (rad).
        emission_angle: external half-angle of the collected signal/idler
            directions (rad).
        signal_polarization: ``"o"`` (default) or ``"e"``; the idler takes
            the other one. The pump is always extraordinary (type II).
        sellmeier: dispersion model.
    """

    length: float
    cut_angle: float = np.deg2rad(29.68)
    emission_angle: float = np.deg2rad(3.0)
    signal_polarization: str = ORDINARY
    sellmeier: SellmeierModel = field(default=BBO_ZHANG)
    pm_type: str = "II"

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError(f"crystal length must be positive, got {self.length}")
        if not 0 < self.cut_angle < np.pi / 2:
            raise ConfigError(f"cut angle must lie in (0, pi/2), got {self.cut_angle}")
        if not self.emission_angle >= 0:
            raise ConfigError("emission angle must be non-negative")
        if self.signal_polarization not in (ORDINARY, EXTRAORDINARY):
            raise ConfigError("signal_polarization must be 'o' or 'e'")
        if self.pm_type != "II":
            raise ConfigError("only type-II phase matching is modelled")

    @property
    def idler_polarization(self) -> str:
        return EXTRAORDINARY if self.signal_polarization == ORDINARY else ORDINARY

    def with_length(self, length: float) -> "CrystalConfig":
        return CrystalConfig(length, self.cut_angle, self.emission_angle,
                             self.signal_polarization, self.sellmeier, self.pm_type)


def wavelength_um(omega):
    """Vacuum wavelength in micrometres for angular frequency ``omega``."""
    return 2 * np.pi * SPEED_OF_LIGHT / np.asarray(omega, dtype=float) * 1e6


def omega_from_wavelength(lam_m):
    return 2 * np.pi * SPEED_OF_LIGHT / lam_m


def index_ordinary(lam_um, model: SellmeierModel = BBO_ZHANG):
    """Ordinary index n_o at wavelength ``lam_um`` (micrometres)."""
    return model.n_o(lam_um)


def index_extraordinary_principal(lam_um, model: SellmeierModel = BBO_ZHANG):
    """Principal extraordinary index n_e (wavevector normal to the optic axis)."""
    return model.n_e(lam_um)


def index_extraordinary(lam_um, theta, model: SellmeierModel = BBO_ZHANG):
    """Extraordinary index for a wavevector at angle ``theta`` to the optic axis."""
    no = model.n_o(lam_um)
    ne = model.n_e(lam_um)
    return (np.cos(theta) ** 2 / no**2 + np.sin(theta) ** 2 / ne**2) ** -0.5


def kz_component(omega, kx, ky, polarization, crystal: CrystalConfig):
    """Longitudinal wavevector k_z (1/m) of a plane wave in the crystal.

    The extraordinary branch is solved exactly from the index ellipsoid for
    the full wavevector (kx, ky, kz), so the angle to the optic axis is
    self-consistent for every transverse component.

    Raises:
        DomainError: if the wave is evanescent or the wavelength is outside
            the Sellmeier window.
    """
    omega = np.asarray(omega, dtype=float)
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    lam = wavelength_um(omega)
    k0 = omega / SPEED_OF_LIGHT
    model = crystal.sellmeier
    if polarization == ORDINARY:
        arg = (model.n_o(lam) * k0) ** 2 - kx**2 - ky**2
        if np.any(arg <= 0):
            raise DomainError("evanescent ordinary wave: |kappa| >= n_o omega / c")
        return np.sqrt(arg)
    if polarization != EXTRAORDINARY:
        raise ValueError(f"unknown polarization {polarization!r}")
    inv_e = 1.0 / model.n_e(lam) ** 2
    diff = 1.0 / model.n_o(lam) ** 2 - inv_e
    s, co = np.sin(crystal.cut_angle), np.cos(crystal.cut_angle)
    a = inv_e + diff * co**2
    b = 2.0 * diff * s * co * ky
    cc = inv_e * (kx**2 + ky**2) + diff * s**2 * ky**2 - k0**2
    disc = b * b - 4.0 * a * cc
    if np.any(disc <= 0):
        raise DomainError("evanescent extraordinary wave for the given transverse wavevector")
    kz = (np.sqrt(disc) - b) / (2.0 * a)
    if np.any(kz <= 0):
        raise DomainError("no forward-propagating extraordinary solution")
    return kz


def emission_kx(crystal: CrystalConfig, omega0: float) -> float:
    """Transverse wavevector of the signal collection direction.

    Transverse momentum is continuous across the exit face, so the value
    equals ``omega0 / c * sin(external angle)`` for either polarization.
    """
    return float(omega0 / SPEED_OF_LIGHT * np.sin(crystal.emission_angle))


def internal_angle(crystal: CrystalConfig, omega0: float, polarization: str) -> float:
    """Internal propagation angle (rad) of the collected beam, from Snell's law."""
    kx = emission_kx(crystal, omega0)
    kz = kz_component(omega0, kx, 0.0, polarization, crystal)
    return float(np.arctan2(kx, kz))
