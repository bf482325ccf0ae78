"""Effective phase-matching function and joint spectral amplitude.

Two backends produce a :class:`BiphotonGrid`:

* ``numeric``: transverse overlap of Gaussian pump and fibre modes with the
  exact sinc and the exact mismatch, integrated by tensor Gauss-Hermite
  quadrature.
* ``analytic``: the closed Gaussian form with width ``sigma_plus``.

A ``taylor`` debug backend keeps the exact sinc but uses the first-order
mismatch, so each approximation on the way to the closed form can be
examined on its own.

Gaussian modes are written in transverse-wavevector space as
``exp(-w^2 kappa^2 / 4)``, the angular spectrum of a beam whose intensity
falls to 1/e^2 at radius ``w``. All modes are normalised to unit power.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
import numpy as np

from spdcsim.dispersion import EXTRAORDINARY, CrystalConfig, emission_kx, kz_component
from spdcsim.errors import DomainError
from spdcsim.numerics import FrequencyGrid, QuadratureRule, hermite_rule, make_frequency_grid
from spdcsim.phasematch import (
    CollectionConfig,
    PumpConfig,
    TaylorCoefficients,
    delta_kz,
    taylor_coefficients,
)

DEFAULT_ORDER = 12
DEFAULT_GRID_POINTS = 256
DEFAULT_GRID_SPAN = 5.0
CONVERGENCE_TOL = 1e-4
BINARY_MAGIC = b"BPG1"
_BLOCK_ELEMENTS = 4_000_000


def mode_coefficient(waist: float) -> float:
    """Exponent coefficient of a Gaussian mode in wavevector space."""
    return waist * waist / 4.0


def pump_spectral_amplitude(omega, pump: PumpConfig):
    """Pump spectral amplitude sqrt(tau) exp(-tau^2 (omega - 2 omega0)^2 / 2)."""
    d = np.asarray(omega, dtype=float) - pump.center
    return np.sqrt(pump.tau) * np.exp(-0.5 * (pump.tau * d) ** 2)


@dataclass(frozen=True)
class SigmaPlus:
    """Closed-form EPMF width and its separate contributions."""

    value: float
    mode_term: float
    length_term: float
    prefactor: float


def _sigma_plus_value(beta: float, d_x: float, wf: float, length: float) -> float:
    return float(np.sqrt((2 * d_x**2 / wf**2 + 5 / length**2) / beta**2))


def sigma_plus(coeffs: TaylorCoefficients, collection: CollectionConfig,
               crystal: CrystalConfig) -> SigmaPlus:
    """sigma_+^2 = (2 d_x^2 / w_f^2 + 5 / L^2) / beta^2.

    Raises:
        DomainError: when the symmetrised expansion is not valid for this
            crystal; use the numeric backend instead.
    """
    if not coeffs.symmetric_valid:
        raise DomainError(
            "signal/idler slopes are not symmetric enough for the closed form "
            f"(beta asymmetry {coeffs.beta_asymmetry:.3f}, d asymmetry "
            f"{coeffs.d_asymmetry:.3f}); use the numeric backend"
        )
    mode_term = 2 * coeffs.d_x**2 / collection.waist**2
    length_term = 5 / crystal.length**2
    prefactor = 1 / coeffs.beta**2
    return SigmaPlus(float(np.sqrt(prefactor * (mode_term + length_term))),
                     mode_term, length_term, prefactor)


def analytic_marginal_width(tau: float, sigma: float) -> float:
    """sqrt((1/tau^2 + sigma^2) / 2); twice the std of the |psi|^2 marginal."""
    return float(np.sqrt(0.5 * (1 / tau**2 + sigma**2)))


def default_frequency_grid(crystal: CrystalConfig, pump: PumpConfig,
                           collection: CollectionConfig, n: int = DEFAULT_GRID_POINTS,
                           span: float = DEFAULT_GRID_SPAN) -> FrequencyGrid:
    """Square grid covering ``omega0 +/- span`` standard deviations of the
    analytic marginal of |psi|^2."""
    coeffs = taylor_coefficients(crystal, pump.omega0)
    sigma = _sigma_plus_value(coeffs.beta, coeffs.d_x, collection.waist, crystal.length)
    std = 0.5 * analytic_marginal_width(pump.tau, sigma)
    return make_frequency_grid(pump.omega0, span * std, n)


@dataclass(frozen=True)
class BiphotonGrid:
    """Joint spectral amplitude sampled on a frequency grid.

    ``amplitude`` is real for both backends (the numeric EPMF of this model
    carries no phase) and is scaled to unit norm: sum |psi|^2 dws dwi = 1.
    ``scale`` is the factor that was applied to reach that norm.
    """

    grid: FrequencyGrid
    amplitude: np.ndarray
    backend: str
    omega0: float
    scale: float = 1.0
    normalization: str = "unit-l2"
    converged: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    @property
    def norm(self) -> float:
        return float(self.intensity.sum() * self.grid.cell_area)

    def to_csv(self, path) -> None:
        """Write ``omega_s,omega_i,abs_psi_sq`` rows in row-major order."""
        ws, wi = self.grid.mesh()
        with open(path, "w", newline="\n") as fh:
            fh.write("omega_s,omega_i,abs_psi_sq\n")
            for a, b, p in zip(ws.ravel(), wi.ravel(), self.intensity.ravel()):
                fh.write(f"{a:.9e},{b:.9e},{p:.9e}\n")

    def to_binary(self, path) -> None:
        """Write the amplitude matrix with a ``BPG1`` header (little-endian)."""
        write_binary_grid(path, self.grid, self.amplitude)


def write_binary_grid(path, grid: FrequencyGrid, values: np.ndarray) -> None:
    ns, ni = grid.shape
    header = BINARY_MAGIC + struct.pack(
        "<II4d", ns, ni, grid.omega_s[0], grid.omega_s[-1], grid.omega_i[0], grid.omega_i[-1]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_binary_grid(path):
    """Read a ``BPG1`` file into ``(FrequencyGrid, values)``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != BINARY_MAGIC:
        raise ValueError(f"{path}: not a BPG1 file")
    ns, ni, s0, s1, i0, i1 = struct.unpack_from("<II4d", data, 4)
    offset = 4 + struct.calcsize("<II4d")
    values = np.frombuffer(data, dtype="<f8", count=ns * ni, offset=offset).reshape(ns, ni)
    grid = FrequencyGrid(np.linspace(s0, s1, ns), np.linspace(i0, i1, ni))
    return grid, values.copy()


def _normalized(amplitude: np.ndarray, grid: FrequencyGrid):
    total = float(np.sum(np.abs(amplitude) ** 2) * grid.cell_area)
    if not total > 0:
        return amplitude, 1.0
    scale = 1.0 / np.sqrt(total)
    return amplitude * scale, scale


def biphoton_analytic(grid: FrequencyGrid, pump: PumpConfig, sigma: SigmaPlus) -> BiphotonGrid:
    """Closed Gaussian joint amplitude, normalised on ``grid``."""
    ws, wi = grid.mesh()
    w0 = pump.omega0
    expo = -((ws - wi) ** 2) / (2 * sigma.value**2) - 0.5 * pump.tau**2 * (ws + wi - 2 * w0) ** 2
    amp, scale = _normalized(np.exp(expo), grid)
    return BiphotonGrid(grid, amp, "analytic", w0, scale,
                        meta={"sigma_plus": sigma.value, "tau": pump.tau})


# --- transverse quadrature -------------------------------------------------


@dataclass(frozen=True)
class _Nodes:
    """Transverse offsets (from each arm's centre) and quadrature weights.

    For pair projections ``outer`` has length 1. For single-arm projections
    the node axis is laid out as ``[outer, inner]``.
    """

    qs: np.ndarray  # (M, 2)
    qi: np.ndarray  # (M, 2)
    inner: np.ndarray
    outer: np.ndarray
    constant: float


def _rules(rule, reduced: bool):
    if rule is None:
        rule = hermite_rule(DEFAULT_ORDER)
    if isinstance(rule, QuadratureRule):
        rx = ry = rule
    else:
        rx, ry = rule
    if reduced:
        t, w = np.polynomial.hermite.hermgauss(1)
        ry = QuadratureRule(t, w, 1, "hermite")
    return rx, ry


def _pair_axis(rule: QuadratureRule, a: float, b: float):
    t, w = rule.nodes, rule.weights
    u = t / np.sqrt(a + 2 * b)
    v = t / np.sqrt(a)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(w, w) / np.sqrt(a * (a + 2 * b))
    return ((U + V) / np.sqrt(2)).ravel(), ((U - V) / np.sqrt(2)).ravel(), W.ravel()


def pair_nodes(pump: PumpConfig, collection: CollectionConfig, rule=None,
               reduced: bool = False) -> _Nodes:
    """Nodes for the overlap with both photons projected on the fibre modes."""
    rx, ry = _rules(rule, reduced)
    a = mode_coefficient(collection.waist)
    b = mode_coefficient(pump.waist)
    sx, ix, wx = _pair_axis(rx, a, b)
    sy, iy, wy = _pair_axis(ry, a, b)
    qs = np.stack([np.repeat(sx, sy.size), np.tile(sy, sx.size)], axis=1)
    qi = np.stack([np.repeat(ix, iy.size), np.tile(iy, ix.size)], axis=1)
    weights = np.outer(wx, wy).ravel()
    # unit-power modes: u_s u_i carry 2a/pi, the pump sqrt(2b/pi)
    constant = (2 * a / np.pi) * np.sqrt(2 * b / np.pi)
    return _Nodes(qs, qi, weights, np.ones(1), constant)


def _single_axis(rule: QuadratureRule, a: float, b: float):
    t, w = rule.nodes, rule.weights
    g = a * b / (a + b)
    free = t / np.sqrt(2 * g)
    wout = w / np.sqrt(2 * g)
    coll = t[None, :] / np.sqrt(a + b) - b * free[:, None] / (a + b)
    win = w / np.sqrt(a + b)
    return free, coll, wout, win


def single_arm_nodes(arm: str, pump: PumpConfig, collection: CollectionConfig,
                     rule=None, reduced: bool = False) -> _Nodes:
    """Nodes for ``arm`` projected on its fibre mode, the partner left free.

    The partner offset is integrated against the Gaussian envelope of the
    pump/fibre convolution, which bounds the projected amplitude from above.
    """
    if arm not in ("signal", "idler"):
        raise ValueError(f"arm must be 'signal' or 'idler', got {arm!r}")
    rx, ry = _rules(rule, reduced)
    a = mode_coefficient(collection.waist)
    b = mode_coefficient(pump.waist)
    fx, cx, wox, wix = _single_axis(rx, a, b)
    fy, cy, woy, wiy = _single_axis(ry, a, b)
    nox, nix = cx.shape
    noy, niy = cy.shape
    shape = (nox, noy, nix, niy)
    free_x = np.broadcast_to(fx[:, None, None, None], shape)
    free_y = np.broadcast_to(fy[None, :, None, None], shape)
    coll_x = np.broadcast_to(cx[:, None, :, None], shape)
    coll_y = np.broadcast_to(cy[None, :, None, :], shape)
    free = np.stack([free_x.ravel(), free_y.ravel()], axis=1)
    coll = np.stack([coll_x.ravel(), coll_y.ravel()], axis=1)
    qs, qi = (coll, free) if arm == "signal" else (free, coll)
    constant = (2 * a / np.pi) * (2 * b / np.pi)
    return _Nodes(qs, qi, np.outer(wix, wiy).ravel(), np.outer(wox, woy).ravel(), constant)


# --- grid evaluation -------------------------------------------------------


def _sinc(x):
    out = np.sin(x)
    nz = x != 0
    np.divide(out, x, out=out, where=nz)
    out[~nz] = 1.0
    return out


def _exact_tables(grid, crystal, omega0, nodes):
    kx0 = emission_kx(crystal, omega0)
    sx = kx0 + nodes.qs[:, 0]
    ix = -kx0 + nodes.qi[:, 0]
    px = nodes.qs[:, 0] + nodes.qi[:, 0]
    py = nodes.qs[:, 1] + nodes.qi[:, 1]
    ki = kz_component(grid.omega_i[:, None], ix[None, :], nodes.qi[None, :, 1],
                      crystal.idler_polarization, crystal)

    def ks_row(i):
        return kz_component(grid.omega_s[i], sx, nodes.qs[:, 1], crystal.signal_polarization, crystal)

    npump = grid.omega_s.size + grid.omega_i.size - 1
    if grid.shares_spacing and npump * px.size <= 5 * _BLOCK_ELEMENTS:
        step = grid.d_omega_s
        wp = grid.omega_s[0] + grid.omega_i[0] + step * np.arange(npump)
        kp_table = kz_component(wp[:, None], px[None, :], py[None, :], EXTRAORDINARY, crystal)

        def kp_rows(i, j0, j1):
            return kp_table[i + j0:i + j1]
    else:
        def kp_rows(i, j0, j1):
            wp = grid.omega_s[i] + grid.omega_i[j0:j1]
            return kz_component(wp[:, None], px[None, :], py[None, :], EXTRAORDINARY, crystal)

    return ks_row, ki, kp_rows


def _taylor_tables(grid, coeffs: TaylorCoefficients, nodes):
    # dk = kp - ks - ki with kp carrying the residual and ks, ki the slopes
    ki = -(coeffs.beta_i * (grid.omega_i[:, None] - coeffs.omega0)
           + coeffs.d_ix * nodes.qi[None, :, 0])
    base = -coeffs.d_sx * nodes.qs[:, 0]

    def ks_row(i):
        return base - coeffs.beta_s * (grid.omega_s[i] - coeffs.omega0)

    def kp_rows(i, j0, j1):
        return np.full((j1 - j0, 1), coeffs.residual)

    return ks_row, ki, kp_rows


def _overlap_grid(grid: FrequencyGrid, crystal: CrystalConfig, omega0: float, nodes: _Nodes,
                  power: bool, phase_model: str = "exact", sinc_model: str = "exact"):
    """Sum sinc(dk L / 2) over the transverse nodes for every grid cell.

    With ``power=False`` returns the pair overlap; with ``power=True`` returns
    sum_outer w_o (sum_inner w_i sinc)^2 for a single-arm projection. The
    mode normalisation constant is applied.
    """
    if phase_model == "exact":
        ks_row, ki, kp_rows = _exact_tables(grid, crystal, omega0, nodes)
    elif phase_model == "taylor":
        coeffs = taylor_coefficients(crystal, omega0)
        ks_row, ki, kp_rows = _taylor_tables(grid, coeffs, nodes)
    else:
        raise ValueError(f"unknown phase model {phase_model!r}")
    if sinc_model == "exact":
        kernel = _sinc
    elif sinc_model == "gaussian":
        def kernel(x):
            return np.exp(-x * x / 5.0)
    else:
        raise ValueError(f"unknown sinc model {sinc_model!r}")

    half_l = 0.5 * crystal.length
    n_s, n_i = grid.shape
    m = nodes.qs.shape[0]
    block = max(1, min(n_i, _BLOCK_ELEMENTS // m))
    n_out, n_in = nodes.outer.size, nodes.inner.size
    out = np.empty((n_s, n_i))
    for i in range(n_s):
        ks = ks_row(i)
        for j0 in range(0, n_i, block):
            j1 = min(n_i, j0 + block)
            arg = kp_rows(i, j0, j1) - ki[j0:j1] - ks
            arg *= half_l
            s = kernel(arg)
            if power:
                amp = s.reshape(j1 - j0, n_out, n_in) @ nodes.inner
                out[i, j0:j1] = (amp * amp) @ nodes.outer
            else:
                out[i, j0:j1] = s @ nodes.inner
    return out * nodes.constant


def epmf_grid(grid: FrequencyGrid, crystal: CrystalConfig, pump: PumpConfig,
              collection: CollectionConfig, rule=None, reduced: bool = False,
              phase_model: str = "exact", sinc_model: str = "exact") -> np.ndarray:
    """Effective phase-matching function on ``grid`` (unit-power modes, no L factor)."""
    nodes = pair_nodes(pump, collection, rule, reduced)
    return _overlap_grid(grid, crystal, pump.omega0, nodes, False, phase_model, sinc_model)


def single_arm_grid(arm: str, grid: FrequencyGrid, crystal: CrystalConfig, pump: PumpConfig,
                    collection: CollectionConfig, rule=None, reduced: bool = False) -> np.ndarray:
    """Transverse-integrated power with only ``arm`` projected (no L factor)."""
    nodes = single_arm_nodes(arm, pump, collection, rule, reduced)
    return _overlap_grid(grid, crystal, pump.omega0, nodes, True)


def epmf_numeric(ws, wi, crystal: CrystalConfig, pump: PumpConfig,
                 collection: CollectionConfig, rule=None, reduced: bool = False) -> float:
    """EPMF at a single frequency pair by direct quadrature."""
    nodes = pair_nodes(pump, collection, rule, reduced)
    kx0 = emission_kx(crystal, pump.omega0)
    dk = delta_kz(ws, wi, (kx0 + nodes.qs[:, 0], nodes.qs[:, 1]),
                  (-kx0 + nodes.qi[:, 0], nodes.qi[:, 1]), crystal)
    return float(nodes.constant * np.dot(_sinc(0.5 * crystal.length * dk), nodes.inner))


def epmf_convergence(crystal: CrystalConfig, pump: PumpConfig, collection: CollectionConfig,
                     rule=None, reduced: bool = False) -> float:
    """Relative change of the EPMF at the degenerate point when the order doubles."""
    rx, ry = _rules(rule, reduced)
    w0 = pump.omega0
    base = epmf_numeric(w0, w0, crystal, pump, collection, (rx, ry), reduced)
    ry2 = ry if reduced else hermite_rule(2 * ry.order)
    fine = epmf_numeric(w0, w0, crystal, pump, collection, (hermite_rule(2 * rx.order), ry2), reduced)
    return abs(fine - base) / abs(fine)


def biphoton_numeric(grid: FrequencyGrid, crystal: CrystalConfig, pump: PumpConfig,
                     collection: CollectionConfig, rule=None, reduced: bool = False,
                     phase_model: str = "exact", sinc_model: str = "exact",
                     check_convergence: bool = True) -> BiphotonGrid:
    """Joint amplitude A_p(ws + wi) * EPMF(ws, wi), normalised on ``grid``."""
    theta = epmf_grid(grid, crystal, pump, collection, rule, reduced, phase_model, sinc_model)
    ws, wi = grid.mesh()
    amp, scale = _normalized(pump_spectral_amplitude(ws + wi, pump) * theta, grid)
    converged = True
    meta = {"tau": pump.tau, "phase_model": phase_model, "sinc_model": sinc_model}
    if check_convergence:
        change = epmf_convergence(crystal, pump, collection, rule, reduced)
        converged = change < CONVERGENCE_TOL
        meta["order_doubling_change"] = change
    backend = "numeric" if (phase_model, sinc_model) == ("exact", "exact") else \
        f"{phase_model}+{sinc_model}-sinc"
    return BiphotonGrid(grid, amp, backend, pump.omega0, scale, converged=converged, meta=meta)


def biphoton_taylor(grid: FrequencyGrid, crystal: CrystalConfig, pump: PumpConfig,
                    collection: CollectionConfig, rule=None) -> BiphotonGrid:
    """Debug backend: first-order mismatch with the exact sinc."""
    return biphoton_numeric(grid, crystal, pump, collection, rule, phase_model="taylor",
                            check_convergence=False)


def epmf_analytic(grid: FrequencyGrid, sigma: SigmaPlus) -> np.ndarray:
    """Closed-form EPMF exp(-(ws - wi)^2 / (2 sigma^2)), peak 1."""
    ws, wi = grid.mesh()
    return np.exp(-((ws - wi) ** 2) / (2 * sigma.value**2))


def relative_l2_difference(a: BiphotonGrid, b: BiphotonGrid) -> float:
    """||(|a| - |b|)|| / ||b|| on a shared grid."""
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid.omega_s, b.grid.omega_s):
        raise ValueError("grids differ")
    da = np.abs(a.amplitude) - np.abs(b.amplitude)
    return float(np.sqrt(np.sum(da**2) / np.sum(np.abs(b.amplitude) ** 2)))
