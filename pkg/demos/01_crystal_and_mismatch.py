"""Crystal optics behind a degenerate 775 nm -> 1550 + 1550 nm pair source.

Run: python3 demos/01_crystal_and_mismatch.py
"""
# %% [markdown]
# BBO indices and group indices at the pair and pump wavelengths.

# %%
import numpy as np
from scipy.optimize import brentq

from spdcsim.dispersion import BBO_ZHANG, CrystalConfig, emission_kx, omega_from_wavelength
from spdcsim.phasematch import delta_kz, group_index, sinc_gaussian_approx, sinc_pm, taylor_coefficients

crystal = CrystalConfig(2.5e-3)
for lam in (0.775, 1.55):
    print(f"{lam * 1e3:6.0f} nm  n_o = {BBO_ZHANG.n_o(lam):.6f}  n_e = {BBO_ZHANG.n_e(lam):.6f}")
print(f"group index, signal (o) at 1550 nm: {group_index(1.55, 'o', crystal):.6f}")
print(f"group index, idler (e) at 1550 nm:  {group_index(1.55, 'e', crystal):.6f}")

# %% [markdown]
# The cut angle fixes the emission cone. Solving Delta k_z = 0 for the
# degenerate pair gives the external half-opening angle.

# %%
omega0 = omega_from_wavelength(1550e-9)


def mismatch(angle_deg):
    c = CrystalConfig(crystal.length, emission_angle=np.deg2rad(angle_deg))
    kx = emission_kx(c, omega0)
    return float(delta_kz(omega0, omega0, (kx, 0.0), (-kx, 0.0), c))


print(f"mismatch at the nominal 3 deg: {mismatch(3.0):.3f} rad/m")
print(f"phase-matched external angle: {brentq(mismatch, 2.0, 4.0, xtol=1e-12):.4f} deg")

# %% [markdown]
# First-order expansion of the mismatch. The signal and idler slopes have
# opposite signs, which is what lets the pair spectrum tilt either way.

# %%
c = taylor_coefficients(crystal, omega0)
print(f"beta_s = {c.beta_s:.4e} s/m   beta_i = {c.beta_i:.4e} s/m")
print(f"d_sx = {c.d_sx:.4f}   d_ix = {c.d_ix:.4f}   (walk-off slopes)")
print(f"symmetrised beta = {c.beta:.4e} s/m, d_x = {c.d_x:.4f}")
print(f"asymmetry: beta {c.beta_asymmetry:.3f}, d {c.d_asymmetry:.3f}")

# %% [markdown]
# The Gaussian stand-in for the sinc that makes a closed form possible.

# %%
x = np.linspace(-2, 2, 4001)
print(f"max |sinc - exp(-x^2/5)| on |x| <= 2: {np.max(np.abs(sinc_pm(x) - sinc_gaussian_approx(x))):.4f}")
