import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.constants import c

from spdcsim.dispersion import CrystalConfig, emission_kx, kz_component, omega_from_wavelength
from spdcsim.errors import ConfigError
from spdcsim.phasematch import (
    CollectionConfig,
    FWHM_TO_TAU,
    PumpConfig,
    TaylorCoefficients,
    delta_kz,
    group_index,
    sinc_gaussian_approx,
    sinc_pm,
    taylor_coefficients,
)

OMEGA0 = omega_from_wavelength(1550e-9)

# 40-digit mpmath derivatives of an independent mismatch implementation
ORACLE_SLOPES = {
    "beta_s": -5.720584917150665e-11,
    "beta_i": 4.233917383394046e-11,
    "d_sx": 0.03180196961352150,
    "d_ix": -0.03610101981987287,
    "d_sy": 0.06472349736617734,
    "d_iy": -1.896641199380585e-4,
}


def test_slopes_match_oracle():
    coeffs = taylor_coefficients(CrystalConfig(7.5e-3), OMEGA0)
    for name, expected in ORACLE_SLOPES.items():
        tol = 1e-6 if name != "d_iy" else 1e-4
        assert getattr(coeffs, name) == pytest.approx(expected, rel=tol), name
    assert coeffs.residual == pytest.approx(-17.47910633782370, rel=1e-9)


def test_sign_pattern_and_symmetrisation():
    coeffs = taylor_coefficients(CrystalConfig(7.5e-3), OMEGA0)
    assert coeffs.beta_s * coeffs.beta_i < 0
    assert coeffs.d_sx * coeffs.d_ix < 0
    assert coeffs.beta == pytest.approx(-np.sqrt(abs(coeffs.beta_s * coeffs.beta_i)))
    assert coeffs.d_x == pytest.approx(np.sqrt(abs(coeffs.d_sx * coeffs.d_ix)))
    assert coeffs.beta_asymmetry == pytest.approx(0.2599, abs=1e-3)
    assert coeffs.d_asymmetry == pytest.approx(0.1191, abs=1e-3)
    assert coeffs.symmetric_valid


def test_strict_threshold_flags_asymmetry():
    with pytest.warns(UserWarning, match="symmetrised expansion"):
        coeffs = taylor_coefficients(CrystalConfig(7.5e-3), OMEGA0, threshold=0.15)
    assert not coeffs.symmetric_valid


def test_step_halving_changes_slopes_little():
    crystal = CrystalConfig(7.5e-3)
    a = taylor_coefficients(crystal, OMEGA0, 1e-4)
    b = taylor_coefficients(crystal, OMEGA0, 5e-5)
    for name in ("beta_s", "beta_i", "d_sx", "d_ix"):
        assert abs(getattr(a, name) / getattr(b, name) - 1) < 1e-3


def test_beta_difference_matches_group_indices():
    # beta_i - beta_s = (k_s' - k_i') = (n_g,o - n_g,e) / c up to the small emission tilt
    crystal = CrystalConfig(7.5e-3)
    coeffs = taylor_coefficients(crystal, OMEGA0)
    dng = group_index(1.55, "o", crystal) - group_index(1.55, "e", crystal)
    assert coeffs.beta_i - coeffs.beta_s == pytest.approx(dng / c, rel=1e-2)


@pytest.mark.parametrize("lam, pol, expected", [
    (1.55, "o", 1.670238647927008),
    (1.55, "e", 1.640277084750778),
    (0.775, "e", 1.653933163028996),
])
def test_group_index_matches_oracle(lam, pol, expected):
    assert group_index(lam, pol, CrystalConfig(1e-3)) == pytest.approx(expected, rel=1e-12)


def test_operating_point_is_phase_matched():
    crystal = CrystalConfig(7.5e-3)
    kx0 = emission_kx(crystal, OMEGA0)
    dk = float(delta_kz(OMEGA0, OMEGA0, (kx0, 0.0), (-kx0, 0.0), crystal))
    assert abs(dk) * crystal.length / 2 < 1


def test_large_detuning_is_far_from_phase_matching():
    crystal = CrystalConfig(7.5e-3)
    kx0 = emission_kx(crystal, OMEGA0)
    dk = float(delta_kz(1.2 * OMEGA0, 0.8 * OMEGA0, (kx0, 0.0), (-kx0, 0.0), crystal))
    assert abs(dk) * crystal.length / 2 > 50
    assert abs(dk) == pytest.approx(22985.1467, rel=1e-6)


def test_exchange_keeps_pump_term():
    crystal = CrystalConfig(7.5e-3)
    swapped = CrystalConfig(7.5e-3, signal_polarization="e")
    ws, wi = 1.01 * OMEGA0, 0.99 * OMEGA0
    ks, ki = (2.1e5, 3e3), (-2.0e5, -1e3)
    a = delta_kz(ws, wi, ks, ki, crystal)
    b = delta_kz(wi, ws, ki, ks, swapped)
    assert a == pytest.approx(b, rel=1e-14)
    kp = kz_component(ws + wi, ks[0] + ki[0], ks[1] + ki[1], "e", crystal)
    assert kp - kz_component(ws, *ks, "o", crystal) - kz_component(wi, *ki, "e", crystal) == \
        pytest.approx(a, rel=1e-14)


@given(d=st.floats(-1e-3, 1e-3), e=st.floats(-1e-3, 1e-3))
def test_delta_kz_is_continuous(d, e):
    crystal = CrystalConfig(7.5e-3)
    kx0 = emission_kx(crystal, OMEGA0)
    base = float(delta_kz(OMEGA0, OMEGA0, (kx0, 0.0), (-kx0, 0.0), crystal))
    near = float(delta_kz(OMEGA0 * (1 + d * 1e-6), OMEGA0 * (1 + e * 1e-6),
                          (kx0, 0.0), (-kx0, 0.0), crystal))
    assert abs(near - base) < 1.0


def test_first_order_reconstruction_error_is_quadratic():
    crystal = CrystalConfig(7.5e-3)
    coeffs = taylor_coefficients(crystal, OMEGA0)
    kx0 = coeffs.k_sx0

    def error(step):
        dw, dq = 1e-3 * OMEGA0 * step, 1e-2 * kx0 * step
        exact = float(delta_kz(OMEGA0 + dw, OMEGA0 - dw, (kx0 + dq, 0.0), (-kx0 - dq, 0.0), crystal))
        linear = coeffs.residual + coeffs.linear_mismatch(dw, -dw, dq, -dq)
        return abs(exact - linear)

    errs = [error(2.0**-k) for k in range(4)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(3.5 < r < 4.5 for r in ratios), ratios


def test_taylor_is_deterministic():
    a = taylor_coefficients.__wrapped__(CrystalConfig(2e-3), OMEGA0)
    b = taylor_coefficients.__wrapped__(CrystalConfig(2e-3), OMEGA0)
    assert a == b


def test_asymmetry_flags_on_constructed_coefficients():
    good = TaylorCoefficients(-1.0, 1.1, 0.5, -0.45, 0, 0, OMEGA0, 1.0, -1.0, 0.0)
    same_sign = TaylorCoefficients(-1.0, -1.1, 0.5, -0.45, 0, 0, OMEGA0, 1.0, -1.0, 0.0)
    lopsided = TaylorCoefficients(-1.0, 2.0, 0.5, -0.45, 0, 0, OMEGA0, 1.0, -1.0, 0.0)
    assert good.symmetric_valid
    assert not same_sign.symmetric_valid
    assert not lopsided.symmetric_valid


def test_sinc_values():
    assert sinc_pm(0.0) == 1.0
    assert abs(sinc_pm(np.pi)) < 1e-15
    assert sinc_pm(np.pi / 2) == pytest.approx(2 / np.pi, rel=1e-15)


def test_gaussian_sinc_values():
    assert sinc_gaussian_approx(0.0) == 1.0
    assert sinc_gaussian_approx(np.sqrt(5)) == pytest.approx(np.exp(-1), rel=1e-15)


def test_gaussian_sinc_error_bound():
    x = np.linspace(-2, 2, 40001)
    err = np.max(np.abs(sinc_pm(x) - sinc_gaussian_approx(x)))
    assert err < 0.05
    # frozen from the dense scan
    assert err == pytest.approx(0.028233, abs=1e-5)


def test_pump_config():
    p = PumpConfig.from_fwhm(50e-15, 100e-6)
    assert p.tau == pytest.approx(50e-15 / np.sqrt(8 * np.log(2)), rel=1e-15)
    assert p.tau_fwhm == pytest.approx(50e-15, rel=1e-15)
    assert p.center == 2 * p.omega0
    assert FWHM_TO_TAU == pytest.approx(0.42466, rel=1e-4)


@pytest.mark.parametrize("args", [(0.0, 1e-4), (1e-13, -1.0), (1e-13, 1e-4, 0.0)])
def test_pump_validation(args):
    with pytest.raises(ConfigError):
        PumpConfig(*args)


def test_collection_validation():
    with pytest.raises(ConfigError):
        CollectionConfig(0.0)
