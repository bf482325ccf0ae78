import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spdcsim.dispersion import CrystalConfig
from spdcsim.phasematch import CollectionConfig, PumpConfig

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def omega0():
    return PumpConfig(1e-13, 1e-4).omega0


@pytest.fixture
def thin_pulsed():
    """1 mm crystal, 50 fs pulse, w_p = 100 um, w_f = 440 um."""
    return CrystalConfig(1e-3), PumpConfig.from_fwhm(50e-15, 100e-6), CollectionConfig(440e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary."""

    def record(name: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
