"""Run configuration files.

Grammar (one item per line)::

    # comment                      full-line comments start with '#' or ';'
    [section]                      one of run, crystal, pump, collection, sweep, recipe
    key = value [unit]             optional unit suffix, must match the key's unit

Keys are unique across sections, so a key written before the first section
header is routed to its own section; a key under the wrong header is an
error. Required keys: ``L_mm``, ``tau_fwhm_fs``, ``wp_um``, ``wf_um``.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from spdcsim.dispersion import BBO_ZHANG, CrystalConfig
from spdcsim.errors import ConfigError
from spdcsim.phasematch import CollectionConfig, PumpConfig
from spdcsim.sweep import Axis, SweepPlan

MODES = ("point", "grid", "sweep", "recipe")
BACKENDS = ("analytic", "numeric", "both")
SECTIONS = ("run", "crystal", "pump", "collection", "sweep", "recipe")
SELLMEIER_SETS = {BBO_ZHANG.name: BBO_ZHANG}

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_VALUE = re.compile(rf"^({_NUMBER})\s*([^\s\d.+-][^\s]*)?$")
_UNIT_ALIASES = {"um": ("um", "µm", "micron"), "mm": ("mm",), "fs": ("fs",), "nm": ("nm",),
                 "deg": ("deg", "°")}


@dataclass(frozen=True)
class _Key:
    section: str
    kind: type
    unit: Optional[str] = None
    positive: bool = True
    choices: Optional[tuple] = None


KEYS = {
    "mode": _Key("run", str, choices=MODES),
    "backend": _Key("run", str, choices=BACKENDS),
    "quad_order": _Key("run", int),
    "grid_points": _Key("run", int),
    "out_dir": _Key("run", str),
    "L_mm": _Key("crystal", float, "mm"),
    "cut_angle_deg": _Key("crystal", float, "deg"),
    "emission_angle_deg": _Key("crystal", float, "deg"),
    "signal_polarization": _Key("crystal", str, choices=("o", "e")),
    "sellmeier": _Key("crystal", str, choices=tuple(SELLMEIER_SETS)),
    "tau_fwhm_fs": _Key("pump", float, "fs"),
    "wp_um": _Key("pump", float, "um"),
    "wavelength_nm": _Key("pump", float, "nm"),
    "wf_um": _Key("collection", float, "um"),
    "wp_diam_start_um": _Key("sweep", float, "um"),
    "wp_diam_stop_um": _Key("sweep", float, "um"),
    "wp_count": _Key("sweep", int),
    "wf_diam_start_um": _Key("sweep", float, "um"),
    "wf_diam_stop_um": _Key("sweep", float, "um"),
    "wf_count": _Key("sweep", int),
    "metrics": _Key("sweep", str, choices=("all", "r")),
    "sweep_order": _Key("sweep", int),
    "sweep_grid_points": _Key("sweep", int),
    "target_r": _Key("recipe", float, positive=False),
    "tolerance": _Key("recipe", float),
}
REQUIRED = ("L_mm", "tau_fwhm_fs", "wp_um", "wf_um")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration. Units follow the key suffixes."""

    L_mm: float
    tau_fwhm_fs: float
    wp_um: float
    wf_um: float
    mode: str = "point"
    backend: str = "numeric"
    quad_order: Optional[int] = None
    grid_points: int = 256
    out_dir: str = "out"
    cut_angle_deg: float = 29.68
    emission_angle_deg: float = 3.0
    signal_polarization: str = "o"
    sellmeier: str = BBO_ZHANG.name
    wavelength_nm: float = 1550.0
    wp_diam_start_um: float = 100.0
    wp_diam_stop_um: float = 700.0
    wp_count: int = 20
    wf_diam_start_um: float = 100.0
    wf_diam_stop_um: float = 700.0
    wf_count: int = 20
    metrics: str = "all"
    sweep_order: int = 8
    sweep_grid_points: int = 48
    target_r: float = 0.0
    tolerance: float = 0.05

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            kdef = KEYS[f.name]
            if value is None:
                continue
            if kdef.choices is not None and value not in kdef.choices:
                raise ConfigError(f"{f.name} must be one of {', '.join(kdef.choices)}, got {value!r}")
            if kdef.kind in (int, float) and not np.isfinite(value):
                raise ConfigError(f"{f.name} must be finite, got {value}")
            if kdef.kind in (int, float) and kdef.positive and not value > 0:
                raise ConfigError(f"{f.name} must be positive, got {value}")
        if not self.out_dir or self.out_dir != self.out_dir.strip() or any(ch in self.out_dir for ch in "#\n"):
            raise ConfigError(f"out_dir {self.out_dir!r} cannot be written to a config file")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be non-negative")

    def crystal(self) -> CrystalConfig:
        return CrystalConfig(self.L_mm * 1e-3, np.deg2rad(self.cut_angle_deg),
                             np.deg2rad(self.emission_angle_deg), self.signal_polarization,
                             SELLMEIER_SETS[self.sellmeier])

    def pump(self) -> PumpConfig:
        return PumpConfig.from_fwhm(self.tau_fwhm_fs * 1e-15, self.wp_um * 1e-6,
                                    self.wavelength_nm * 1e-9)

    def collection(self) -> CollectionConfig:
        return CollectionConfig(self.wf_um * 1e-6)

    def sweep_plan(self, backend: str = "numeric", metrics: Optional[str] = None) -> SweepPlan:
        return SweepPlan(
            self.crystal(), self.pump(),
            Axis(self.wp_diam_start_um, self.wp_diam_stop_um, self.wp_count),
            Axis(self.wf_diam_start_um, self.wf_diam_stop_um, self.wf_count),
            backend=backend, order=self.quad_order or self.sweep_order,
            grid_points=self.sweep_grid_points, metrics=metrics or self.metrics,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _convert(key: str, raw: str, lineno: int):
    kdef = KEYS[key]
    where = f"line {lineno}: {key}"
    if kdef.kind is str:
        return raw
    m = _VALUE.match(raw)
    if m is None:
        raise ConfigError(f"{where}: cannot read {raw!r} as a number with optional unit")
    number, unit = m.groups()
    if unit is not None:
        allowed = _UNIT_ALIASES.get(kdef.unit or "", ())
        if unit not in allowed:
            expected = f"'{kdef.unit}'" if kdef.unit else "no unit"
            raise ConfigError(f"{where}: unit suffix {unit!r} is not valid, expected {expected}")
    if kdef.kind is int:
        value = float(number)
        if value != int(value):
            raise ConfigError(f"{where}: expected an integer, got {number}")
        return int(value)
    return float(number)


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse configuration text. All problems are reported together.

    Raises:
        ConfigError: listing every problem with its line number.
    """
    errors: list[str] = []
    values: dict = {}
    lines_of: dict = {}
    seen: set = set()
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        if stripped.startswith("["):
            name = stripped[1:-1].strip() if stripped.endswith("]") else None
            if name not in SECTIONS:
                errors.append(f"line {lineno}: unknown section {stripped!r}")
                section = None
            else:
                section = name
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, raw = (p.strip() for p in stripped.split("=", 1))
        raw = raw.split("#", 1)[0].strip()
        seen.add(key)
        if key not in KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if section is not None and KEYS[key].section != section:
            errors.append(f"line {lineno}: key {key!r} belongs in [{KEYS[key].section}], not [{section}]")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {lines_of[key]})")
            continue
        try:
            value = _convert(key, raw, lineno)
        except ConfigError as exc:
            errors.append(str(exc))
            continue
        kdef = KEYS[key]
        if kdef.kind in (int, float) and kdef.positive and not value > 0:
            errors.append(f"line {lineno}: {key} must be positive, got {raw}")
            continue
        if kdef.choices is not None and value not in kdef.choices:
            errors.append(f"line {lineno}: {key} must be one of {', '.join(kdef.choices)}, got {raw!r}")
            continue
        values[key] = value
        lines_of[key] = lineno
    for key in REQUIRED:
        if key not in seen:
            errors.append(f"missing required key {key!r} in [{KEYS[key].section}]")
    if errors:
        raise ConfigError(f"{source}:\n  " + "\n  ".join(errors))
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, str(path))


def format_config(config: RunConfig) -> str:
    """Configuration text that :func:`parse_config_text` reads back unchanged."""
    values = config.as_dict()
    out = []
    for section in SECTIONS:
        out.append(f"[{section}]")
        for key, kdef in KEYS.items():
            if kdef.section != section or values[key] is None:
                continue
            v = values[key]
            out.append(f"{key} = {float(v)!r}" if isinstance(v, float) else f"{key} = {v}")
        out.append("")
    return "\n".join(out)


def write_config(config: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_config(config))
