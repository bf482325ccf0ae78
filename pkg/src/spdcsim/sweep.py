"""Maps of r, eta and pair rate over pump and fibre mode diameters."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from spdcsim.contour import marching_squares
from spdcsim.dispersion import CrystalConfig
from spdcsim.errors import ConfigError, SpdcError
from spdcsim.metrics import RATE_GRID_POINTS, evaluate_source
from spdcsim.numerics import hermite_rule
from spdcsim.phasematch import CollectionConfig, PumpConfig

MAX_FAILED_FRACTION = 0.2
SWEEP_ORDER = 8
SWEEP_GRID_POINTS = 48
CSV_HEADER = "wp_um,wf_um,r,eta,Rc_rel,Rs_rel,Ri_rel,converged"
FIELDS = ("r", "eta", "rate_c", "rate_s", "rate_i", "width_s", "width_i")


class SweepAborted(SpdcError, RuntimeError):
    """Too many cells of a sweep failed."""


@dataclass(frozen=True)
class Axis:
    """Diameter axis in micrometres."""

    start: float
    stop: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ConfigError(f"axis needs at least 2 points, got {self.count}")
        if not 0 < self.start < self.stop:
            raise ConfigError(f"axis needs 0 < start < stop, got {self.start}, {self.stop}")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.count))


@dataclass(frozen=True)
class SweepPlan:
    """A rectangular map over pump (2 w_p) and fibre (2 w_f) diameters.

    ``pump`` fixes the pulse; its waist is replaced cell by cell. With
    ``metrics="r"`` the rate integrals are skipped.
    """

    crystal: CrystalConfig
    pump: PumpConfig
    wp_diameters: Axis = Axis(100.0, 700.0, 20)
    wf_diameters: Axis = Axis(100.0, 700.0, 20)
    backend: str = "numeric"
    order: int = SWEEP_ORDER
    grid_points: int = SWEEP_GRID_POINTS
    rate_points: int = RATE_GRID_POINTS
    metrics: str = "all"
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None

    def __post_init__(self):
        if self.backend not in ("numeric", "analytic"):
            raise ConfigError(f"sweep backend must be numeric or analytic, got {self.backend!r}")
        if self.metrics not in ("all", "r"):
            raise ConfigError(f"metrics must be 'all' or 'r', got {self.metrics!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.wp_diameters.count), int(self.wf_diameters.count)

    def cell(self, i: int, j: int) -> tuple[PumpConfig, CollectionConfig]:
        wp = self.wp_diameters.values[i] * 0.5e-6
        wf = self.wf_diameters.values[j] * 0.5e-6
        return PumpConfig(self.pump.tau, wp, self.pump.omega0), CollectionConfig(wf)


@dataclass
class SweepResult:
    """Cell metrics indexed ``[i_wp][j_wf]``; failed cells hold ``None``."""

    plan: SweepPlan
    cells: list
    failed: list = field(default_factory=list)
    cell_seconds: Optional[np.ndarray] = None
    wall_seconds: float = 0.0

    @property
    def wp_diameters(self) -> np.ndarray:
        return self.plan.wp_diameters.values

    @property
    def wf_diameters(self) -> np.ndarray:
        return self.plan.wf_diameters.values

    def field(self, name: str) -> np.ndarray:
        """Matrix of one metric, NaN at failed cells."""
        aliases = {"Rc_rel": "rate_c", "Rs_rel": "rate_s", "Ri_rel": "rate_i"}
        name = aliases.get(name, name)
        if name not in FIELDS:
            raise ValueError(f"unknown field {name!r}")
        out = np.full(self.plan.shape, np.nan)
        for i, row in enumerate(self.cells):
            for j, m in enumerate(row):
                if m is not None:
                    out[i, j] = getattr(m, name)
        return out

    @property
    def converged(self) -> np.ndarray:
        out = np.zeros(self.plan.shape, dtype=bool)
        for i, row in enumerate(self.cells):
            for j, m in enumerate(row):
                out[i, j] = m is not None and m.converged
        return out

    def to_csv(self, path=None) -> str:
        """CSV text (waists in um), rows ordered by w_p then w_f."""
        lines = [CSV_HEADER]
        for i, dp in enumerate(self.wp_diameters):
            for j, df in enumerate(self.wf_diameters):
                m = self.cells[i][j]
                vals = (dp / 2, df / 2) + ((m.r, m.eta, m.rate_c, m.rate_s, m.rate_i)
                                          if m is not None else (np.nan,) * 5)
                conv = int(m is not None and m.converged)
                lines.append(",".join(format(float(v), ".9g") for v in vals) + f",{conv}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        return text


def worker_count() -> int:
    """Workers for cell evaluation, capped by ``SPDC_THREADS``."""
    n = os.cpu_count() or 1
    env = os.environ.get("SPDC_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"SPDC_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ConfigError("SPDC_THREADS must be at least 1")
        n = min(n, cap)
    return n


def _evaluate_cell(plan: SweepPlan, i: int, j: int):
    pump, collection = plan.cell(i, j)
    start = time.perf_counter()
    try:
        rule = hermite_rule(plan.order)
        m = evaluate_source(plan.crystal, pump, collection, plan.backend, rule,
                            plan.grid_points, rates=plan.metrics == "all",
                            rate_points=plan.rate_points)
        return m, None, time.perf_counter() - start
    except SpdcError as exc:
        return None, f"{type(exc).__name__}: {exc}", time.perf_counter() - start


def run_sweep(plan: SweepPlan, workers: Optional[int] = None, progress=None) -> SweepResult:
    """Evaluate every cell of ``plan``.

    Cells that raise a package error are recorded in ``failed`` and left as
    ``None``. Results are assembled in row-major order regardless of the
    worker count, so output is deterministic.

    Raises:
        SweepAborted: once more than 20% of all cells have failed.
    """
    n_wp, n_wf = plan.shape
    total = n_wp * n_wf
    workers = worker_count() if workers is None else max(1, int(workers))
    cells = [[None] * n_wf for _ in range(n_wp)]
    seconds = np.zeros(plan.shape)
    failed = []
    index = [(i, j) for i in range(n_wp) for j in range(n_wf)]
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = pool.map(lambda ij: _evaluate_cell(plan, *ij), index)
        for (i, j), (m, err, dt) in zip(index, results):
            cells[i][j] = m
            seconds[i, j] = dt
            if err is not None:
                failed.append((i, j, err))
                if len(failed) > MAX_FAILED_FRACTION * total:
                    raise SweepAborted(
                        f"{len(failed)} of {total} cells failed; last: {err}")
            if progress is not None:
                progress(i, j, m)
    result = SweepResult(plan, cells, failed, seconds, time.perf_counter() - t0)
    if plan.csv_path:
        result.to_csv(plan.csv_path)
    return result


def extract_contour(result: SweepResult, field_name: str, level: float) -> list[np.ndarray]:
    """Iso-lines of ``r`` or ``eta`` in the (2 w_p, 2 w_f) plane, in um."""
    if field_name not in ("r", "eta"):
        raise ValueError("contours are available for 'r' and 'eta'")
    return marching_squares(result.wp_diameters, result.wf_diameters,
                            result.field(field_name), level)


@dataclass(frozen=True)
class Recipe:
    """Outcome of :func:`recipe_lookup`. Waists are in um."""

    found: bool
    target_r: float
    tolerance: float
    wp_um: float = float("nan")
    wf_um: float = float("nan")
    r: float = float("nan")
    eta: float = float("nan")
    rate_c: float = float("nan")
    nearest_r: float = float("nan")

    def to_record(self) -> str:
        keys = ("found", "target_r", "tolerance", "wp_um", "wf_um", "r", "eta", "Rc_rel",
                "nearest_r")
        vals = (int(self.found), self.target_r, self.tolerance, self.wp_um, self.wf_um,
                self.r, self.eta, self.rate_c, self.nearest_r)
        return "".join(f"{k} = {format(float(v), '.9g')}\n" for k, v in zip(keys, vals))


def recipe_lookup(result: SweepResult, target_r: float, tol: float = 0.05) -> Recipe:
    """Cell with the largest eta among those with ``|r - target_r| <= tol``.

    Ties go to the larger w_f, then the larger w_p. When no cell qualifies the
    result has ``found=False`` and reports the closest achievable r.
    """
    r = result.field("r")
    eta = result.field("eta")
    if not np.any(np.isfinite(r)):
        raise ConfigError("sweep has no valid cells")
    ok = np.isfinite(r) & (np.abs(r - target_r) <= tol)
    if ok.any() and not np.all(np.isfinite(eta[ok])):
        raise ConfigError("recipe lookup needs a sweep with rates (metrics='all')")
    wp = result.wp_diameters / 2
    wf = result.wf_diameters / 2
    best = None
    for i, j in zip(*np.nonzero(ok)):
        key = (eta[i, j], wf[j], wp[i])
        if best is None or key > best[0]:
            best = (key, i, j)
    if best is None:
        dist = np.where(np.isfinite(r), np.abs(r - target_r), np.inf)
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        return Recipe(False, target_r, tol, nearest_r=float(r[i, j]))
    _, i, j = best
    return Recipe(True, target_r, tol, float(wp[i]), float(wf[j]), float(r[i, j]),
                  float(eta[i, j]), float(result.cells[i][j].rate_c), float(r[i, j]))
