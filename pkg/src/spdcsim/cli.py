"""Command-line front end.

Exit codes: 0 success, 1 configuration, 2 domain or physics, 3 quadrature
convergence, 4 file I/O.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional

from spdcsim import __version__
from spdcsim.biphoton import (
    DEFAULT_ORDER,
    biphoton_analytic,
    biphoton_numeric,
    default_frequency_grid,
    sigma_plus,
)
from spdcsim.config import BACKENDS, MODES, RunConfig, parse_config
from spdcsim.errors import ConfigError, ConvergenceError, DomainError
from spdcsim.metrics import evaluate_source
from spdcsim.numerics import hermite_rule
from spdcsim.phasematch import taylor_coefficients
from spdcsim.svg import render_grid_svg, render_sweep_svg
from spdcsim.sweep import SweepAborted, recipe_lookup, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

log = logging.getLogger("spdcsim")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spdcsim", description="Spectral correlations of type-II BBO pair sources.")
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--mode", choices=MODES, help="overrides the mode in the file")
    p.add_argument("--out", help="output directory (overrides out_dir)")
    p.add_argument("--backend", choices=BACKENDS, help="overrides the backend in the file")
    p.add_argument("--quad-order", type=int, help="Gauss-Hermite order per dimension")
    p.add_argument("--verbose", action="store_true", help="progress messages on stderr")
    return p


def _backends(config: RunConfig) -> tuple[str, ...]:
    return ("analytic", "numeric") if config.backend == "both" else (config.backend,)


class _Outputs:
    """Tracks written files for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[Path] = []

    def write_text(self, name: str, text: str) -> Path:
        path = self.root / name
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        self.files.append(path)
        return path

    def add(self, name: str) -> Path:
        path = self.root / name
        self.files.append(path)
        return path


def _rule(config: RunConfig):
    return hermite_rule(config.quad_order or DEFAULT_ORDER)


def _run_point(config: RunConfig, out: _Outputs) -> None:
    crystal, pump, collection = config.crystal(), config.pump(), config.collection()
    for backend in _backends(config):
        m = evaluate_source(crystal, pump, collection, backend, _rule(config), config.grid_points)
        if not m.converged:
            raise ConvergenceError("transverse quadrature did not converge; raise --quad-order")
        record = m.to_record()
        out.write_text(f"point_{backend}.txt", record)
        sys.stdout.write(record)


def _run_grid(config: RunConfig, out: _Outputs) -> None:
    crystal, pump, collection = config.crystal(), config.pump(), config.collection()
    grid = default_frequency_grid(crystal, pump, collection, config.grid_points)
    for backend in _backends(config):
        if backend == "analytic":
            coeffs = taylor_coefficients(crystal, pump.omega0)
            psi = biphoton_analytic(grid, pump, sigma_plus(coeffs, collection, crystal))
        else:
            psi = biphoton_numeric(grid, crystal, pump, collection, _rule(config))
            if not psi.converged:
                raise ConvergenceError("transverse quadrature did not converge; raise --quad-order")
        psi.to_csv(out.add(f"grid_{backend}.csv"))
        psi.to_binary(out.add(f"grid_{backend}.bpg"))
        svg = render_grid_svg(psi, pump.tau, title=f"|psi| ({backend})")
        out.write_text(f"grid_{backend}.svg", svg)


def _progress(i, j, m):
    status = "failed" if m is None else f"r={m.r:.4f} eta={m.eta:.4f}"
    log.info("cell (%d, %d): %s", i, j, status)


def _run_sweep(config: RunConfig, out: _Outputs) -> None:
    for backend in _backends(config):
        result = run_sweep(config.sweep_plan(backend), progress=_progress)
        for i, j, err in result.failed:
            log.warning("cell (%d, %d) failed: %s", i, j, err)
        out.write_text(f"sweep_{backend}.csv", result.to_csv())
        out.write_text(f"sweep_{backend}.svg", render_sweep_svg(result))


def _run_recipe(config: RunConfig, out: _Outputs) -> None:
    result = run_sweep(config.sweep_plan("numeric", metrics="all"), progress=_progress)
    out.write_text("sweep_numeric.csv", result.to_csv())
    recipe = recipe_lookup(result, config.target_r, config.tolerance)
    record = recipe.to_record()
    out.write_text("recipe.txt", record)
    sys.stdout.write(record)


RUNNERS = {"point": _run_point, "grid": _run_grid, "sweep": _run_sweep, "recipe": _run_recipe}


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(config: RunConfig, out: _Outputs, started: float, seconds: float) -> Path:
    """Write ``manifest.json`` describing this run. Called last."""
    files = sorted(set(out.files))
    manifest = {
        "tool": "spdcsim",
        "version": __version__,
        "sellmeier": config.sellmeier,
        "config": config.as_dict(),
        "wavelength_axis": "lambda = 2 pi c / omega, in nm",
        "started_unix": round(started, 3),
        "wall_seconds": round(seconds, 3),
        "outputs": [{"path": p.name, "bytes": p.stat().st_size, "sha256": sha256_file(p)}
                    for p in files],
    }
    path = out.root / "manifest.json"
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run(config: RunConfig) -> Path:
    """Execute ``config`` and return the manifest path."""
    root = Path(config.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    out = _Outputs(root)
    started = time.time()
    t0 = time.perf_counter()
    RUNNERS[config.mode](config, out)
    return write_manifest(config, out, started, time.perf_counter() - t0)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = parse_config(args.config)
    changes = {}
    if args.mode:
        changes["mode"] = args.mode
    if args.out:
        changes["out_dir"] = args.out
    if args.backend:
        changes["backend"] = args.backend
    if args.quad_order is not None:
        if args.quad_order < 2:
            raise ConfigError("--quad-order must be at least 2")
        changes["quad_order"] = args.quad_order
    return config.replace(**changes) if changes else config


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        config = resolve_config(args)
        manifest = run(config)
        log.info("manifest written to %s", manifest)
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, SweepAborted) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
