"""Driving the command-line tool from configuration files.

Equivalent shell commands:

    spdcsim --config demos/thin_crystal.cfg --out demo_out/point
    spdcsim --config demos/thin_crystal.cfg --mode grid --out demo_out/grid
    spdcsim --config demos/recipe.cfg --out demo_out/recipe --verbose

Every run ends with ``manifest.json`` listing each output with its SHA-256.

Run: python3 demos/04_command_line.py
"""
# %%
import json
from pathlib import Path

from spdcsim.cli import main

here = Path(__file__).parent
runs = {
    "point": ["--config", str(here / "thin_crystal.cfg"), "--out", "demo_out/point"],
    "grid": ["--config", str(here / "thin_crystal.cfg"), "--mode", "grid", "--out", "demo_out/grid"],
    "recipe": ["--config", str(here / "recipe.cfg"), "--out", "demo_out/recipe"],
}
for name, argv in runs.items():
    code = main(argv)
    manifest = json.loads((Path(argv[argv.index("--out") + 1]) / "manifest.json").read_text())
    files = ", ".join(o["path"] for o in manifest["outputs"])
    print(f"[{name}] exit {code}, {manifest['wall_seconds']:.1f} s: {files}")

# %% [markdown]
# A broken file is rejected with every problem listed at once (exit code 1).

# %%
bad = Path("demo_out/bad.cfg")
bad.write_text("[crystal]\nL_mm = -1\n[pump]\ntau_fwhm_fs = 50 ps\n")
print("exit", main(["--config", str(bad)]))
