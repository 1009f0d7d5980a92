"""Run every CLI command on the bundled configs and collect the output bytes."""
from pathlib import Path

from orlicz_lab.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SUITE = [
    ("norm", "norm_power2.json", "csv"),
    ("norm", "norm_power2.json", "json"),
    ("norm", "norm_exp.json", "csv"),
    ("conjugate-table", "conjugate_exp.json", "csv"),
    ("probe", "probe_catalog.json", "csv"),
    ("probe", None, "json"),
    ("verify-theorems", None, "csv"),
    ("solve", "solve_cubic.json", "json"),
    ("solve", "solve_zero.json", "json"),
    ("solve", "solve_adversarial.json", "json"),
]


def run_suite(outdir, seed=0):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    results = {}
    for i, (command, config, ext) in enumerate(SUITE):
        out = outdir / f"{i:02d}_{command}.{ext}"
        argv = [command, "--out", str(out), "--seed", str(seed)]
        if config:
            argv += ["--config", str(CONFIGS / config)]
        code = main(argv)
        results[out.name] = (code, out.read_bytes())
    return results
