"""Compare the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--cells 64] [--rows 200] [--repeat 3]

Times batch Luxemburg norms, single Orlicz norms and modular evaluation for
each catalog N-function, and reports the largest relative disagreement.
"""
import argparse
import time

import numpy as np

from orlicz_lab import _core, nfunction as nf
from orlicz_lab.measure import MeasureSpace
from orlicz_lab.modular import luxemburg_norms, modular, orlicz_norm


def best_of(repeat, fn):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--cells", type=int, default=64)
    ap.add_argument("--rows", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if "cython" not in _core.BACKENDS:
        raise SystemExit("compiled extension not built; run pip install -e . first")

    rng = np.random.default_rng(0)
    w = rng.uniform(0.2, 1.0, args.cells)
    space = MeasureSpace(w / w.sum())
    X = rng.standard_normal((args.rows, args.cells)) * np.exp(rng.uniform(-2, 2, (args.rows, 1)))

    tasks = {
        "luxemburg_batch": lambda M: luxemburg_norms(M, space, X),
        "orlicz_x20": lambda M: np.array([orlicz_norm(M, space, x) for x in X[:20]]),
        "modular_x200": lambda M: np.array([modular(M, space, x) for x in X]),
    }
    print(f"{'nfunction':<18}{'task':<17}{'python s':>10}{'cython s':>10}{'speedup':>9}"
          f"{'max rel diff':>14}")
    for name, M in nf.catalog(2.0).items():
        for task, fn in tasks.items():
            res = {}
            for backend in ("python", "cython"):
                with _core.use_backend(backend):
                    res[backend] = best_of(args.repeat, lambda: fn(M))
            (tp, vp), (tc, vc) = res["python"], res["cython"]
            fin = np.isfinite(vp) & np.isfinite(vc)
            diff = float(np.max(np.abs(vp[fin] - vc[fin]) / np.maximum(np.abs(vp[fin]), 1e-300)))
            print(f"{name:<18}{task:<17}{tp:>10.4f}{tc:>10.4f}{tp / tc:>8.1f}x{diff:>14.1e}")


if __name__ == "__main__":
    main()
