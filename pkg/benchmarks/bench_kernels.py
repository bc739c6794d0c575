"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times the two hot kernels (VA visibility over the default trajectory and
rectangular assignment on random association problems) for each available
backend, plus one tracker combination end to end, and prints a table.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from mintloc import _kernels
from mintloc.harness import Geometry, ScenarioConfig


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def visibility_job(mod, geo):
    plan = geo.plan
    segs = plan.segments

    def run():
        for p in geo.trajectory:
            for t in geo.tables:
                mod.visible_mask(p, t.positions, t.seq, t.orders, segs)
    return run


def assignment_job(mod, n=2000, seed=0):
    rng = np.random.default_rng(seed)
    costs = []
    for _ in range(n):
        r = int(rng.integers(1, 15))
        c = int(rng.integers(r, 25))
        costs.append(rng.uniform(0, 1, (r, c)))

    def run():
        for c in costs:
            mod.linear_assignment(c)
    return run


def end_to_end(backend, seed=0):
    """One (Tp = 0.5 ns, obstruction off) combination in a fresh interpreter."""
    env = dict(os.environ)
    if backend == "python":
        env["MINTLOC_PURE_PYTHON"] = "1"
    else:
        env.pop("MINTLOC_PURE_PYTHON", None)
    code = (
        "import time\n"
        "from mintloc.harness import ScenarioConfig, run_combination\n"
        "t0 = time.perf_counter()\n"
        f"run_combination(ScenarioConfig(), 1, False, seed={seed})\n"
        "print(time.perf_counter() - t0)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-end-to-end", action="store_true", help="skip the full tracker run")
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args(argv)

    geo = Geometry.build(ScenarioConfig())
    results = {}
    for name, mod in sorted(_kernels.backends().items()):
        row = {
            "visibility_s": best_of(visibility_job(mod, geo), args.repeat),
            "assignment_s": best_of(assignment_job(mod), args.repeat),
        }
        if not args.no_end_to_end:
            row["combination_s"] = end_to_end(name)
        results[name] = row

    cols = list(next(iter(results.values())))
    print(f"{'backend':<10}" + "".join(f"{c:>16}" for c in cols))
    for name, row in results.items():
        print(f"{name:<10}" + "".join(f"{row[c]:>16.4f}" for c in cols))
    if "cython" in results:
        print(f"{'speedup':<10}" + "".join(f"{results['python'][c] / results['cython'][c]:>15.1f}x" for c in cols))
    else:
        print("compiled backend not built; only the reference timings are shown")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
