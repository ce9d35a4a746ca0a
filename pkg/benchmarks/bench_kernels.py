"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Times each kernel on identical inputs under both backends, reports the
largest disagreement, and times the default simulation grid end to end in a
subprocess per backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np
from scipy.special import betaln, expit

from oddsrecal.distributions import PANEL_ORDER, _breakpoints, _gauss_legendre
from oddsrecal.kernels import available_backends

GRID_SNIPPET = (
    "import time, warnings; warnings.simplefilter('ignore');"
    "from oddsrecal.simulation import figure1_grid; from oddsrecal.kernels import BACKEND;"
    "t = time.perf_counter(); rows = figure1_grid(); print(BACKEND, len(rows), time.perf_counter() - t)"
)


def kernel_cases(n):
    rng = np.random.default_rng(0)
    z = rng.normal(scale=2.0, size=n)
    y = (rng.uniform(size=n) < expit(z)).astype(np.float64)
    w = rng.uniform(size=n)
    scores = np.sort(np.round(rng.uniform(size=n), 4))
    labels = (rng.uniform(size=n) < scores).astype(np.uint8)
    a, b, shift = 3.0, 11.0, 0.7
    breaks = _breakpoints(a, b, (np.log(a / b), 0.0, -shift))
    nodes, weights = _gauss_legendre(PANEL_ORDER)
    log_norm = float(betaln(a, b))
    return {
        "mean_expit": lambda m: m.mean_expit(z, 0.3),
        "weighted_sum": lambda m: m.weighted_sum(z, w),
        "offset_score": lambda m: m.offset_score(z, y, -0.2)[0],
        "mann_whitney_sorted": lambda m: m.mann_whitney_sorted(scores, labels)[0],
        "beta_logit_expit (x1000)": lambda m: sum(
            m.beta_logit_expit(breaks, nodes, weights, a, b, log_norm, shift) for _ in range(1000)
        ),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1_000_000, help="array length for reductions")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-grid", action="store_true", help="skip the end-to-end grid timing")
    args = parser.parse_args(argv)

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the fallback is timed")
    names = sorted(backends)
    print(f"{'kernel':28s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}{'max rel diff':>14s}")
    for label, fn in kernel_cases(args.n).items():
        times, values = {}, {}
        for name in names:
            mod = backends[name]
            values[name] = fn(mod)
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        ref = values["python"]
        diff = max(abs(v - ref) / max(abs(ref), 1e-300) for v in values.values())
        speedup = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{label:28s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names) + f"{speedup:9.2f}x{diff:14.1e}")

    if not args.skip_grid:
        print("\ndefault simulation grid (end to end):")
        for force_python in (False, True):
            env = dict(os.environ)
            env.pop("ODDSRECAL_PURE_PYTHON", None)
            if force_python:
                env["ODDSRECAL_PURE_PYTHON"] = "1"
            out = subprocess.run([sys.executable, "-c", GRID_SNIPPET], env=env, capture_output=True, text=True, check=True)
            backend, rows, seconds = out.stdout.split()
            print(f"  {backend:9s} {rows} rows in {float(seconds):.2f}s")


if __name__ == "__main__":
    main()
