"""Compare the compiled and pure-Python kernels.

Times the hot paths (one RK4 step, the obstacle potential) in isolation and
one full supervised simulation per backend. Run with

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hybrid_uniting import _backend, _kernels_py

SHAPE = (3.0, 0.0, 1.0, 0.0, 0.07, 0.05, 0.8, 0.1, np.pi / 2, 0.02)

SIM_SNIPPET = """
import time
from hybrid_uniting import BACKEND
from hybrid_uniting.scenario import preset_config, run
best = float('inf')
for _ in range({repeat}):
    t0 = time.perf_counter()
    run(preset_config('{preset}'))
    best = min(best, time.perf_counter() - t0)
print(BACKEND, best)
"""


def micro(mod, number):
    flow = lambda x: np.array([x[1], -x[0]])  # noqa: E731
    x = np.array([1.0, 0.0])
    rk4 = min(timeit.repeat(lambda: mod.rk4_step(flow, x, 0.01), number=number, repeat=3)) / number
    pot = min(timeit.repeat(lambda: mod.potential(0.5, -0.3, 1, *SHAPE), number=number, repeat=3)) / number
    return rk4, pot


def simulate(backend, preset, repeat):
    env = dict(os.environ, HYBRID_UNITING_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", SIM_SNIPPET.format(repeat=repeat, preset=preset)],
                         env=env, capture_output=True, text=True, check=True).stdout.split()
    return out[0], float(out[1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=20_000, help="calls per micro-benchmark sample")
    ap.add_argument("--repeat", type=int, default=3, help="simulation repetitions (best is reported)")
    args = ap.parse_args()

    compiled = _backend.compiled()
    mods = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    if not compiled:
        print("compiled kernels not built; reporting the pure-Python backend only")

    print(f"{'kernel':<22}" + "".join(f"{name:>14}" for name, _ in mods))
    rows = {name: micro(mod, args.number) for name, mod in mods}
    for k, label in enumerate(("rk4_step [us]", "potential [us]")):
        print(f"{label:<22}" + "".join(f"{rows[name][k] * 1e6:>14.3f}" for name, _ in mods))

    for preset in ("ex1-figB", "ex2-below"):
        times = {}
        for name, _ in mods:
            backend, secs = simulate(name, preset, args.repeat)
            times[backend] = secs
        line = f"{'sim ' + preset + ' [s]':<22}" + "".join(f"{times[name]:>14.4f}" for name, _ in mods)
        if len(times) == 2:
            line += f"   speedup x{times['python'] / times['cython']:.2f}"
        print(line)


if __name__ == "__main__":
    main()
