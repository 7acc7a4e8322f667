"""Timing comparison: compiled transfer kernels vs. the pure-numpy path.

Run with no arguments to benchmark both configurations (each in a fresh
subprocess so the QGLAB_NO_NUMBA switch is honored at import time) and
print a side-by-side table.  ``--single`` runs the current interpreter's
configuration only and emits JSON; the parent invocation uses it.

Timings are medians over repeated runs, taken after a warmup pass so JIT
compilation never pollutes the numbers.
"""

import argparse
import json
import os
import subprocess
import sys
import time

REPEATS = 3
LAMBDA_GRID = 100


def _bench_single():
    import numpy as np

    from qglab.fixtures import fixture_graph
    from qglab.kernels import USING_NUMBA
    from qglab.secular import SpectrumRequest, compute_spectrum
    from qglab.transfer import batch_entries

    edge = fixture_graph("counterexample").edges[0]
    lams = np.linspace(-5.0, 4000.0, LAMBDA_GRID)

    # warmup: compiles the kernels on the numba path
    batch_entries(edge.potential, edge.length, lams[:8], 1e-10)
    times = []
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        batch_entries(edge.potential, edge.length, lams, 1e-10)
        times.append(time.perf_counter() - t0)
    entries_s = sorted(times)[len(times) // 2]

    # end-to-end row on free edges: exercises the closed-form kernel and
    # the determinant scan rather than the adaptive integrator
    star = fixture_graph("star3")
    req = SpectrumRequest(count=12)
    compute_spectrum(star, req)
    times = []
    for _ in range(3):
        t0 = time.perf_counter()
        compute_spectrum(star, req)
        times.append(time.perf_counter() - t0)
    spectrum_s = sorted(times)[len(times) // 2]

    return {
        "using_numba": bool(USING_NUMBA),
        "transfer_batch_s": entries_s,
        "star_spectrum_s": spectrum_s,
    }


def _run_child(no_numba):
    env = dict(os.environ)
    if no_numba:
        env["QGLAB_NO_NUMBA"] = "1"
    else:
        env.pop("QGLAB_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--single"],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="compare compiled and pure-numpy transfer kernels")
    parser.add_argument("--single", action="store_true",
                        help="benchmark this interpreter's configuration "
                             "and print JSON")
    args = parser.parse_args(argv)

    if args.single:
        print(json.dumps(_bench_single()))
        return 0

    compiled = _run_child(no_numba=False)
    fallback = _run_child(no_numba=True)
    if not compiled["using_numba"]:
        print("note: numba unavailable; both columns use the numpy path")

    rows = [
        ("transfer batch, %d energies" % LAMBDA_GRID, "transfer_batch_s"),
        ("3-star spectrum, 12 eigenvalues", "star_spectrum_s"),
    ]
    print("%-34s %12s %12s %8s" % ("kernel", "compiled", "numpy", "speedup"))
    for label, key in rows:
        a, b = compiled[key], fallback[key]
        print("%-34s %10.4fs %10.4fs %7.1fx" % (label, a, b, b / a))
    return 0


if __name__ == "__main__":
    sys.exit(main())
