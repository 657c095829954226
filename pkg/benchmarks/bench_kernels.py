"""Compare the numba and pure-Python search backends.

The backend is fixed at import time by NC_GEOM_NO_NUMBA, so each backend runs
in its own interpreter. Both must return identical results; the table shows
median wall time per cell (numba timings exclude the first, compiling call).

    python benchmarks/bench_kernels.py --sizes 20,40,60 --cells 5
"""
import argparse
import json
import os
import statistics
import subprocess
import sys

WORKER = r"""
import json, sys, time
from ncgeom import _kernels
from ncgeom.coding import max_coding_number
from ncgeom.topology import RandomSpec, gen_uniform
sizes, cells = json.loads(sys.argv[1]), int(sys.argv[2])
max_coding_number(gen_uniform(RandomSpec("uniform-count", count=12, seed=0)))  # warm-up / compile
out = {"backend": _kernels.BACKEND, "runs": {}}
for n in sizes:
    times, results = [], []
    for seed in range(cells):
        cell = gen_uniform(RandomSpec("uniform-count", count=n, seed=seed))
        t0 = time.perf_counter()
        res = max_coding_number(cell, budget=0)
        times.append(time.perf_counter() - t0)
        results.append([res.max_number, list(res.witness_nodes)])
    out["runs"][str(n)] = {"times": times, "results": results}
print(json.dumps(out))
"""


def run_backend(no_numba: bool, sizes, cells):
    env = dict(os.environ, NC_GEOM_NO_NUMBA="1" if no_numba else "0")
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, json.dumps(sizes), str(cells)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="20,40,60", help="comma-separated node counts")
    ap.add_argument("--cells", type=int, default=5, help="random cells per size")
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    fast = run_backend(False, sizes, args.cells)
    slow = run_backend(True, sizes, args.cells)

    print(f"{'N':>5} {fast['backend']:>12} {slow['backend']:>12} {'speedup':>9}  same")
    ok = True
    for n in sizes:
        a, b = fast["runs"][str(n)], slow["runs"][str(n)]
        same = a["results"] == b["results"]
        ok &= same
        ta, tb = statistics.median(a["times"]), statistics.median(b["times"])
        print(f"{n:>5} {ta * 1e3:>10.2f}ms {tb * 1e3:>10.2f}ms {tb / ta:>8.1f}x  {same}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
