"""Compiled kernels against the plain-Python fallback on the <=3-node universe.

Run with ``python3 benchmarks/bench_kernels.py``.  Each mode runs in its own
interpreter because the mode is fixed when ``tricolor.kernels`` is imported.
"""

import json
import os
import subprocess
import sys

CHILD = r"""
import json, time
from tricolor import kernels, lattice
from tricolor.partition import check_partition_laws, constraint_bitsets
from tricolor.universe import encode_batch, enumerate_tdags

tdags = list(enumerate_tdags(3))
batch = encode_batch(tdags)
out = {"jit": kernels.USING_JIT, "items": len(tdags)}
if kernels.USING_JIT:  # compile outside the timed region
    rows = lattice.subsumption_matrix(encode_batch(tdags[:8]))
    lattice.check_joins(encode_batch(tdags[:8]), rows, 3)
    _, S, V = constraint_bitsets(tdags[:8])
    check_partition_laws(S, V)
t = time.perf_counter(); rows = lattice.subsumption_matrix(batch); out["subsumption"] = time.perf_counter() - t
t = time.perf_counter(); rep = lattice.check_joins(batch, rows, 3); out["joins"] = time.perf_counter() - t
out["join_failures"] = rep.failures
_, S, V = constraint_bitsets(tdags)
t = time.perf_counter(); prep = check_partition_laws(S, V); out["partition"] = time.perf_counter() - t
out["partition_ok"] = prep.ok
print(json.dumps(out))
"""


def run(disable_jit: bool) -> dict:
    env = dict(os.environ)
    env["TRICOLOR_DISABLE_JIT"] = "1" if disable_jit else "0"
    res = subprocess.run([sys.executable, "-c", CHILD], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main() -> None:
    jit, pure = run(False), run(True)
    print(f"universe: {jit['items']} TDAGs (<=3 nodes, 2 features, 2 atoms)")
    print(f"{'kernel':<14}{'numba s':>10}{'python s':>12}{'speedup':>10}")
    for k in ("subsumption", "joins", "partition"):
        print(f"{k:<14}{jit[k]:>10.3f}{pure[k]:>12.3f}{pure[k] / jit[k]:>9.0f}x")
    assert jit["join_failures"] == pure["join_failures"] == 0
    assert jit["partition_ok"] and pure["partition_ok"]


if __name__ == "__main__":
    main()
