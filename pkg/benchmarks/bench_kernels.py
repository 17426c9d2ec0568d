"""Compare the numba kernels with the numpy fallbacks.

Kernel selection happens at import time, so each mode runs in its own
interpreter with FROBPENCIL_JIT set accordingly.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit


def inner(repeat: int) -> dict:
    import numpy as np

    from frobpencil import elliptic as ell
    from frobpencil.numeric import Polynomial, poly_roots

    rng = np.random.default_rng(0)
    polys = [Polynomial.from_roots(rng.normal(size=d) + 1j * rng.normal(size=d)) for d in (8, 24, 48)]
    L = ell.lattice_init(0.3 + 1.1j)
    u = rng.uniform(0, 1, 2000) + rng.uniform(0, 1, 2000) * L.tau
    # warm up (triggers compilation in jit mode)
    for p in polys:
        poly_roots(p)
    ell.wp_all(L, u[:4], 2)
    out = {}
    for p in polys:
        t = timeit.timeit(lambda: poly_roots(p), number=repeat) / repeat
        out[f"roots_deg{p.degree}"] = t
    out["wp_all_2000pts"] = timeit.timeit(lambda: ell.wp_all(L, u, 2), number=repeat) / repeat
    return out


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.inner:
        print(json.dumps(inner(args.repeat)))
        return
    results = {}
    for label, flag in (("numba", "1"), ("numpy", "0")):
        env = dict(os.environ, FROBPENCIL_JIT=flag)
        proc = subprocess.run([sys.executable, __file__, "--inner", "--repeat", str(args.repeat)],
                              env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for key in results["numba"]:
        a, b = results["numba"][key] * 1e3, results["numpy"][key] * 1e3
        print(f"{key:<18}{a:>12.3f}{b:>12.3f}{b / a:>10.2f}")


if __name__ == "__main__":
    main()
