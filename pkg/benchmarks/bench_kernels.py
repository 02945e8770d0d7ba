"""Compare the compiled and NumPy cascade kernels on a full-section profile.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from jtcsim import _kernels
from jtcsim.analysis import profile_positions
from jtcsim.jtc import JTCScenario, after_elements, before_elements, solve_many


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--step", type=float, default=1.0)
    args = ap.parse_args()

    s = JTCScenario.default()
    xs = profile_positions(s.length, args.step)
    modal = s.eigen.modal
    after = _kernels.pack([after_elements(s, x) for x in xs])
    before = _kernels.pack([before_elements(s, x) for x in xs])
    w0 = np.eye(4, 2, dtype=np.complex128)
    n_elem = len(after[0]) + len(before[0])
    print(f"{len(xs)} shunting points, {n_elem} elements per profile")

    cases = {
        "chain_product_batch": lambda b: _kernels.chain_product_batch(*before, modal, backend=b),
        "propagate_batch": lambda b: _kernels.propagate_batch(w0, *after, modal, backend=b),
        "solve_many (profile)": lambda b: solve_many(s, xs, backend=b),
    }
    backends = [b for b in ("python", "native") if b in _kernels.BACKENDS]
    print(f"{'case':24s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in cases.items():
        t = [best_of(lambda: fn(b), args.repeat) for b in backends]
        row = f"{name:24s}" + "".join(f"{v * 1e3:10.2f}ms" for v in t)
        if len(t) == 2:
            row += f"{t[0] / t[1]:11.1f}x"
        print(row)
    if "native" not in _kernels.BACKENDS:
        print("compiled extension not built; only the NumPy backend was timed")


if __name__ == "__main__":
    main()
