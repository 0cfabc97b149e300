"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--size 40960] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from hybridlink.kernels import available_backends


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=40960, help="payload bytes")
    ap.add_argument("--samples", type=int, default=100_000, help="power samples to integrate")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    t_us = np.arange(args.samples, dtype=np.int64) * 1000
    p_uw = (np.arange(args.samples, dtype=np.int64) % 97) * 1000 + 5000
    payload = available_backends()["python"].synth_payload(3, args.size)
    results = {}
    for name, mod in available_backends().items():
        cases = {
            "synth_payload": lambda: mod.synth_payload(3, args.size),
            "digest64": lambda: mod.digest64(payload),
            "integrate_hold": lambda: mod.integrate_hold(t_us, p_uw, 0, int(t_us[-1])),
        }
        for case, fn in cases.items():
            n = 20
            best = min(timeit.repeat(fn, number=n, repeat=args.repeat)) / n
            results[(case, name)] = best
    names = list(available_backends())
    print(f"{'kernel':<16}" + "".join(f"{n:>14}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for case in ("synth_payload", "digest64", "integrate_hold"):
        row = f"{case:<16}" + "".join(f"{results[(case, n)] * 1e6:>11.1f} us" for n in names)
        if "cython" in names:
            row += f"   {results[(case, 'python')] / results[(case, 'cython')]:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
