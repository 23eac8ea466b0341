"""Compare the compiled and pure-Python GF(2^L) kernels.

Run: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import timeit

from procache import kernels
from procache.field import field_for


def workloads(bits: int, rng: random.Random):
    f = field_for(bits)
    a = [rng.getrandbits(bits) or 1 for _ in range(256)]
    b = [rng.getrandbits(bits) or 1 for _ in range(256)]
    xs = f.enumerate_points(min(24, f.mask))
    ys = [rng.getrandbits(bits) for _ in xs]
    coeffs = [rng.getrandbits(bits) for _ in range(24)]

    def mul(k):
        for x, y in zip(a, b):
            k.mul(x, y, bits, f.low)

    def inv(k):
        for x in a:
            k.inv(x, bits, f.low)

    def horner(k):
        for x in a[:64]:
            k.poly_eval(coeffs, x, bits, f.low)

    def interp(k):
        k.interpolate(xs, ys, bits, f.low)

    return {"mul x256": mul, "inv x256": inv, "eval deg23 x64": horner, "interpolate 24 pts": interp}


def counting(k):
    # (1,4,4) over GF(2^3) with two shares: the privacy oracle's inner loop
    k.count_consistent([1, 2], [5, 3], 1, 4, 3, 0b011)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the pure-Python backend is available")
    rng = random.Random(1)
    print(f"{'workload':28s}" + "".join(f"{name:>14s}" for name in backends) + "   speedup")
    for bits in (8, 16, 64):
        for label, fn in workloads(bits, rng).items():
            times = {name: min(timeit.repeat(lambda: fn(k), number=20, repeat=args.repeat)) / 20 for name, k in backends.items()}
            row = f"L={bits:<3d}{label:23s}" + "".join(f"{t * 1e6:12.1f}us" for t in times.values())
            if "cython" in times:
                row += f"   {times['python'] / times['cython']:6.1f}x"
            print(row)
    times = {name: min(timeit.repeat(lambda: counting(k), number=3, repeat=args.repeat)) / 3 for name, k in backends.items()}
    row = f"{'count_consistent (1,4,4)':28s}" + "".join(f"{t * 1e6:12.1f}us" for t in times.values())
    if "cython" in times:
        row += f"   {times['python'] / times['cython']:6.1f}x"
    print(row)


if __name__ == "__main__":
    main()
