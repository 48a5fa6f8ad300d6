"""Time the python and compiled kernel backends on desk-scale inputs.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each row
reports the best wall time per backend, the speedup, and whether the two
backends returned identical arrays.
"""

import argparse
import itertools
import timeit

import numpy as np

from extractorlab import kernels


def digits(p, n):
    return np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)


def cases():
    d52, d73 = digits(5, 2), digits(7, 3)
    t52 = kernels.backends()["python"].ip_table(d52, d52, 5)
    t73 = kernels.backends()["python"].ip_table(d73, d73, 7)
    w73 = np.ones(t73.shape[0], dtype=np.int64)
    w52 = np.arange(1, t52.shape[0] + 1, dtype=np.int64)
    return [
        ("ip_table p=7 n=3", "ip_table", (d73, d73, 7)),
        ("joint_counts p=7 n=3", "joint_counts", (t73, w73, 7)),
        ("collision_counts p=7 n=3", "collision_counts", (t73,)),
        ("gf2m_mul_table m=6", "gf2m_mul_table", (6, 0x43)),
        ("pair_slice_l1 p=5 n=2", "pair_slice_l1", (t52, w52, 5)),
        ("pair_slice_l1 p=7 n=3", "pair_slice_l1", (t73, w73, 7)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    impls = kernels.backends()
    names = sorted(impls)
    print(f"selected backend: {kernels.BACKEND}; available: {', '.join(names)}")
    print(f"{'kernel':28s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}  agree")
    for label, fn, args_ in cases():
        times, outs = {}, {}
        for n in names:
            f = getattr(impls[n], fn)
            outs[n] = f(*args_)
            times[n] = min(timeit.repeat(lambda: f(*args_), number=1, repeat=args.repeat))
        agree = all(np.array_equal(outs[names[0]], outs[n]) for n in names)
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{label:28s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names) + f"{speed:9.1f}x  {agree}")


if __name__ == "__main__":
    main()
