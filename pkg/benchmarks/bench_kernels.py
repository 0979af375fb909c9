"""Time the compiled integer kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import itertools
import timeit

from kmlab import _kernels
from kmlab.numlat import HermitianLattice


def cases():
    L1 = HermitianLattice(-4, [[(1, 0)]])
    L2 = HermitianLattice(-4, [[(2, 0), (1, 0)], [(1, 0), (2, 0)]])
    L3 = HermitianLattice(-3, [[(2, 0), (0, 1)], [(1, -1), (3, 0)]])
    out = []
    for name, L, bound in [("rank1 Z[i] N<=2000", L1, 2000),
                           ("rank2 Z[i] N<=60", L2, 60),
                           ("rank2 Z[w] N<=40", L3, 40)]:
        A, D = L.real_form()
        out.append((f"box_norm_counts {name}", "box_norm_counts",
                    (A, L.box_bounds(bound), bound * D)))
        out.append((f"box_enumerate {name}", "box_enumerate",
                    (A, L.box_bounds(bound), bound * D)))
    perms = list(itertools.permutations(range(8)))[:20000]
    out.append(("inversion_parity 20000 perms of 8", "parity_batch", (perms,)))
    return out


def run_case(module, kind, args):
    if kind == "parity_batch":
        return sum(module.inversion_parity(p) for p in args[0])
    return getattr(module, kind)(*args)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    opts = ap.parse_args()
    compiled = _kernels.compiled()
    print(f"selected backend: {_kernels.BACKEND}")
    if compiled is None:
        print("compiled kernels are not built; only the fallback is timed")
    print(f"{'case':45s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for label, kind, args in cases():
        t_py = min(timeit.repeat(lambda: run_case(_kernels.fallback, kind, args),
                                 number=1, repeat=opts.repeat))
        if compiled is None:
            print(f"{label:45s} {t_py:11.4f} {'-':>11s} {'-':>8s}")
            continue
        assert run_case(compiled, kind, args) == run_case(_kernels.fallback, kind, args)
        t_c = min(timeit.repeat(lambda: run_case(compiled, kind, args),
                                number=1, repeat=opts.repeat))
        print(f"{label:45s} {t_py:11.4f} {t_c:11.4f} {t_py / t_c:8.1f}")


if __name__ == "__main__":
    main()
