"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each kernel runs on the same inputs under both backends; the table lists the
best-of-``repeat`` time per call and the speedup of the compiled version.
"""

import argparse
import json
import timeit

import numpy as np

from hmcf import kernels


def cases(rng):
    m = 1024
    th = np.sort(rng.uniform(0.0, 2.0 * np.pi, m))
    verts = np.stack([np.cos(th) * (1.0 + 0.1 * np.sin(3 * th)), np.sin(th)], axis=1)
    sig_c = rng.normal(scale=0.2, size=m)
    stack_x = np.tile(verts[:, 0], (64, 1))
    stack_y = np.tile(verts[:, 1], (64, 1))
    n1 = 4096
    s1 = 0.1 * rng.standard_normal(n1)
    b1 = 0.1 * rng.standard_normal(n1)
    s2 = 0.1 * rng.standard_normal((256, 256))
    p2 = 0.1 * rng.standard_normal((256, 256))
    q2 = 0.1 * rng.standard_normal((256, 256))
    return {
        "curve_rhs m=1024": lambda k: k.curve_rhs(verts, sig_c),
        "curve_geometry 64x1024": lambda k: k.curve_geometry(stack_x, stack_y),
        "wave_speed_1d n=4096": lambda k: k.wave_speed_1d(s1, b1),
        "fv_rhs_1d LF n=4096": lambda k: k.fv_rhs_1d(s1, b1, 1e-3, k.LAX_FRIEDRICHS, True),
        "fv_rhs_1d Rusanov n=4096": lambda k: k.fv_rhs_1d(s1, b1, 1e-3, k.RUSANOV, True),
        "fv_rhs_2d LF 256x256": lambda k: k.fv_rhs_2d(s2, p2, q2, 1e-2, 1e-2, k.LAX_FRIEDRICHS, True),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None, help="write results to this file")
    args = ap.parse_args(argv)

    impls = kernels.backends()
    rng = np.random.default_rng(0)
    results = []
    for name, fn in cases(rng).items():
        row = {"kernel": name}
        for backend, mod in impls.items():
            fn(mod)
            number = 20
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            row[backend] = best
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        results.append(row)

    print(f"{'kernel':28s} {'python [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for r in results:
        cy = f"{r['cython'] * 1e6:12.1f}" if "cython" in r else f"{'n/a':>12s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'':>8s}"
        print(f"{r['kernel']:28s} {r['python'] * 1e6:12.1f} {cy} {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
