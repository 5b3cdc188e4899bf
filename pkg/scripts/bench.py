"""Throughput of the simple and interpolated bounce-back solvers on a sphere in a box.

    python scripts/bench.py --size 128 --diameter 76 --threads 1 2 4
"""
import argparse

import numba

from porelbm.config import parse_text
from porelbm.runner import bench_geometry, run_bench, slowdown


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--diameter", type=float, default=76.0)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--threads", type=int, nargs="+", default=[numba.config.NUMBA_NUM_THREADS])
    args = ap.parse_args()

    scn = parse_text(f"[scenario]\nkind = bench\n[fluid]\nnu = 0.1\n[bench]\nsize = {args.size}\n"
                     f"diameter = {args.diameter}\nsteps = {args.steps}\n")
    geom = bench_geometry(args.size, args.diameter)
    print(f"{args.size}^3 cells, {len(geom.links)} boundary links")
    print(f"{'threads':>7} {'SBB MLUPS':>10} {'CLI MLUPS':>10} {'slowdown':>9}")
    for n in args.threads:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
        sbb, cli = run_bench(scn, geom)
        print(f"{sbb.threads:7d} {sbb.mlups:10.2f} {cli.mlups:10.2f} {slowdown(sbb, cli):+9.3f}")


if __name__ == "__main__":
    main()
