#!/usr/bin/env python3
"""Subspace estimation error versus the number of sounded columns.

Same sweep engine as run_nmse_vs_m.py but reporting the squared spectral
distance between the true and the learned receive subspace, which isolates
stage 1 from the column recovery that follows.
"""

import argparse
import sys

from twostage import SweepSpec, SystemConfig, run_sweep, summarize, write_rows


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nr", type=int, default=32)
    p.add_argument("--nt", type=int, default=128)
    p.add_argument("--paths", type=int, default=4)
    p.add_argument("--nrf", type=int, default=6)
    p.add_argument("--m", type=int, nargs="+", default=[4, 8, 16, 32])
    p.add_argument("--snr-db", type=float, nargs="+", default=[0.0, 10.0, 20.0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    base = SystemConfig(n_rx=args.nr, n_tx=args.nt, paths=args.paths,
                        n_rf=args.nrf, m=min(args.m), seed=args.seed)
    spec = SweepSpec(base=base, snr_db_list=tuple(args.snr_db),
                     m_list=tuple(args.m), trials=args.trials,
                     baseline=False, workers=args.workers)
    rows = run_sweep(spec)
    if args.out:
        write_rows(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    print(f"{'snr_db':>8} {'m':>4} {'n':>5} {'dist_mean':>12} {'dist_se':>10}")
    for s in summarize(rows):
        print(f"{s.snr_db:>8.1f} {s.m:>4d} {s.count:>5d} "
              f"{s.subspace_dist_mean:>12.4e} {s.subspace_dist_stderr:>10.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
