#!/usr/bin/env python3
"""NMSE versus the number of exhaustively sounded columns.

Monte Carlo sweep at the reference array scale (32 x 128, 4 paths), with the
rank-limited full-observation floor alongside for context. Expect the mean
NMSE to fall as m grows and to sit above the floor at matching SNR.
"""

import argparse
import sys

from twostage import SweepSpec, SystemConfig, run_sweep, summarize, write_rows


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nr", type=int, default=32, help="receive antennas")
    p.add_argument("--nt", type=int, default=128, help="transmit antennas")
    p.add_argument("--paths", type=int, default=4)
    p.add_argument("--nrf", type=int, default=6, help="RF chains")
    p.add_argument("--m", type=int, nargs="+", default=[4, 8, 16, 32])
    p.add_argument("--snr-db", type=float, nargs="+", default=[0.0, 10.0, 20.0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-baseline", action="store_true",
                   help="skip the full-observation floor")
    p.add_argument("--out", default=None, help="also write the raw rows as CSV")
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    base = SystemConfig(n_rx=args.nr, n_tx=args.nt, paths=args.paths,
                        n_rf=args.nrf, m=min(args.m), seed=args.seed)
    spec = SweepSpec(base=base, snr_db_list=tuple(args.snr_db),
                     m_list=tuple(args.m), trials=args.trials,
                     baseline=not args.no_baseline, workers=args.workers)
    rows = run_sweep(spec)
    if args.out:
        write_rows(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    print(f"{'snr_db':>8} {'m':>4} {'mode':<18} {'n':>5} "
          f"{'nmse_mean':>12} {'nmse_se':>10}")
    for s in summarize(rows):
        print(f"{s.snr_db:>8.1f} {s.m:>4d} {s.mode:<18} {s.count:>5d} "
              f"{s.nmse_mean:>12.4e} {s.nmse_stderr:>10.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
