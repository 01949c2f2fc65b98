"""Command line front end: single-run estimates, Monte Carlo sweeps, oracle checks."""

from __future__ import annotations

import argparse
import sys
import time

from .channel import SystemConfig, generate_channel
from .harness import (
    SweepSpec,
    read_config,
    run_checks,
    run_sweep,
    summarize,
    write_rows,
)
from .numkit import RngState
from .pipeline import RECOVERY_MODES, full_observation_baseline, two_stage_estimate

# settings a sweep understands, with parsers for config-file values
_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _parse_bool(text):
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ValueError(f"expected a boolean, got {text!r}") from None


def _parse_list(text, item):
    return tuple(item(tok) for tok in text.replace(",", " ").split())


_SWEEP_KEYS = {
    "nr": int,
    "nt": int,
    "paths": int,
    "nrf": int,
    "m": lambda s: _parse_list(s, int),
    "snr_db": lambda s: _parse_list(s, float),
    "trials": int,
    "seed": int,
    "grid_size": int,
    "mode": lambda s: _parse_list(s, str),
    "baseline": _parse_bool,
    "workers": int,
    "out": str,
}

_SWEEP_DEFAULTS = {
    "nr": 32,
    "nt": 128,
    "paths": 4,
    "nrf": 6,
    "m": (4, 8, 16, 32),
    "snr_db": (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0),
    "trials": 200,
    "seed": 0,
    "grid_size": None,
    "mode": ("pseudo-inverse",),
    "baseline": True,
    "workers": 1,
    "out": None,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="twostage",
        description="Two-stage subspace-sampling channel estimator for hybrid "
                    "mmWave arrays",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="run one estimate and print the report")
    est.add_argument("--nr", type=int, default=32, help="receive antennas")
    est.add_argument("--nt", type=int, default=128, help="transmit antennas")
    est.add_argument("--paths", type=int, default=4, help="propagation paths")
    est.add_argument("--nrf", type=int, default=6, help="RF chains")
    est.add_argument("--m", type=int, default=8, help="columns sounded in stage 1")
    est.add_argument("--snr-db", type=float, default=10.0, help="SNR in dB")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--grid-size", type=int, default=None,
                     help="sounder dictionary size (default 2 * nr)")
    est.add_argument("--mode", choices=RECOVERY_MODES, default="pseudo-inverse")
    est.add_argument("--baseline", action=argparse.BooleanOptionalAction,
                     default=False, help="also print the full-observation floor")

    swp = sub.add_parser("sweep", help="Monte Carlo sweep over SNR and m grids")
    swp.add_argument("--config", type=str, default=None,
                     help="key = value file mirroring the flags below")
    swp.add_argument("--nr", type=int, default=None)
    swp.add_argument("--nt", type=int, default=None)
    swp.add_argument("--paths", type=int, default=None)
    swp.add_argument("--nrf", type=int, default=None)
    swp.add_argument("--m", type=int, nargs="+", default=None,
                     help="sampled-column counts")
    swp.add_argument("--snr-db", type=float, nargs="+", default=None)
    swp.add_argument("--trials", type=int, default=None)
    swp.add_argument("--seed", type=int, default=None)
    swp.add_argument("--grid-size", type=int, default=None)
    swp.add_argument("--mode", choices=RECOVERY_MODES, nargs="+", default=None)
    swp.add_argument("--baseline", action=argparse.BooleanOptionalAction,
                     default=None, help="include the full-observation floor")
    swp.add_argument("--workers", type=int, default=None)
    swp.add_argument("--out", type=str, default=None, help="CSV output path")

    chk = sub.add_parser("check", help="run the built-in oracle checks")
    chk.add_argument("--seed", type=int, default=0)

    return parser


def _resolve_sweep_settings(args):
    """Defaults, overridden by the config file, overridden by explicit flags."""
    settings = dict(_SWEEP_DEFAULTS)
    if args.config is not None:
        for key, raw in read_config(args.config).items():
            if key not in _SWEEP_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            settings[key] = _SWEEP_KEYS[key](raw)
    for key in _SWEEP_KEYS:
        flag = getattr(args, key if key != "out" else "out")
        if flag is not None:
            settings[key] = tuple(flag) if isinstance(flag, list) else flag
    return settings


def _spec_from_settings(s):
    base = SystemConfig(n_rx=s["nr"], n_tx=s["nt"], paths=s["paths"], n_rf=s["nrf"],
                        m=min(s["m"]), grid_size=s["grid_size"], seed=s["seed"])
    return SweepSpec(base=base, snr_db_list=s["snr_db"], m_list=s["m"],
                     trials=s["trials"], modes=s["mode"], baseline=s["baseline"],
                     workers=s["workers"], output_path=s["out"])


def _print_report(rep, out):
    out.write(f"mode:            {rep.mode}\n")
    out.write(f"nmse:            {rep.nmse:.6e}\n")
    out.write(f"subspace_dist:   {rep.subspace_dist:.6e}\n")
    out.write(f"channel_uses:    stage1={rep.channel_uses_stage1} "
              f"stage2={rep.channel_uses_stage2} total={rep.channel_uses_total}\n")
    out.write(f"dof:             {rep.dof}\n")
    out.write(f"seed:            {rep.seed}\n")


def _cmd_estimate(args, out):
    cfg = SystemConfig(n_rx=args.nr, n_tx=args.nt, paths=args.paths, n_rf=args.nrf,
                       noise_var=10.0 ** (-args.snr_db / 10.0), m=args.m,
                       grid_size=args.grid_size, seed=args.seed)
    rng = RngState(cfg.seed)
    real = generate_channel(cfg, rng.split(0))
    rep = two_stage_estimate(real, cfg, rng.split(1), mode=args.mode)
    _print_report(rep, out)
    if args.baseline:
        floor = full_observation_baseline(real.h, cfg.noise_var, cfg.paths,
                                          rng.split(2))
        out.write("\n")
        _print_report(floor, out)
    return 0


def _cmd_sweep(args, out):
    spec = _spec_from_settings(_resolve_sweep_settings(args))
    start = time.monotonic()
    rows = run_sweep(spec)
    elapsed = time.monotonic() - start
    if spec.output_path is not None:
        write_rows(rows, spec.output_path)
        out.write(f"wrote {len(rows)} rows to {spec.output_path}\n")
    header = (f"{'snr_db':>8} {'m':>4} {'mode':<18} {'n':>5} "
              f"{'nmse_mean':>12} {'nmse_se':>10} {'dist_mean':>12} {'dist_se':>10}")
    out.write(header + "\n")
    for s in summarize(rows):
        out.write(f"{s.snr_db:>8.1f} {s.m:>4d} {s.mode:<18} {s.count:>5d} "
                  f"{s.nmse_mean:>12.4e} {s.nmse_stderr:>10.2e} "
                  f"{s.subspace_dist_mean:>12.4e} {s.subspace_dist_stderr:>10.2e}\n")
    out.write(f"{len(rows)} rows in {elapsed:.1f}s\n")
    return 0


def _cmd_check(args, out):
    results = run_checks(seed=args.seed)
    failed = 0
    for name, passed, detail in results:
        tag = "PASS" if passed else "FAIL"
        out.write(f"{name:<30} {tag}  ({detail})\n")
        failed += 0 if passed else 1
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 1 if failed else 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = sys.stdout
    if args.command == "estimate":
        return _cmd_estimate(args, out)
    if args.command == "sweep":
        return _cmd_sweep(args, out)
    return _cmd_check(args, out)


if __name__ == "__main__":
    raise SystemExit(main())
