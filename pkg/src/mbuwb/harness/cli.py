"""Command line entry point: ``mbuwb {calibrate,run,sweep-balance,preset}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..link_abstraction import CalibrationCache, LambdaTable
from ..phy.mcs import get_mcs
from .presets import PRESETS
from .report import emit_csv
from .scenario import load_scenario
from .sweep import (
    gain_db,
    resolve_lambdas,
    run_balance_sweep,
    run_ber_sweep,
    snr_at_ber,
)

log = logging.getLogger("mbuwb")

EXIT_CENSORED = 2


def _common(p):
    p.add_argument("--seed", type=int, help="override the scenario master seed")
    p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--lambda", dest="lam", type=float, help="fixed EESM lambda for every MCS")
    p.add_argument("--cache", type=Path, help="calibration cache directory (default OUT/calibration)")


def _scenario(args, source):
    s = load_scenario(source)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.lam is not None:
        changes["lambda_override"] = args.lam
    return s.with_(**changes) if changes else s


def _cache_dir(args):
    return args.cache or args.out / "calibration"


def _report(curves):
    base = [c for c in curves if c.label.startswith("tfc@")]
    for c in curves:
        line = f"{c.label:>16}: " + " ".join(f"{b:.2e}" for b in c.ber)
        for target in (1e-3, 1e-4):
            snr = snr_at_ber(c, target)
            line += f"  snr@{target:g}=" + ("n/a" if snr is None else f"{snr:.2f}")
        if base and c is not base[0]:
            g = gain_db(c, base[0], 1e-4)
            line += "  gain@1e-4=" + ("n/a" if g is None else f"{g:+.2f} dB")
        print(line)


def _run(args, source) -> int:
    s = _scenario(args, source)
    curves = run_ber_sweep(s, jobs=args.jobs, cache_dir=_cache_dir(args))
    path = emit_csv(curves, args.out / f"{s.name}.csv")
    _report(curves)
    censored = sum(c.censored for c in curves)
    print(f"wrote {path} ({censored} censored points)")
    return EXIT_CENSORED if censored else 0


def _balance(args, source) -> int:
    s = _scenario(args, source)
    ratios = args.ratios if getattr(args, "ratios", None) else None
    rows = run_balance_sweep(s, ratios, jobs=args.jobs, cache_dir=_cache_dir(args))
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"{s.name}_balance.csv"
    with path.open("w") as fh:
        fh.write("ratio,hard_gain_db,all_users_gain_db\n")
        for r in rows:
            fmt = lambda g: "" if g is None else f"{g:.4f}"  # noqa: E731
            fh.write(f"{r.ratio:g},{fmt(r.hard_gain_db)},{fmt(r.all_users_gain_db)}\n")
            print(f"W_MAC/W_PHY={r.ratio:<6g} hard gain={fmt(r.hard_gain_db):>8} dB  "
                  f"all users={fmt(r.all_users_gain_db):>8} dB")
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mbuwb", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("calibrate", help="AWGN references and EESM lambdas per MCS")
    p.add_argument("rates", nargs="+", help="data rates in Mbit/s, e.g. 320 480")
    p.add_argument("--channel", default="CM1")
    _common(p)

    p = sub.add_parser("run", help="BER sweep of a scenario file")
    p.add_argument("scenario", help="scenario file or preset name")
    _common(p)

    p = sub.add_parser("sweep-balance", help="hard-QoS gain versus W_MAC/W_PHY")
    p.add_argument("scenario")
    p.add_argument("--ratios", type=lambda t: [float(x) for x in t.split(",")])
    _common(p)

    p = sub.add_parser("preset", help="run one of the built-in experiments")
    p.add_argument("name", choices=sorted(PRESETS))
    _common(p)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.cmd == "calibrate":
        from .scenario import Scenario, UserSpec

        users = tuple(UserSpec(i + 1, "soft", float(get_mcs(r).data_rate)) for i, r in enumerate(args.rates))
        s = Scenario(users, channel=args.channel.upper(), seed=args.seed if args.seed is not None else 1)
        table = resolve_lambdas(s, _cache_dir(args))
        cache = CalibrationCache(_cache_dir(args))
        for u in users:
            ref = cache.reference(u.rate, seed=s.seed)
            print(f"{get_mcs(u.rate).label:>6} Mbit/s  lambda={table[u.rate]:.4f}  "
                  f"AWGN Es/N0 @1e-4 = {ref.snr_at(1e-4):.2f} dB")
        print(LambdaTable(table.values).dumps(), end="")
        return 0
    if args.cmd == "run":
        return _run(args, args.scenario)
    if args.cmd == "sweep-balance":
        return _balance(args, args.scenario)
    if args.name == "fig8":
        return _balance(args, args.name)
    return _run(args, args.name)


if __name__ == "__main__":
    sys.exit(main())
