"""Command-line interface: solve one config, sweep a key, or run the
invariant suite.  Exit code is 0 only on full success."""

from __future__ import annotations

import argparse
import os
import sys

from .config import ProblemConfig, parse_overrides


def _set_threads(n):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def _print_report(report):
    sys.stdout.write(report.to_json())


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="pbbddc",
        description="Physics-based BDDC solver for the curl-curl + mass "
        "problem on structured hexahedral meshes.",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="thread count for the linear algebra backends")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configuration")
    p_solve.add_argument("config")
    p_solve.add_argument("overrides", nargs="*", metavar="--key=value")

    p_sweep = sub.add_parser("sweep", help="run one configuration per value")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--vary", required=True, metavar="key=v1,v2,...")
    p_sweep.add_argument("overrides", nargs="*", metavar="--key=value")

    sub.add_parser("check", help="run the invariant suite")

    # argparse would reject --key=value overrides as unknown options, so
    # collect them from the unparsed remainder
    args, extra = parser.parse_known_args(argv)
    bad = [a for a in extra if not (a.startswith("--") and "=" in a)]
    if bad or (extra and args.command == "check"):
        parser.error(f"unrecognized arguments: {' '.join(bad or extra)}")
    if args.command in ("solve", "sweep"):
        args.overrides = list(args.overrides) + extra
    _set_threads(args.threads)
    from . import driver, invariants  # after thread env vars are set

    if args.command == "check":
        results = invariants.run_all()
        n_fail = 0
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
            n_fail += 0 if ok else 1
        print(f"{len(results) - n_fail}/{len(results)} invariants passed")
        return 0 if n_fail == 0 else 1

    try:
        cfg = ProblemConfig.from_file(args.config, args.overrides)
    except (OSError, KeyError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2

    if args.command == "solve":
        try:
            report = driver.run(cfg)
        except Exception as err:
            print(f"setup/solve failed: {err}", file=sys.stderr)
            return 3
        _print_report(report)
        if cfg.report_path:
            with open(cfg.report_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(report.to_json())
        return 0 if report.converged else 1

    # sweep
    if "=" not in args.vary:
        print("--vary must look like key=v1,v2,...", file=sys.stderr)
        return 2
    key, vals = args.vary.split("=", 1)
    values = [v.strip() for v in vals.split(",") if v.strip()]
    try:
        reports = driver.sweep(cfg, key.strip(), values)
    except Exception as err:
        print(f"sweep failed: {err}", file=sys.stderr)
        return 3
    for v, rep in zip(values, reports):
        print(f"{key}={v}: iterations={rep.iterations} "
              f"converged={rep.converged} coarse_size={rep.coarse_size}")
    return 0 if all(r.converged for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
