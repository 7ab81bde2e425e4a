"""Command line surface: generate scenarios, run solvers, validate and
evaluate schedules, query the oracle, and sweep seed-by-algorithm grids.

Exit codes: 0 success, 1 validation violations, 2 bad configuration,
3 algorithm/model mismatch, 4 solver failure.  Log level comes from the
MMWSCHED_LOG environment variable.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time

from . import ecsched, f3wc, netmodel, opthd, optfd, oracle, scenario
from .netmodel import (
    DirectedNetwork,
    ModelFlags,
    NetworkError,
    normalize_downlink,
)
from .optfd import ModelMismatch

log = logging.getLogger("mmwsched")

ALGOS = ("opt-fd", "opt-hd-uniform", "pds", "f3wc-fao", "f3wc-lslo", "ec")

EXIT_VIOLATIONS = 1
EXIT_BAD_CONFIG = 2
EXIT_MISMATCH = 3
EXIT_SOLVER = 4


def _setup_logging():
    level = os.environ.get("MMWSCHED_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _read_network(path: str) -> DirectedNetwork:
    with open(path) as f:
        return netmodel.network_from_json(f.read())


def _parse_macros(text: str) -> tuple:
    try:
        j, _, k = text.partition("x")
        return (int(j), int(k or j))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad macro grid {text!r}")


def _config_from_args(args, seed=None) -> scenario.ScenarioConfig:
    return scenario.ScenarioConfig(
        relay_grid=args.grid,
        macro_grid=args.macros,
        spacing_m=args.spacing,
        beamwidth_deg=args.beamwidth,
        rf_macro=args.rf_macro,
        rf_relay=args.rf_relay,
        seed=args.seed if seed is None else seed,
        flags=ModelFlags(args.duplex, args.interference, args.susm),
    )


def _run_algo(algo: str, net: DirectedNetwork, exact: bool, granularity):
    if algo == "opt-fd":
        return optfd.solve(net, exact)
    if algo == "opt-hd-uniform":
        if net.flags.duplex != "HD":
            raise ModelMismatch("opt-hd-uniform expects an HD network")
        return opthd.opt_hd_mtfs_uniform(net, exact)
    if algo == "pds":
        sol, _ = opthd.pds(net, exact=exact)
        return sol
    if algo == "f3wc-fao":
        return f3wc.f3wc_fao(net, exact=exact)
    if algo == "f3wc-lslo":
        return f3wc.f3wc_lslo(net, exact=exact)
    if algo == "ec":
        return ecsched.solve(net, ecsched.EcConfig(granularity), exact)
    raise ModelMismatch(f"unknown algorithm {algo!r}")


def _bound_note(algo: str, net: DirectedNetwork, sol) -> str:
    if algo == "pds":
        g = opthd.pds_bound_gamma(net)
        return f"gamma_star={float(g.gamma_star):.4g}"
    if algo in ("f3wc-fao", "f3wc-lslo"):
        b = sol.extras.get("bounds")
        if b and b.applicable:
            return f"alpha_star={b.alpha_star} beta_star={b.beta_star}"
        return "bound=n/a"
    if algo == "ec":
        return f"ec_factor={sol.extras['bound_factor']:.4g} kappa={sol.extras['kappa']}"
    return "exact"


def cmd_generate(args) -> int:
    try:
        cfg = _config_from_args(args)
    except NetworkError as e:
        print(f"bad config: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if not (0 < args.beamwidth <= 180) or args.grid < 1 or args.spacing <= 0:
        print("bad config: grid/spacing/beamwidth out of range", file=sys.stderr)
        return EXIT_BAD_CONFIG
    net = scenario.generate(cfg)
    with open(args.out, "w") as f:
        f.write(netmodel.network_to_json(net))
    print(
        f"wrote {args.out}: {len(net.vertices)} vertices, {len(net.links)} links, "
        f"{len(net.interference_pairs)} interference pairs"
    )
    return 0


def cmd_solve(args) -> int:
    net = _read_network(args.network)
    t0 = time.perf_counter()
    try:
        sol = _run_algo(args.algo, net, args.exact, args.granularity)
    except ModelMismatch as e:
        print(f"model mismatch: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except Exception as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    ms = (time.perf_counter() - t0) * 1000.0
    if args.out:
        with open(args.out, "w") as f:
            f.write(netmodel.schedule_to_json(sol.schedule))
    iters = ",".join(f"{k}={v}" for k, v in sol.iterations.items()) or "-"
    print(
        f"algo={args.algo} theta={float(sol.theta_star):.6g} "
        f"network_tput={float(sol.network_throughput):.6g} runtime_ms={ms:.1f} "
        f"iterations={iters} {_bound_note(args.algo, net, sol)}"
    )
    return 0


def cmd_validate(args) -> int:
    net = _read_network(args.network)
    with open(args.schedule) as f:
        sched = netmodel.schedule_from_json(f.read())
    violations = netmodel.validate_schedule(net, sched)
    for v in violations:
        print(str(v))
    if violations:
        print(f"{len(violations)} violation(s)")
        return EXIT_VIOLATIONS
    print("schedule is valid")
    return 0


def cmd_eval(args) -> int:
    net = _read_network(args.network)
    with open(args.schedule) as f:
        sched = netmodel.schedule_from_json(f.read())
    report = netmodel.evaluate_schedule(net, sched)
    for rid in sorted(report.per_relay):
        print(f"relay {rid}: {float(report.per_relay[rid]):.6g}")
    print(f"maxmin={float(report.maxmin):.6g} network={float(report.network):.6g}")
    return 0


def cmd_oracle(args) -> int:
    net = _read_network(args.network)
    try:
        theta, tput, _ = oracle.brute_force_mtfs(net, limit=args.limit)
    except oracle.TooLarge as e:
        print(f"oracle out of reach: {e}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"theta_star={float(theta):.9g} network_tput={float(tput):.9g}")
    return 0


def _parse_seeds(text: str) -> list:
    if ":" in text:
        a, _, b = text.partition(":")
        return list(range(int(a), int(b)))
    return [int(s) for s in text.split(",") if s]


def cmd_compare(args) -> int:
    from . import report as report_mod

    seeds = _parse_seeds(args.seeds)
    algos = [a for a in args.algos.split(",") if a]
    for a in algos:
        if a not in ALGOS:
            print(f"unknown algo {a!r}", file=sys.stderr)
            return EXIT_BAD_CONFIG
    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    for seed in seeds:
        net = scenario.generate(_config_from_args(args, seed=seed))
        try:
            otheta, _, _ = oracle.brute_force_mtfs(net, limit=args.oracle_limit)
            otheta = float(otheta)
        except oracle.TooLarge:
            otheta = None
        for algo in algos:
            t0 = time.perf_counter()
            try:
                sol = _run_algo(algo, net, False, args.granularity)
            except ModelMismatch as e:
                print(f"model mismatch: {e}", file=sys.stderr)
                return EXIT_MISMATCH
            ms = (time.perf_counter() - t0) * 1000.0
            theta = float(sol.theta_star)
            rows.append(
                {
                    "seed": seed,
                    "algo": algo,
                    "theta": theta,
                    "network_tput": float(sol.network_throughput),
                    "theta_over_oracle": (theta / otheta)
                    if otheta
                    else None,
                    "runtime_ms": round(ms, 3),
                }
            )
    rows.sort(key=lambda r: (r["seed"], r["algo"]))
    csv_path = os.path.join(args.out_dir, "compare.csv")
    with open(csv_path, "w", newline="") as f:
        writer = csv.DictWriter(
            f,
            fieldnames=[
                "seed",
                "algo",
                "theta",
                "network_tput",
                "theta_over_oracle",
                "runtime_ms",
            ],
        )
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
    written = [csv_path]
    if not args.no_plots:
        written += report_mod.save_compare_figures(rows, args.out_dir)
    print(f"wrote {len(rows)} rows: " + ", ".join(written))
    return 0


def _add_scenario_args(p):
    p.add_argument("--grid", type=int, default=4, help="relay grid size n (n x n)")
    p.add_argument("--macros", type=_parse_macros, default=(1, 1), help="macro layout JxK")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spacing", type=float, default=80.0, help="grid spacing in meters")
    p.add_argument("--beamwidth", type=float, default=20.0)
    p.add_argument("--rf-macro", type=int, default=2)
    p.add_argument("--rf-relay", type=int, default=2)
    p.add_argument("--duplex", choices=("FD", "HD"), default="FD")
    p.add_argument("--interference", choices=("NI", "PI"), default="NI")
    p.add_argument("--susm", choices=("MAX", "REAL"), default="MAX")


def main(argv=None) -> int:
    _setup_logging()
    ap = argparse.ArgumentParser(prog="mmwsched", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw a scenario network file")
    _add_scenario_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run one scheduling algorithm")
    p.add_argument("network")
    p.add_argument("--algo", choices=ALGOS, required=True)
    p.add_argument("--out", help="schedule output file")
    p.add_argument("--exact", action="store_true", help="exact rational arithmetic")
    p.add_argument("--granularity", type=float, default=0.1, help="ec time quantum")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a schedule against a network")
    p.add_argument("network")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="per-relay throughput of a schedule")
    p.add_argument("network")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="brute-force optimum for a small network")
    p.add_argument("network")
    p.add_argument("--limit", type=int, default=oracle.ENUM_LIMIT_HD)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", help="seed sweep over several algorithms")
    _add_scenario_args(p)
    p.add_argument("--seeds", default="0:5", help="range a:b or comma list")
    p.add_argument("--algos", default="opt-fd", help="comma-separated algorithms")
    p.add_argument("--granularity", type=float, default=0.1)
    p.add_argument("--oracle-limit", type=int, default=oracle.ENUM_LIMIT_HD)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_compare)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except NetworkError as e:
        print(f"bad input: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
