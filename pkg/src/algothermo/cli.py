"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 unsatisfiable computation.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import os
import sys

from . import ensemble
from .automaton import build_automaton, growth_rate, wrapper_counts
from .config import Config, load_config
from .exceptions import ConfigError, DomainError, UnsatisfiableError
from .experiments import ExperimentPlan, SweepSpec, log_beta_grid, run_experiments, write_csv
from .jarzynski import Protocol, estimate
from .machine import ObjectSet, Universe, enumerate_cores, multiplicity_spectrum

log = logging.getLogger("algothermo")

EXIT_CONFIG = 2
EXIT_UNSATISFIABLE = 3


def _build(cfg: Config):
    universe = Universe(cfg.n, tuple(cfg.labels) if cfg.labels else None)
    table = enumerate_cores(universe, cfg.marker, cfg.max_core_length)
    return table, build_automaton(cfg.marker)


def _protocol(cfg: Config, steps: int | None = None) -> Protocol:
    p = cfg.protocol
    return Protocol.linear(
        steps or p.steps, 1.0, cfg.coupling, sweeps=p.sweeps, trajectories=p.trajectories, seed=p.seed
    )


def _fmt_set(ids) -> str:
    return "{" + ",".join(map(str, ids)) + "}"


def cmd_enumerate(cfg: Config, args) -> int:
    table, _ = _build(cfg)
    counts = table.core_counts_by_length()
    print(f"marker={cfg.marker} n={cfg.n} max_core_length={cfg.max_core_length}")
    print("core_length,cores")
    for length, c in enumerate(counts):
        if c:
            print(f"{length},{c}")
    print("target,ground_core_length,ground_length,m,spectrum")
    for t in cfg.resolved_targets():
        S = ObjectSet.of(*t)
        try:
            k0 = table.ground_core_length(S)
        except UnsatisfiableError:
            print(f"{_fmt_set(t)},,,0,")
            continue
        spec = multiplicity_spectrum(table, S, min(cfg.excess, cfg.max_core_length - k0))
        print(f"{_fmt_set(t)},{k0},{k0 + table.h},{spec.m},{' '.join(map(str, spec.counts))}")
    path = args.export or os.path.join(cfg.output_dir, "table.csv")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        table.to_csv(fh)
    print(f"table written to {path}")
    return 0


def cmd_work(cfg: Config, args) -> int:
    table, aut = _build(cfg)
    x, y, beta = args.x, args.y, args.beta
    for i in (x, y):
        if not 0 <= i < cfg.n:
            raise DomainError(f"object {i} outside universe of size {cfg.n}")
    if args.mode == "direct":
        dec = ensemble.reversible_work_direct(table, aut, x, y, beta, cfg.excess)
        print("mode,beta,x,y,excess,work,depth,diversity,mtilde_x,mtilde_xy")
        print(f"direct,{beta!r},{x},{y},{cfg.excess},{dec.work!r},{dec.depth},{dec.diversity!r},{dec.mtilde_x!r},{dec.mtilde_xy!r}")
        if math.isclose(beta, ensemble.LN2, rel_tol=1e-12):
            print(f"bayesian_update_bits,{dec.work!r}")
    elif args.mode == "ti":
        ti = ensemble.reversible_work_TI(table, aut, x, y, beta, cfg.coupling, cfg.excess, args.nodes)
        exact = ensemble.coupled_free_energy_difference(table, aut, x, y, beta, cfg.coupling, cfg.excess)
        hard = ensemble.coupled_free_energy_difference(table, aut, x, y, beta, ensemble.HARD, cfg.excess)
        print("mode,beta,x,y,excess,coupling,nodes,ti_work,endpoint_difference,hard_constraint_work")
        print(f"ti,{beta!r},{x},{y},{cfg.excess},{cfg.coupling!r},{args.nodes},{ti!r},{exact!r},{hard!r}")
    else:
        proto = dataclasses.replace(_protocol(cfg), beta=beta)
        est = estimate(table, aut, x, y, cfg.excess, proto, args.threads)
        print("mode,beta,x,y,excess,coupling,delta_f_estimate,standard_error,mean_work,dissipation,exact_delta_f")
        print(
            f"jarzynski,{beta!r},{x},{y},{cfg.excess},{cfg.coupling!r},{est.delta_f!r},"
            f"{est.standard_error!r},{est.mean_work!r},{est.dissipation!r},{est.exact_delta_f!r}"
        )
    return 0


def cmd_sweep(cfg: Config, args) -> int:
    table, aut = _build(cfg)
    g = cfg.beta_grid
    spec = SweepSpec(
        pairs=tuple(cfg.resolved_pairs()),
        betas=log_beta_grid(g.min, g.max, g.num),
        excesses=tuple(cfg.excess_list),
        coupling=cfg.coupling,
        output_dir=cfg.output_dir,
    )
    x, y = spec.pairs[0]
    plan = ExperimentPlan(
        spec,
        force_pair=(x, y),
        force_excess=cfg.excess,
        protocol=None if args.skip_jarzynski else _protocol(cfg),
        jarzynski_excess=cfg.excess,
        jarzynski_pairs=((x, y),),
    )
    for path in run_experiments(table, aut, plan, args.threads):
        print(path)
    return 0


def cmd_jarzynski(cfg: Config, args) -> int:
    table, aut = _build(cfg)
    proto = dataclasses.replace(_protocol(cfg, args.steps), beta=args.beta)
    est = estimate(table, aut, args.x, args.y, cfg.excess, proto, args.threads)
    os.makedirs(cfg.output_dir, exist_ok=True)
    traj = os.path.join(cfg.output_dir, "trajectories.csv")
    with open(traj, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trajectory", "work"])
        for i, work in enumerate(est.works):
            w.writerow([i, repr(float(work))])
    summary = os.path.join(cfg.output_dir, "jarzynski_summary.csv")
    write_csv(summary, [{"x": args.x, "y": args.y, "steps": proto.steps, **est.summary()}])
    with open(summary) as fh:
        sys.stdout.write(fh.read())
    print(f"trajectory log written to {traj}")
    return 0


def cmd_wrapper_stats(cfg: Config, args) -> int:
    aut = build_automaton(cfg.marker)
    g = growth_rate(aut)
    print("d,a_d")
    for d, a in enumerate(wrapper_counts(aut, args.max_d)):
        print(f"{d},{a}")
    print("mu,alpha")
    print(f"{g.mu!r},{g.alpha!r}")
    return 0


def cmd_udt(cfg: Config, args) -> int:
    n = cfg.n
    count = ensemble.udt_pair_count(n, 0, 1, verify=n <= ensemble.UDT_EXHAUSTIVE_MAX)
    if n <= ensemble.UDT_EXHAUSTIVE_MAX:
        table = ensemble.udt_pair_table(n)
        same = all(v == count for v in table.values())
        verdict = "identical across all pairs" if same else "PAIR DEPENDENT"
        print(f"{count}, {verdict} ({len(table)} pairs checked exhaustively)")
        return 0 if same else 1
    print(f"{count} (closed form; exhaustive check skipped for n > {ensemble.UDT_EXHAUSTIVE_MAX})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    common.add_argument("--n", type=int, help="override universe size")
    common.add_argument("--marker", help="override wrapper marker bits")
    common.add_argument("--max-core-length", type=int)
    common.add_argument("--excess", type=int, help="override the excess cutoff")
    common.add_argument("--coupling", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--trajectories", type=int)
    common.add_argument("--sweeps", type=int)
    common.add_argument("--output-dir")
    common.add_argument("--threads", type=int, default=1, help="worker cap")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="algothermo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate cores, ground lengths and spectra")
    p.add_argument("--export", help="CSV path for the core table")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("work", parents=[common], help="reversible work for one pair")
    p.add_argument("x", type=int)
    p.add_argument("y", type=int)
    p.add_argument("--beta", type=float, default=ensemble.LN2)
    p.add_argument("--mode", choices=["direct", "ti", "jarzynski"], default="direct")
    p.add_argument("--nodes", type=int, default=64)
    p.set_defaults(func=cmd_work)

    p = sub.add_parser("sweep", parents=[common], help="write all experiment CSVs")
    p.add_argument("--skip-jarzynski", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("jarzynski", parents=[common], help="non-equilibrium work estimate")
    p.add_argument("x", type=int)
    p.add_argument("y", type=int)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_jarzynski)

    p = sub.add_parser("wrapper-stats", parents=[common], help="wrapper counts a_d, mu and alpha")
    p.add_argument("--max-d", type=int, default=20)
    p.set_defaults(func=cmd_wrapper_stats)

    p = sub.add_parser("udt", parents=[common], help="uniform predicate count check")
    p.set_defaults(func=cmd_udt)
    return parser


def _apply_overrides(cfg: Config, args) -> Config:
    for attr in ("n", "marker", "max_core_length", "excess", "coupling", "output_dir"):
        value = getattr(args, attr)
        if value is not None:
            setattr(cfg, attr, value)
    for attr in ("seed", "trajectories", "sweeps"):
        value = getattr(args, attr)
        if value is not None:
            setattr(cfg.protocol, attr, value)
    if args.n is not None and cfg.labels is not None and len(cfg.labels) != cfg.n:
        cfg.labels = None
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        where = f"{args.config or '<defaults>'}:{exc.line}" if exc.line else (args.config or "<arguments>")
        print(f"{where}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(cfg, args)
    except UnsatisfiableError as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return EXIT_UNSATISFIABLE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
