"""Scripted studies over the default desk-scale machine, emitted as CSV."""
from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ensemble
from .ensemble import LN2
from .machine import ObjectSet
from .jarzynski import Protocol, estimate


def log_beta_grid(lo: float, hi: float, num: int) -> tuple[float, ...]:
    """Log-spaced grid with ``ln 2`` inserted."""
    grid = {float(b) for b in np.geomspace(lo, hi, num)}
    grid.add(LN2)
    return tuple(sorted(grid))


@dataclass(frozen=True)
class SweepSpec:
    pairs: tuple[tuple[int, int], ...]
    betas: tuple[float, ...]
    excesses: tuple[int, ...] = (0, 2, 4, 6, 8)
    coupling: float = 20.0
    output_dir: str = "results"

    def __post_init__(self):
        betas = tuple(sorted({float(b) for b in self.betas} | {LN2}))
        if betas[0] <= 0:
            raise ValueError("beta grid must be strictly positive")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "pairs", tuple(tuple(map(int, p)) for p in self.pairs))
        object.__setattr__(self, "excesses", tuple(int(e) for e in self.excesses))


def all_ordered_pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(itertools.permutations(range(n), 2))


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def beta_sweep(table, aut, spec: SweepSpec, threads: int = 1) -> list[dict]:
    """Exact work over ``beta x pair x excess`` with the three regime annotations.

    * ``low_t_residual``: ``W - depth``; the shortest-core entropy
      ``-ln(m_xy/m_x)/beta`` is what survives as ``beta`` grows.
    * ``critical_bits``: ``-log2`` of the windowed Solomonoff ratio, only on
      the ``beta = ln 2`` rows.
    * ``beta_work`` vs ``neg_log_count_ratio``: high-temperature comparison.
    """
    grid = list(itertools.product(spec.betas, spec.pairs, spec.excesses))

    def row(point):
        beta, (x, y), excess = point
        dec = ensemble.high_temp_decomposition(table, aut, x, y, beta, excess)
        critical = ""
        if beta == LN2:
            mx = ensemble.solomonoff_weight(table, aut, ObjectSet.of(x), excess)
            mxy = ensemble.solomonoff_weight(table, aut, ObjectSet.of(x, y), excess)
            critical = -math.log2(mxy / mx)
        return {
            "beta": beta,
            "x": x,
            "y": y,
            "excess": excess,
            "work": dec.work,
            "depth": dec.depth,
            "diversity_pred": dec.diversity,
            "log_z_x": dec.log_z_x,
            "log_z_xy": dec.log_z_xy,
            "low_t_residual": dec.work - dec.depth,
            "critical_bits": critical,
            "beta_work": beta * dec.work,
            "neg_log_count_ratio": -math.log(dec.count_ratio),
            "neg_log_mtilde_ratio": -math.log(dec.mtilde_xy / dec.mtilde_x),
        }

    return _map(row, grid, threads)


def lambda_profile(table, aut, x: int, y: int, beta: float, coupling: float, excess: int, nodes: int = 64) -> list[dict]:
    return [
        {"lam": lam, "weight": w, "force": phi}
        for lam, w, phi in ensemble.force_profile(table, aut, x, y, beta, coupling, excess, nodes)
    ]


def lambda_convergence(table, aut, x: int, y: int, beta: float, excesses) -> list[dict]:
    """Error of the depth + diversity prediction as the excess window widens."""
    rows = []
    for excess in excesses:
        dec = ensemble.high_temp_decomposition(table, aut, x, y, beta, excess)
        rows.append({
            "x": x,
            "y": y,
            "beta": beta,
            "excess": excess,
            "work": dec.work,
            "depth": dec.depth,
            "diversity": dec.diversity,
            "predicted": dec.predicted,
            "abs_error": dec.prediction_error,
            "mtilde_x": dec.mtilde_x,
            "mtilde_xy": dec.mtilde_xy,
        })
    return rows


def jarzynski_rows(table, aut, pairs, excess: int, protocol: Protocol, threads: int = 1) -> list[dict]:
    rows = []
    for x, y in pairs:
        est = estimate(table, aut, x, y, excess, protocol, threads)
        rows.append({"x": x, "y": y, "steps": protocol.steps, **est.summary()})
    return rows


def write_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


GNUPLOT = """\
# gnuplot script; run inside the output directory: gnuplot plots.gp
set datafile separator ','
set terminal pngcairo size 900,600

set output 'sweep.png'
set logscale x
set xlabel 'beta'
set ylabel 'W - depth'
plot 'sweep.csv' using 1:($4=={excess} ? $10 : 1/0) skip 1 with points title 'low-T residual (excess {excess})'

unset logscale x
set output 'force.png'
set xlabel 'lambda'
set ylabel 'generalized force'
plot 'force.csv' using 1:3 skip 1 with linespoints title 'force'

set output 'convergence.png'
set xlabel 'excess window'
set ylabel '|W - (depth + diversity)|'
plot 'convergence.csv' using 4:9 skip 1 with points title 'prediction error'
"""

README = """\
# Output files

sweep.csv        beta, x, y, excess, work, depth, diversity_pred, log_z_x, log_z_xy,
                 low_t_residual (work - depth), critical_bits (-log2 Solomonoff ratio,
                 beta = ln 2 rows only), beta_work, neg_log_count_ratio,
                 neg_log_mtilde_ratio
force.csv        lam, weight (Gauss-Legendre weight on [0, 1]), force (J <1 - s_y>)
                 for pair ({fx}, {fy}), beta = {fbeta}, J = {fJ}, excess = {fexcess}
convergence.csv  x, y, beta, excess, work, depth, diversity, predicted, abs_error,
                 mtilde_x, mtilde_xy
jarzynski.csv    x, y, steps, delta_f_estimate, standard_error, mean_work,
                 dissipation, exact_delta_f, trajectories
plots.gp         gnuplot script producing sweep.png, force.png, convergence.png

Works and free energies are in bits of program length; logarithms are natural.
"""


@dataclass
class ExperimentPlan:
    spec: SweepSpec
    force_pair: tuple[int, int] = (0, 1)
    force_beta: float = 1.0
    force_excess: int = 4
    nodes: int = 64
    convergence_beta: float = 1e-3
    protocol: Protocol | None = None
    jarzynski_excess: int = 4
    jarzynski_pairs: tuple[tuple[int, int], ...] = field(default_factory=lambda: ((0, 1),))


def run_experiments(table, aut, plan: ExperimentPlan, threads: int = 1) -> list[str]:
    """Write every CSV plus the plot script and a column README; returns the paths."""
    spec = plan.spec
    os.makedirs(spec.output_dir, exist_ok=True)
    fx, fy = plan.force_pair
    written = []

    def out(name, rows):
        path = os.path.join(spec.output_dir, name)
        write_csv(path, rows)
        written.append(path)

    out("sweep.csv", beta_sweep(table, aut, spec, threads))
    out("force.csv", lambda_profile(table, aut, fx, fy, plan.force_beta, spec.coupling, plan.force_excess, plan.nodes))
    conv = []
    for x, y in spec.pairs:
        conv.extend(lambda_convergence(table, aut, x, y, plan.convergence_beta, spec.excesses))
    out("convergence.csv", conv)
    if plan.protocol is not None:
        out("jarzynski.csv", jarzynski_rows(table, aut, plan.jarzynski_pairs, plan.jarzynski_excess, plan.protocol, threads))
    for name, text in (
        ("plots.gp", GNUPLOT.format(excess=max(spec.excesses))),
        ("README.md", README.format(fx=fx, fy=fy, fbeta=plan.force_beta, fJ=spec.coupling, fexcess=plan.force_excess)),
    ):
        path = os.path.join(spec.output_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        written.append(path)
    return written
