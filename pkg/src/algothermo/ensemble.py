"""Exact equilibrium quantities over the enumerated program ensemble.

Energies are program lengths in bits and logarithms are natural, so the
Solomonoff weight is the partition function at ``beta = ln 2``.  Every sum
is accumulated in log space from exact integer program counts::

    N_t(S) = sum_l  c_l(S) * a_{t - l}

where ``c_l(S)`` counts cores of length ``l`` containing ``S`` and ``a_d``
counts wrappers of length ``d``.  Wrappers are never materialized.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .automaton import WrapperAutomaton, effective_degeneracy, growth_rate, wrapper_counts
from .exceptions import DomainError, TableBoundError
from .machine import ObjectSet, ProgramTable, Universe, as_object_set, ground_length, multiplicity_spectrum

LN2 = math.log(2.0)
HARD = "hard"

Coupling = Union[float, Literal["hard"]]


@dataclass(frozen=True)
class EnsembleParams:
    """Inverse temperature, excess cutoff, coupling strength and coupling parameter."""

    beta: float
    excess: int
    coupling: Coupling = HARD
    lam: float = 0.0

    def __post_init__(self):
        if not self.beta >= 0.0:
            raise DomainError(f"beta must be >= 0, got {self.beta}")
        if self.excess < 0:
            raise DomainError(f"excess cutoff must be >= 0, got {self.excess}")
        if self.coupling != HARD and not self.coupling >= 0.0:
            raise DomainError(f"coupling must be >= 0 or HARD, got {self.coupling}")
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError(f"lambda must lie in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class CutoffPartition:
    """Partition function inside a length window, kept as ``log_value``.

    ``count`` is the exact number of programs in the window (the value at
    ``beta = 0``).
    """

    log_value: float
    count: int
    target: ObjectSet
    beta: float
    bound: int
    ground: int | None = None
    excess: int | None = None

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


@dataclass(frozen=True)
class WorkDecomposition:
    work: float
    depth: int
    diversity: float
    beta: float
    excess: int
    log_z_x: float
    log_z_xy: float
    mtilde_x: float
    mtilde_xy: float
    count_ratio: Fraction | None = None

    @property
    def predicted(self) -> float:
        return self.depth + self.diversity

    @property
    def prediction_error(self) -> float:
        return abs(self.work - self.predicted)


@lru_cache(maxsize=None)
def wrapper_alpha(aut: WrapperAutomaton) -> float:
    return growth_rate(aut).alpha


def _logsumexp(values) -> float:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    top = arr.max()
    if not np.isfinite(top):
        return float(top)
    return float(top + math.log(np.exp(arr - top).sum()))


def length_counts(table: ProgramTable, aut: WrapperAutomaton, S, bound: int) -> list[int]:
    """Exact ``N_t`` for ``t = 0..bound``: programs of length ``t`` whose output contains ``S``."""
    h = table.h
    if bound - h > table.max_core_length:
        raise TableBoundError(
            f"window up to {bound} bits needs cores of {bound - h} bits; "
            f"table stops at {table.max_core_length}"
        )
    c = table.counts(S)
    a = wrapper_counts(aut, max(bound, 0))
    out = [0] * (bound + 1)
    for t in range(bound + 1):
        out[t] = sum(int(c[l]) * a[t - l] for l in range(min(t, table.max_core_length) + 1) if c[l])
    return out


def _log_weight(counts: list[int], beta: float) -> float:
    return _logsumexp([math.log(n) - beta * t for t, n in enumerate(counts) if n])


def bounded_partition(table: ProgramTable, aut: WrapperAutomaton, S, beta: float, bound: int) -> CutoffPartition:
    """Partition function under an absolute length cutoff ``|p| <= bound``."""
    S = as_object_set(S)
    counts = length_counts(table, aut, S, bound)
    return CutoffPartition(_log_weight(counts, beta), sum(counts), S, beta, bound)


def partition_function(table: ProgramTable, aut: WrapperAutomaton, S, beta: float, excess: int) -> CutoffPartition:
    """Partition function over programs within ``excess`` bits of the ground length of ``S``."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    if excess < 0:
        raise DomainError("excess must be nonnegative")
    S = as_object_set(S)
    g = ground_length(table, S)
    Z = bounded_partition(table, aut, S, beta, g + excess)
    return CutoffPartition(Z.log_value, Z.count, S, beta, Z.bound, ground=g, excess=excess)


def free_energy(Z: CutoffPartition, beta: float | None = None) -> float:
    beta = Z.beta if beta is None else beta
    if beta <= 0:
        raise DomainError("free energy is undefined at beta = 0; use the program count")
    return -Z.log_value / beta


# -- coupled ensemble --------------------------------------------------------

def _coupled_buckets(table, aut, x: int, y: int, excess: int):
    X, XY = ObjectSet.of(x), ObjectSet.of(x, y)
    bound = ground_length(table, XY) + excess
    with_y = length_counts(table, aut, XY, bound)
    with_x = length_counts(table, aut, X, bound)
    without_y = [a - b for a, b in zip(with_x, with_y)]
    return bound, with_y, without_y


def coupled_partition(table: ProgramTable, aut: WrapperAutomaton, x: int, y: int, params: EnsembleParams) -> CutoffPartition:
    """``sum exp(-beta (|p| + J lam (1 - s_y(p))))`` over programs containing ``x``.

    The window is ``|p| <= ground({x, y}) + excess`` for every ``lam``.  A
    HARD coupling at ``lam > 0`` drops the programs that miss ``y``.
    """
    bound, with_y, without_y = _coupled_buckets(table, aut, x, y, params.excess)
    beta = params.beta
    log_y = _log_weight(with_y, beta)
    if params.coupling == HARD:
        if params.lam > 0:
            log_value, count = log_y, sum(with_y)
        else:
            log_value = np.logaddexp(log_y, _log_weight(without_y, beta))
            count = sum(with_y) + sum(without_y)
    else:
        log_not = _log_weight(without_y, beta) - beta * params.coupling * params.lam
        log_value = np.logaddexp(log_y, log_not)
        count = sum(with_y) + sum(without_y)
    return CutoffPartition(float(log_value), count, ObjectSet.of(x), beta, bound, excess=params.excess)


def generalized_force(table: ProgramTable, aut: WrapperAutomaton, x: int, y: int, params: EnsembleParams) -> float:
    """``J <1 - s_y>`` in the coupled ensemble at ``params.lam``."""
    if params.coupling == HARD:
        raise DomainError("the generalized force is undefined for a HARD coupling")
    bound, with_y, without_y = _coupled_buckets(table, aut, x, y, params.excess)
    beta, J = params.beta, params.coupling
    log_y = _log_weight(with_y, beta)
    log_not = _log_weight(without_y, beta) - beta * J * params.lam
    if log_not == -math.inf:
        return 0.0
    # J / (1 + exp(log_y - log_not)), written to stay finite for any gap
    return J * math.exp(-np.logaddexp(0.0, log_y - log_not))


def coupled_free_energy_difference(table, aut, x: int, y: int, beta: float, coupling: Coupling, excess: int) -> float:
    """``F(lam=1) - F(lam=0)`` of the coupled ensemble."""
    Z0 = coupled_partition(table, aut, x, y, EnsembleParams(beta, excess, coupling, 0.0))
    Z1 = coupled_partition(table, aut, x, y, EnsembleParams(beta, excess, coupling, 1.0))
    return -(Z1.log_value - Z0.log_value) / beta


def soft_constraint_gap(table, aut, x: int, y: int, beta: float, coupling: float, excess: int) -> float:
    """``F_J(1) - F_hard(1) = -beta^-1 ln(1 + e^(-beta J) Z_miss / Z_hit)``, kept accurate when tiny."""
    if coupling == HARD or beta <= 0:
        raise DomainError("the gap needs beta > 0 and a finite coupling")
    _, with_y, without_y = _coupled_buckets(table, aut, x, y, excess)
    log_ratio = _log_weight(without_y, beta) - beta * coupling - _log_weight(with_y, beta)
    return -math.log1p(math.exp(log_ratio)) / beta


def reversible_work_TI(table, aut, x: int, y: int, beta: float, coupling: float, excess: int, nodes: int = 64) -> float:
    """Gauss-Legendre integral of the generalized force over ``lam`` in [0, 1]."""
    if coupling == HARD:
        raise DomainError("thermodynamic integration needs a finite coupling")
    if nodes < 2:
        raise DomainError("need at least two quadrature nodes")
    return float(sum(w * phi for _, w, phi in force_profile(table, aut, x, y, beta, coupling, excess, nodes)))


def force_profile(table, aut, x: int, y: int, beta: float, coupling: float, excess: int, nodes: int = 64):
    """``(lam, weight, force)`` on the Gauss-Legendre grid mapped to [0, 1]."""
    xi, wi = leggauss(nodes)
    out = []
    for t, w in zip(xi, wi):
        lam = 0.5 * (float(t) + 1.0)
        phi = generalized_force(table, aut, x, y, EnsembleParams(beta, excess, coupling, lam))
        out.append((lam, 0.5 * float(w), phi))
    return out


# -- work and its decomposition ---------------------------------------------

def window_degeneracy(table: ProgramTable, S, alpha: float, excess: int) -> float:
    """Effective degeneracy attached to an excess window.

    Alternatives strictly inside the window (``1 <= D <= excess - 1``) are
    discounted by ``2^(-alpha D)``; a core at the window edge admits only the
    marker wrapper and is left out.
    """
    spectrum = multiplicity_spectrum(table, S, excess)
    return effective_degeneracy(spectrum, alpha, max(excess - 1, 0))


def reversible_work_direct(table, aut, x: int, y: int, beta: float, excess: int, alpha: float | None = None) -> WorkDecomposition:
    """``F(x, y) - F(x)`` with each free energy taken in its own excess window."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    alpha = wrapper_alpha(aut) if alpha is None else alpha
    X, XY = ObjectSet.of(x), ObjectSet.of(x, y)
    Zx = partition_function(table, aut, X, beta, excess)
    Zxy = partition_function(table, aut, XY, beta, excess)
    mx = window_degeneracy(table, X, alpha, excess)
    mxy = window_degeneracy(table, XY, alpha, excess)
    return WorkDecomposition(
        work=free_energy(Zxy) - free_energy(Zx),
        depth=Zxy.ground - Zx.ground,
        diversity=-math.log(mxy / mx) / beta,
        beta=beta,
        excess=excess,
        log_z_x=Zx.log_value,
        log_z_xy=Zxy.log_value,
        mtilde_x=mx,
        mtilde_xy=mxy,
    )


def high_temp_decomposition(table, aut, x: int, y: int, beta: float, excess: int, alpha: float | None = None) -> WorkDecomposition:
    """Exact work, its depth + diversity prediction, and the raw window count ratio.

    ``count_ratio`` is the exact ratio of program counts in the two windows,
    the ``beta -> 0`` value of ``exp(-beta W)``.
    """
    dec = reversible_work_direct(table, aut, x, y, beta, excess, alpha)
    Nx = partition_function(table, aut, ObjectSet.of(x), 0.0, excess).count
    Nxy = partition_function(table, aut, ObjectSet.of(x, y), 0.0, excess).count
    return dataclasses.replace(dec, count_ratio=Fraction(Nxy, Nx))


def solomonoff_weight(table, aut, S, excess: int) -> float:
    """Windowed Solomonoff weight ``sum 2^-|p|``."""
    return partition_function(table, aut, S, LN2, excess).value


def kraft_sum(table: ProgramTable, aut: WrapperAutomaton, max_length: int) -> Fraction:
    """Exact ``sum 2^-|p|`` over every halting program of at most ``max_length`` bits."""
    h = table.h
    if max_length - h > table.max_core_length:
        raise TableBoundError(
            f"Kraft sum to {max_length} bits needs cores of {max_length - h} bits"
        )
    cores = table.core_counts_by_length()
    a = wrapper_counts(aut, max(max_length, 0))
    total = Fraction(0)
    for l, c in enumerate(cores):
        if c:
            for d in range(h, max_length - l + 1):
                total += Fraction(int(c) * a[d], 2 ** (l + d))
    return total


def information_distance(table: ProgramTable, x: int, y: int) -> int:
    """``max(K(x,y) - K(x), K(x,y) - K(y))`` with ground lengths for K."""
    if x == y:
        return 0
    gxy = ground_length(table, ObjectSet.of(x, y))
    return max(gxy - ground_length(table, ObjectSet.of(x)), gxy - ground_length(table, ObjectSet.of(y)))


# -- uniform predicate counting ------------------------------------------------

UDT_EXHAUSTIVE_MAX = 20


def _subset_bits(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.uint32)
    return ((masks[None, :] >> np.arange(n, dtype=np.uint32)[:, None]) & 1).astype(bool)


def udt_pair_count(universe: Universe | int, x: int, y: int, verify: bool = True) -> int:
    """Number of subsets of the universe containing both ``x`` and ``y``: ``2^(n-2)``.

    With ``verify`` and ``n <= 20`` the closed form is checked by counting
    bitmasks directly.
    """
    n = universe.n if isinstance(universe, Universe) else int(universe)
    if n < 2:
        raise DomainError("need at least two objects")
    if x == y:
        raise DomainError("the count concerns two distinct objects")
    if not (0 <= x < n and 0 <= y < n):
        raise DomainError("object id out of range")
    count = 1 << (n - 2)
    if verify and n <= UDT_EXHAUSTIVE_MAX:
        bits = _subset_bits(n)
        direct = int(np.count_nonzero(bits[x] & bits[y]))
        if direct != count:
            raise AssertionError(f"bitmask count {direct} != 2^(n-2) = {count}")
    return count


def udt_pair_table(n: int) -> dict[tuple[int, int], int]:
    """Direct subset counts for every unordered pair (``n <= 20``)."""
    if not 2 <= n <= UDT_EXHAUSTIVE_MAX:
        raise DomainError(f"exhaustive check needs 2 <= n <= {UDT_EXHAUSTIVE_MAX}")
    bits = _subset_bits(n)
    return {
        (x, y): int(np.count_nonzero(bits[x] & bits[y]))
        for x, y in itertools.combinations(range(n), 2)
    }
