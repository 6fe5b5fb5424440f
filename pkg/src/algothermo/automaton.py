"""Marker-avoidance automaton: counting, growth rate and sampling of wrappers.

A wrapper of length ``d`` is ``s + M`` where ``s`` has length ``d - h`` and
contains no occurrence of the marker ``M``.  The avoiding strings are the
paths of a KMP-style automaton whose states are the lengths of the longest
marker prefix currently matched.
"""
from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DomainError

DEAD = -1


def has_trivial_autocorrelation(bits: str) -> bool:
    """True when no proper nonempty suffix of ``bits`` is also a prefix."""
    return all(bits[-k:] != bits[:k] for k in range(1, len(bits)))


@dataclass(frozen=True)
class Marker:
    """Wrapper terminator; must not overlap itself."""

    bits: str

    def __post_init__(self):
        if not self.bits or set(self.bits) - {"0", "1"}:
            raise DomainError(f"marker must be a nonempty bit string, got {self.bits!r}")
        if not has_trivial_autocorrelation(self.bits):
            raise DomainError(
                f"marker {self.bits!r} overlaps itself (a proper suffix equals a prefix); "
                "first-occurrence parsing would be ambiguous"
            )

    @property
    def h(self) -> int:
        return len(self.bits)

    def __str__(self):
        return self.bits


def prefix_function(pattern: str) -> list[int]:
    """Classic KMP failure function: ``pi[i]`` is the longest border of ``pattern[:i+1]``."""
    pi = [0] * len(pattern)
    k = 0
    for i in range(1, len(pattern)):
        while k and pattern[i] != pattern[k]:
            k = pi[k - 1]
        if pattern[i] == pattern[k]:
            k += 1
        pi[i] = k
    return pi


@dataclass(frozen=True)
class WrapperAutomaton:
    marker: Marker
    transitions: tuple[tuple[int, int], ...]  # state -> (next on '0', next on '1'); DEAD on full match

    @property
    def n_states(self) -> int:
        return len(self.transitions)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Transition count matrix restricted to safe states."""
        A = np.zeros((self.n_states, self.n_states), dtype=np.int64)
        for s, row in enumerate(self.transitions):
            for t in row:
                if t != DEAD:
                    A[s, t] += 1
        return A

    def step(self, state: int, bit: str) -> int:
        return self.transitions[state][bit == "1"]

    def accepts(self, s: str) -> bool:
        """True when ``s`` contains no occurrence of the marker."""
        state = 0
        for b in s:
            state = self.step(state, b)
            if state == DEAD:
                return False
        return True

    def _suffix_counts(self, n: int) -> list[list[int]]:
        # table[k][s] = number of safe continuations of length k from state s
        table = [[1] * self.n_states]
        for _ in range(n):
            prev = table[-1]
            table.append(
                [sum(prev[t] for t in row if t != DEAD) for row in self.transitions]
            )
        return table


def build_automaton(marker: Marker | str) -> WrapperAutomaton:
    if isinstance(marker, str):
        marker = Marker(marker)
    M = marker.bits
    pi = prefix_function(M)
    rows = []
    for state in range(marker.h):
        row = []
        for b in "01":
            k = state
            while k and M[k] != b:
                k = pi[k - 1]
            if M[k] == b:
                k += 1
            row.append(DEAD if k == marker.h else k)
        rows.append(tuple(row))
    return WrapperAutomaton(marker, tuple(rows))


def count_avoiding(aut: WrapperAutomaton, n: int) -> int:
    """Exact number of length-``n`` binary strings avoiding the marker."""
    if n < 0:
        raise DomainError("length must be nonnegative")
    return aut._suffix_counts(n)[n][0]


def wrapper_count(aut: WrapperAutomaton, d: int) -> int:
    """``a_d``: number of wrappers of total length ``d``."""
    h = aut.marker.h
    return count_avoiding(aut, d - h) if d >= h else 0


def wrapper_counts(aut: WrapperAutomaton, d_max: int) -> list[int]:
    """``[a_0, ..., a_{d_max}]`` in one pass."""
    h = aut.marker.h
    if d_max < h:
        return [0] * (d_max + 1)
    suffix = aut._suffix_counts(d_max - h)
    return [0] * h + [row[0] for row in suffix]


@dataclass(frozen=True)
class GrowthRate:
    mu: float
    alpha: float
    tol: float
    iterations: int
    finite_family: bool = False


def growth_rate(aut: WrapperAutomaton, tol: float = 1e-12, max_iter: int = 1_000_000) -> GrowthRate:
    """Dominant eigenvalue of the transition matrix by power iteration.

    The iterate is ``A^k 1`` with ``k`` doubled each round (repeated squaring,
    rescaled to stay finite), and the estimate is its Rayleigh quotient.  This
    stops once the relative change drops below ``tol``.  Defective
    matrices, where plain power iteration converges like ``1/k``, therefore
    need only about ``log2(1/tol)`` rounds.  ``max_iter`` caps ``k``.  A
    nilpotent matrix (finitely many avoiding strings) is reported with
    ``finite_family=True`` and ``mu=0``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    A = aut.matrix.astype(float)
    B = A.copy()
    ones = np.ones(A.shape[0])
    rq = float("nan")
    k = 1
    it = 0
    while True:
        it += 1
        top = B.max()
        if top == 0.0:
            return GrowthRate(0.0, float("-inf"), tol, k, finite_family=True)
        B /= top
        v = B @ ones
        new_rq = float(v @ (A @ v)) / float(v @ v)
        done = it > 1 and abs(new_rq - rq) <= tol * abs(new_rq)
        rq = new_rq
        if done or 2 * k > max_iter:
            break
        B = B @ B
        k *= 2
    if rq < 1.0 - 1e-9:
        return GrowthRate(rq, float("-inf"), tol, k, finite_family=True)
    mu = max(rq, 1.0)
    return GrowthRate(mu, math.log2(mu), tol, k)


@dataclass(frozen=True)
class DegeneracySpectrum:
    """Core multiplicities above the ground core length of a target set.

    ``counts[k]`` is the number of cores of length ``ground + k`` whose output
    contains the target, so ``counts[0]`` is the shortest-core multiplicity.
    """

    ground: int
    counts: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.counts[0]

    @property
    def max_excess(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, delta: int) -> int:
        return self.counts[delta]


def effective_degeneracy(spectrum: DegeneracySpectrum, alpha: float, cutoff: int) -> float:
    """``m + sum_{D=1..cutoff} m^(D) 2^(-alpha D)``."""
    if cutoff < 0:
        raise DomainError("cutoff must be nonnegative")
    if cutoff > spectrum.max_excess:
        raise DomainError(
            f"spectrum only populated to {spectrum.max_excess}, asked for {cutoff}"
        )
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    tail = spectrum.counts[1 : cutoff + 1]
    if alpha == 0.0 and any(tail):
        warnings.warn(
            "alpha = 0: alternative cores are not discounted, the sum may not stabilize",
            RuntimeWarning,
            stacklevel=2,
        )
    return spectrum.m + sum(c * 2.0 ** (-alpha * k) for k, c in enumerate(tail, start=1))


def sample_wrapper(aut: WrapperAutomaton, d: int, rng_seed=None) -> str:
    """Uniform draw from the wrappers of length ``d``.

    Walks the automaton choosing each bit with probability proportional to
    the number of safe completions behind it.  ``rng_seed`` may be an int or
    a :class:`random.Random`.
    """
    h = aut.marker.h
    if d < h:
        raise DomainError(f"no wrapper of length {d} < marker length {h}")
    rng = rng_seed if isinstance(rng_seed, random.Random) else random.Random(rng_seed)
    n = d - h
    suffix = aut._suffix_counts(n)
    state, out = 0, []
    for remaining in range(n, 0, -1):
        t0, t1 = aut.transitions[state]
        c0 = suffix[remaining - 1][t0] if t0 != DEAD else 0
        c1 = suffix[remaining - 1][t1] if t1 != DEAD else 0
        if rng.randrange(c0 + c1) < c0:
            out.append("0")
            state = t0
        else:
            out.append("1")
            state = t1
    return "".join(out) + aut.marker.bits
