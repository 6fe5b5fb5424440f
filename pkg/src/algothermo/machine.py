"""Toy regular universal machine over a finite universe.

A program is ``wrapper + core``.  The wrapper is any string ending in the
marker with no earlier marker occurrence; it never affects the output.  The
core is a self-delimiting list of object ids::

    core := ("1" gamma(id + 1))+ "0"

where ``gamma`` is the Elias-gamma code.  The core evaluates to the set of
listed ids (duplicates allowed), so every halting program outputs a
nonempty subset of the universe.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .automaton import DegeneracySpectrum, Marker
from .exceptions import DomainError, ParseError, TableBoundError, UnsatisfiableError

MAX_OBJECTS = 24
MAX_CORE_LENGTH = 40

CoreExpr = tuple[int, ...]


@dataclass(frozen=True)
class Universe:
    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 2 <= self.n <= MAX_OBJECTS:
            raise DomainError(f"universe size must be in [2, {MAX_OBJECTS}], got {self.n}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != self.n:
                raise DomainError("need exactly one label per object")

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1


@dataclass(frozen=True, order=True)
class ObjectSet:
    """Subset of the universe stored as a bitmask over object ids."""

    mask: int

    @classmethod
    def of(cls, *ids: int) -> "ObjectSet":
        mask = 0
        for i in ids:
            if i < 0:
                raise DomainError(f"negative object id {i}")
            mask |= 1 << i
        return cls(mask)

    def __contains__(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def __iter__(self) -> Iterator[int]:
        m, i = self.mask, 0
        while m:
            if m & 1:
                yield i
            m >>= 1
            i += 1

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def issubset(self, other: "ObjectSet") -> bool:
        return self.mask & other.mask == self.mask

    def __or__(self, other: "ObjectSet") -> "ObjectSet":
        return ObjectSet(self.mask | other.mask)

    def __repr__(self):
        return "{" + ",".join(map(str, self)) + "}"


def as_object_set(S) -> ObjectSet:
    """Coerce an ``ObjectSet``, a single id, or an iterable of ids."""
    if isinstance(S, ObjectSet):
        return S
    if isinstance(S, (int, np.integer)):
        return ObjectSet.of(int(S))
    return ObjectSet.of(*(int(i) for i in S))


# -- core language -----------------------------------------------------------

def gamma_encode(k: int) -> str:
    """Elias-gamma code of a positive integer."""
    if k < 1:
        raise DomainError(f"gamma code needs k >= 1, got {k}")
    b = bin(k)[2:]
    return "0" * (len(b) - 1) + b


def _gamma_decode(bits: str, pos: int) -> tuple[int, int]:
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        raise ParseError("truncated gamma code")
    return int(bits[pos + zeros : end], 2), end


def element_cost(i: int) -> int:
    """Bits spent on one list element: continuation bit plus gamma(i + 1)."""
    return 1 + 2 * (i + 1).bit_length() - 1


def encode_core(expr: Sequence[int], universe: Universe | None = None) -> str:
    if len(expr) == 0:
        raise DomainError("a core must list at least one object")
    parts = []
    for i in expr:
        if i < 0 or (universe is not None and i >= universe.n):
            raise DomainError(f"object id {i} out of range")
        parts.append("1" + gamma_encode(i + 1))
    return "".join(parts) + "0"


def decode_core(bits: str, universe: Universe | None = None) -> tuple[CoreExpr, int]:
    """Decode one core from the front of ``bits``; returns ``(expr, consumed)``.

    Trailing bits after the terminator are left to the caller.  With a
    universe, ids outside it make the core non-halting.
    """
    ids = []
    pos = 0
    while True:
        if pos >= len(bits):
            raise ParseError("truncated core: missing terminator")
        flag = bits[pos]
        pos += 1
        if flag == "0":
            break
        value, pos = _gamma_decode(bits, pos)
        if universe is not None and value > universe.n:
            raise ParseError(f"object id {value - 1} outside universe of size {universe.n}")
        ids.append(value - 1)
    if not ids:
        raise ParseError("empty element list (output would be the empty set)")
    return tuple(ids), pos


def evaluate_core(expr: Iterable[int]) -> ObjectSet:
    return ObjectSet.of(*expr)


# -- programs ----------------------------------------------------------------

@dataclass(frozen=True)
class ParsedProgram:
    wrapper: str
    core: str
    expr: CoreExpr

    @property
    def d(self) -> int:
        """Wrapper length (the minimal wrapper is the marker itself)."""
        return len(self.wrapper)

    @property
    def bits(self) -> str:
        return self.wrapper + self.core

    @property
    def output(self) -> ObjectSet:
        return evaluate_core(self.expr)


def parse_program(p: str, marker: Marker | str, universe: Universe | None = None) -> ParsedProgram:
    """Split ``p`` at the end of the first marker occurrence and decode the rest."""
    if isinstance(marker, str):
        marker = Marker(marker)
    idx = p.find(marker.bits)
    if idx < 0:
        raise ParseError("no marker occurrence: not a program")
    cut = idx + marker.h
    core = p[cut:]
    expr, used = decode_core(core, universe)
    if used != len(core):
        raise ParseError(f"{len(core) - used} surplus bits after the core")
    return ParsedProgram(p[:cut], core, expr)


def execute(p: str, universe: Universe, marker: Marker | str) -> ObjectSet:
    """Output set of program ``p``; raises :class:`ParseError` if it never halts."""
    return parse_program(p, marker, universe).output


# -- enumeration -------------------------------------------------------------

@dataclass
class ProgramTable:
    """Exhaustive index of all cores up to ``max_core_length`` bits.

    Cores are stored collapsed as ``counts_by_mask[mask][length]``; concrete
    bit strings are regenerated on demand by :meth:`iter_cores`.
    """

    universe: Universe
    marker: Marker
    max_core_length: int
    counts_by_mask: dict[int, np.ndarray]
    _target_cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def h(self) -> int:
        return self.marker.h

    def core_counts_by_length(self) -> np.ndarray:
        total = np.zeros(self.max_core_length + 1, dtype=np.int64)
        for arr in self.counts_by_mask.values():
            total += arr
        return total

    def counts(self, S) -> np.ndarray:
        """Per-length counts of cores whose output contains ``S``."""
        S = as_object_set(S)
        if S.mask & ~self.universe.full_mask:
            raise DomainError(f"{S} is not a subset of the universe")
        cached = self._target_cache.get(S.mask)
        if cached is None:
            cached = np.zeros(self.max_core_length + 1, dtype=np.int64)
            for mask, arr in self.counts_by_mask.items():
                if mask & S.mask == S.mask:
                    cached += arr
            cached.setflags(write=False)
            self._target_cache[S.mask] = cached
        return cached

    def ground_core_length(self, S) -> int:
        S = as_object_set(S)
        if not S:
            raise DomainError("the empty set is not a program output")
        nz = np.flatnonzero(self.counts(S))
        if nz.size == 0:
            raise UnsatisfiableError(
                f"no core of length <= {self.max_core_length} covers {S}"
            )
        return int(nz[0])

    def iter_cores(self) -> Iterator[tuple[str, int, int]]:
        """Yield ``(bits, length, output_mask)`` ordered by length, then bits."""
        codes = [("1" + gamma_encode(i + 1), i) for i in range(self.universe.n)]
        for length in range(2, self.max_core_length + 1):
            body = length - 1
            stack = [("", 0, body)]
            out = []
            while stack:
                prefix, mask, room = stack.pop()
                if room == 0:
                    if mask:
                        out.append((prefix + "0", length, mask))
                    continue
                for code, i in codes:
                    if len(code) <= room:
                        stack.append((prefix + code, mask | 1 << i, room - len(code)))
            yield from sorted(out)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["core_bits", "length", "output_mask"])
        for bits, length, mask in self.iter_cores():
            writer.writerow([bits, length, mask])


def enumerate_cores(
    universe: Universe,
    marker: Marker | str,
    max_core_length: int,
    targets: Iterable | None = None,
) -> ProgramTable:
    """Count every complete core of at most ``max_core_length`` bits by output set."""
    if isinstance(marker, str):
        marker = Marker(marker)
    if not 0 <= max_core_length <= MAX_CORE_LENGTH:
        raise DomainError(f"max_core_length must be in [0, {MAX_CORE_LENGTH}]")
    costs = [element_cost(i) for i in range(universe.n)]
    # bodies[k][mask]: element lists of exactly k bits with the given union
    bodies: list[dict[int, int]] = [{0: 1}]
    for k in range(1, max_core_length):
        layer: dict[int, int] = defaultdict(int)
        for i, c in enumerate(costs):
            if c <= k:
                bit = 1 << i
                for mask, cnt in bodies[k - c].items():
                    layer[mask | bit] += cnt
        bodies.append(dict(layer))
    counts_by_mask: dict[int, np.ndarray] = {}
    for k, layer in enumerate(bodies):
        for mask, cnt in layer.items():
            if mask == 0:
                continue
            arr = counts_by_mask.setdefault(mask, np.zeros(max_core_length + 1, dtype=np.int64))
            arr[k + 1] += cnt
    table = ProgramTable(universe, marker, max_core_length, dict(sorted(counts_by_mask.items())))
    for S in targets or ():
        table.counts(S)
    return table


def ground_length(table: ProgramTable, S) -> int:
    """Shortest total program length (marker wrapper plus core) whose output contains ``S``."""
    return table.h + table.ground_core_length(S)


def multiplicity_spectrum(table: ProgramTable, S, excess: int) -> DegeneracySpectrum:
    if excess < 0:
        raise DomainError("excess must be nonnegative")
    k0 = table.ground_core_length(S)
    if k0 + excess > table.max_core_length:
        raise TableBoundError(
            f"spectrum of {as_object_set(S)} to excess {excess} needs cores of "
            f"{k0 + excess} bits; re-enumerate with max_core_length >= {k0 + excess}"
        )
    c = table.counts(S)
    return DegeneracySpectrum(k0, tuple(int(v) for v in c[k0 : k0 + excess + 1]))
