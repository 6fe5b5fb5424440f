import math
import random
import warnings
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

import oracles
from algothermo import (
    DegeneracySpectrum,
    DomainError,
    Marker,
    build_automaton,
    count_avoiding,
    effective_degeneracy,
    growth_rate,
    sample_wrapper,
    wrapper_count,
)
from algothermo.automaton import DEAD, prefix_function, wrapper_counts

PHI = (1 + math.sqrt(5)) / 2
MARKERS = oracles.valid_markers(4)


def test_marker_validation():
    assert Marker("011").h == 3
    for bad in ("", "11", "0102", "010", "0110"):
        with pytest.raises(DomainError):
            Marker(bad)


def test_valid_marker_list_matches_library():
    for L in range(1, 6):
        for m in oracles.bit_strings(L):
            try:
                Marker(m)
                ok = True
            except DomainError:
                ok = False
            assert ok == (not oracles.is_self_overlapping(m)), m


def test_prefix_function():
    assert prefix_function("abab") == [0, 0, 1, 2]
    assert prefix_function("aabaaab") == [0, 1, 0, 1, 2, 2, 3]


def test_transitions_for_default_marker():
    aut = build_automaton("011")
    assert aut.n_states == 3
    assert aut.transitions == ((1, 0), (1, 2), (1, DEAD))


def test_single_bit_marker():
    aut = build_automaton("0")
    assert aut.n_states == 1
    assert [count_avoiding(aut, n) for n in range(6)] == [1] * 6


@pytest.mark.parametrize("marker", MARKERS)
def test_matrix_shape_and_entries(marker):
    A = build_automaton(marker).matrix
    assert A.shape == (len(marker), len(marker))
    assert A.min() >= 0 and A.max() <= 2
    assert (A.sum(axis=1) <= 2).all()


def test_avoiding_examples():
    aut = build_automaton("011")
    assert count_avoiding(aut, 0) == 1
    assert count_avoiding(aut, 3) == 7
    assert count_avoiding(aut, 4) == 12


def test_wrapper_count_examples():
    aut = build_automaton("011")
    assert [wrapper_count(aut, d) for d in range(9)] == [0, 0, 0, 1, 2, 4, 7, 12, 20]
    assert wrapper_counts(aut, 8) == [wrapper_count(aut, d) for d in range(9)]


@pytest.mark.parametrize("marker", MARKERS)
def test_wrapper_count_vs_enumeration(marker):
    aut = build_automaton(marker)
    for d in range(0, 12):
        assert wrapper_count(aut, d) == len(oracles.wrappers(marker, d))


def test_accepts():
    aut = build_automaton("011")
    assert aut.accepts("0100") and not aut.accepts("0110")


def test_growth_rate_default():
    g = growth_rate(build_automaton("011"))
    assert abs(g.mu - PHI) < 1e-9
    assert abs(g.alpha - math.log2(PHI)) < 1e-9
    assert abs(g.alpha - 0.6942) < 1e-4
    # independent eigen-solve of the characteristic polynomial (1 - x)(x^2 - x - 1)
    roots = np.roots(np.polymul([-1, 1], [1, -1, -1]))
    assert abs(g.mu - max(roots.real)) < 1e-9


def test_growth_rate_single_bit():
    g = growth_rate(build_automaton("0"))
    assert g.mu == pytest.approx(1.0)
    assert g.alpha == pytest.approx(0.0, abs=1e-12)


def test_growth_rate_ratio_oracle():
    for marker in ("011", "0001"):
        aut = build_automaton(marker)
        g = growth_rate(aut)
        a = wrapper_counts(aut, 31)
        assert abs(a[31] / a[30] - g.mu) < 1e-4
        assert abs(g.mu - max(abs(np.linalg.eigvals(aut.matrix.astype(float))))) < 1e-8


@pytest.mark.parametrize("marker", [m for m in MARKERS if len(m) > 1])
def test_growth_rate_range(marker):
    g = growth_rate(build_automaton(marker))
    assert 1.0 <= g.mu < 2.0
    assert 0.0 <= g.alpha < 1.0


def test_effective_degeneracy_examples():
    flat = DegeneracySpectrum(3, (1, 0, 0, 0))
    assert effective_degeneracy(flat, 0.7, 3) == 1
    spec = DegeneracySpectrum(3, (1, 0, 1, 0, 5))
    assert effective_degeneracy(spec, 0.7, 0) == spec.m
    alpha = math.log2(PHI)
    assert effective_degeneracy(spec, alpha, 4) == pytest.approx(1 + PHI ** -2 + 5 * PHI ** -4)


def test_effective_degeneracy_errors():
    spec = DegeneracySpectrum(3, (1, 1))
    with pytest.raises(DomainError):
        effective_degeneracy(spec, 0.5, 2)
    with pytest.raises(DomainError):
        effective_degeneracy(spec, 1.0, 1)
    with pytest.warns(RuntimeWarning):
        effective_degeneracy(spec, 0.0, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        effective_degeneracy(DegeneracySpectrum(3, (1, 0)), 0.0, 1)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=10), st.floats(0.05, 0.95))
def test_effective_degeneracy_monotone(tail, alpha):
    spec = DegeneracySpectrum(0, (1, *tail))
    values = [effective_degeneracy(spec, alpha, k) for k in range(len(tail) + 1)]
    assert values[0] == 1
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_effective_degeneracy_increments_shrink(table):
    from algothermo import ObjectSet, multiplicity_spectrum

    alpha = math.log2(PHI)
    for S in (ObjectSet.of(0), ObjectSet.of(0, 1)):
        spec = multiplicity_spectrum(table, S, 8)
        steps = [c * 2.0 ** (-alpha * k) for k, c in enumerate(spec.counts) if k and c]
        growth = max(b / a for a, b in zip(spec.counts, spec.counts[2:]) if a)
        for a, b in zip(steps, steps[1:]):
            assert b / a <= 2.0 ** (-2 * alpha) * growth + 1e-12


def test_sample_wrapper_examples():
    aut = build_automaton("011")
    assert {sample_wrapper(aut, 3, s) for s in range(20)} == {"011"}
    with pytest.raises(DomainError):
        sample_wrapper(aut, 2, 0)


@pytest.mark.parametrize("d", [4, 6, 8])
def test_sample_wrapper_uniform(d):
    aut = build_automaton("011")
    support = oracles.wrappers("011", d)
    rng = random.Random(12345)
    draws = Counter(sample_wrapper(aut, d, rng) for _ in range(10_000))
    assert set(draws) <= set(support)
    observed = [draws[w] for w in support]
    assert chisquare(observed).pvalue > 0.01


@given(st.sampled_from(MARKERS), st.integers(0, 12), st.integers(0, 2**32))
@settings(max_examples=60)
def test_sampled_wrappers_are_wrappers(marker, extra, seed):
    aut = build_automaton(marker)
    d = len(marker) + extra
    if wrapper_count(aut, d) == 0:
        with pytest.raises(DomainError):
            sample_wrapper(aut, d, seed)
        return
    w = sample_wrapper(aut, d, seed)
    assert len(w) == d and oracles.is_wrapper(w, marker)
