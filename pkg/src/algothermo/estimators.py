"""scikit-learn compatible front end.

``ThermodynamicSimilarity`` fits the toy machine (enumeration plus wrapper
automaton) and transforms ``(x, y)`` id pairs into reversible work values, so
it drops into pipelines, ``clone`` and grid searches like any transformer.
"""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import ensemble
from .automaton import build_automaton, growth_rate
from .jarzynski import Protocol, estimate
from .machine import ObjectSet, Universe, enumerate_cores

METHODS = ("direct", "ti", "jarzynski")


def check_pairs(X, n_objects: int) -> np.ndarray:
    """Validate an ``(n_pairs, 2)`` array of object ids."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"expected pairs with 2 columns, got shape {X.shape}")
    if not np.all(np.equal(np.mod(X, 1), 0)):
        raise ValueError("object ids must be integers")
    X = X.astype(np.int64)
    if X.min() < 0 or X.max() >= n_objects:
        raise ValueError(f"object ids must lie in [0, {n_objects})")
    return X


class ThermodynamicSimilarity(TransformerMixin, BaseEstimator):
    """Reversible work ``F(x, y) - F(x)`` as a pairwise similarity.

    Parameters
    ----------
    n_objects : int
        Universe size.
    marker : str
        Wrapper terminator bits; must not overlap itself.
    max_core_length : int
        Enumeration bound for cores.
    beta : float
        Inverse temperature; ``ln 2`` gives the Solomonoff weights.
    excess : int
        Excess cutoff above each ground length.
    method : {"direct", "ti", "jarzynski"}
        Exact free-energy difference, thermodynamic integration of the
        generalized force, or the non-equilibrium estimator.  The last two
        use the shared-window coupled ensemble with finite ``coupling``.
    coupling, nodes : float, int
        Coupling strength and quadrature nodes for ``"ti"``/``"jarzynski"``.
    steps, sweeps, trajectories, random_state : int
        Switching protocol for ``"jarzynski"``.
    """

    def __init__(
        self,
        n_objects=4,
        marker="011",
        max_core_length=19,
        beta=ensemble.LN2,
        excess=4,
        method="direct",
        coupling=50.0,
        nodes=64,
        steps=64,
        sweeps=200,
        trajectories=1000,
        random_state=0,
    ):
        self.n_objects = n_objects
        self.marker = marker
        self.max_core_length = max_core_length
        self.beta = beta
        self.excess = excess
        self.method = method
        self.coupling = coupling
        self.nodes = nodes
        self.steps = steps
        self.sweeps = sweeps
        self.trajectories = trajectories
        self.random_state = random_state

    def _check_params(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not isinstance(self.beta, numbers.Real) or self.beta <= 0:
            raise ValueError("beta must be a positive number")
        if not isinstance(self.excess, numbers.Integral) or self.excess < 0:
            raise ValueError("excess must be a nonnegative integer")
        if self.method != "direct" and not (isinstance(self.coupling, numbers.Real) and self.coupling > 0):
            raise ValueError("coupling must be positive for ti/jarzynski")

    def fit(self, X=None, y=None):
        """Enumerate the machine; ``X`` (optional pairs) is only validated."""
        self._check_params()
        self.universe_ = Universe(self.n_objects)
        self.automaton_ = build_automaton(self.marker)
        self.growth_ = growth_rate(self.automaton_)
        self.table_ = enumerate_cores(self.universe_, self.marker, self.max_core_length)
        if X is not None:
            check_pairs(X, self.n_objects)
        return self

    def _work(self, x: int, y: int) -> float:
        if x == y:
            return 0.0
        if self.method == "direct":
            return ensemble.reversible_work_direct(
                self.table_, self.automaton_, x, y, self.beta, self.excess, self.growth_.alpha
            ).work
        if self.method == "ti":
            return ensemble.reversible_work_TI(
                self.table_, self.automaton_, x, y, self.beta, self.coupling, self.excess, self.nodes
            )
        proto = Protocol.linear(
            self.steps, self.beta, self.coupling,
            sweeps=self.sweeps, trajectories=self.trajectories, seed=self.random_state,
        )
        return estimate(self.table_, self.automaton_, x, y, self.excess, proto).delta_f

    def score_pairs(self, X) -> np.ndarray:
        check_is_fitted(self, "table_")
        X = check_pairs(X, self.n_objects)
        return np.array([self._work(int(x), int(y)) for x, y in X])

    def transform(self, X) -> np.ndarray:
        """Work for each pair as a single feature column."""
        return self.score_pairs(X)[:, None]

    def get_feature_names_out(self, input_features=None):
        return np.array(["work"], dtype=object)

    def decompose(self, X) -> list[ensemble.WorkDecomposition]:
        """Depth / diversity split of the exact work for each pair."""
        check_is_fitted(self, "table_")
        X = check_pairs(X, self.n_objects)
        return [
            ensemble.high_temp_decomposition(
                self.table_, self.automaton_, int(x), int(y), self.beta, self.excess, self.growth_.alpha
            )
            for x, y in X
        ]

    def pairwise_work(self) -> np.ndarray:
        """``W[x, y]``: work to add ``y`` to ``x`` (not symmetric)."""
        check_is_fitted(self, "table_")
        n = self.n_objects
        return np.array([[self._work(x, y) for y in range(n)] for x in range(n)])

    def information_distance_matrix(self) -> np.ndarray:
        check_is_fitted(self, "table_")
        n = self.n_objects
        return np.array(
            [[ensemble.information_distance(self.table_, x, y) for y in range(n)] for x in range(n)]
        )

    def ground_lengths(self) -> np.ndarray:
        check_is_fitted(self, "table_")
        return np.array([self.table_.h + self.table_.ground_core_length(ObjectSet.of(i)) for i in range(self.n_objects)])
