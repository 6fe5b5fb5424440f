"""Non-equilibrium work estimation over the coupled program ensemble.

The chain lives on collapsed states ``(core, d)``: a core containing ``x``
together with a wrapper length ``d``, weighted by the wrapper count
``a_d``.  Energy depends on ``|p| = d + |core|`` and on whether the core
outputs ``y``, so concrete wrappers never matter for the dynamics.

Each Metropolis update proposes from the ``lam = 0`` equilibrium
(independence sampler) and accepts with ``min(1, exp(-beta dE_coupling))``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .automaton import WrapperAutomaton, sample_wrapper, wrapper_counts
from .ensemble import HARD, coupled_free_energy_difference
from .exceptions import DomainError, UnsatisfiableError
from .machine import ObjectSet, ProgramTable, ground_length

BATCH = 1024


@dataclass(frozen=True, eq=False)
class StateSpace:
    x: int
    y: int
    excess: int
    bound: int
    automaton: WrapperAutomaton
    cores: tuple[str, ...]
    core_length: np.ndarray
    d: np.ndarray
    has_y: np.ndarray
    multiplicity: np.ndarray

    def __len__(self):
        return len(self.cores)

    @property
    def program_count(self) -> int:
        return sum(int(m) for m in self.multiplicity)

    @property
    def missing_y(self) -> np.ndarray:
        return (~self.has_y).astype(np.int64)

    def log_weights(self, beta: float, lam: float = 0.0, coupling: float = 0.0) -> np.ndarray:
        length = self.core_length + self.d
        return np.log(self.multiplicity.astype(float)) - beta * (length + coupling * lam * self.missing_y)

    def distribution(self, beta: float, lam: float = 0.0, coupling: float = 0.0) -> np.ndarray:
        """Exact equilibrium probabilities over states."""
        lw = self.log_weights(beta, lam, coupling)
        p = np.exp(lw - lw.max())
        return p / p.sum()

    def exact_delta_f(self, beta: float, coupling: float) -> float:
        """``F(1) - F(0)`` summed over the state space itself."""
        lw0 = self.log_weights(beta)
        lw1 = self.log_weights(beta, 1.0, coupling)
        return float(-(np.logaddexp.reduce(lw1) - np.logaddexp.reduce(lw0)) / beta)

    def energy(self, i: int, lam: float, coupling: float) -> float:
        return float(self.core_length[i] + self.d[i]) + coupling * lam * int(not self.has_y[i])

    def materialize(self, i: int, seed=None) -> str:
        """A concrete program for state ``i`` with a uniformly drawn wrapper."""
        return sample_wrapper(self.automaton, int(self.d[i]), seed) + self.cores[i]


def build_state_space(table: ProgramTable, aut: WrapperAutomaton, x: int, y: int, excess: int) -> StateSpace:
    """Every admissible ``(core, d)`` with ``x`` in the output and ``|p| <= ground({x,y}) + excess``."""
    if excess < 0:
        raise DomainError("excess must be nonnegative")
    bound = ground_length(table, ObjectSet.of(x, y)) + excess
    h = table.h
    if bound - h > table.max_core_length:
        raise UnsatisfiableError(
            f"window needs cores of {bound - h} bits, table stops at {table.max_core_length}"
        )
    a = wrapper_counts(aut, bound)
    cores, lengths, ds, flags, mult = [], [], [], [], []
    for bits, length, mask in table.iter_cores():
        if length > bound - h:
            break
        if not mask >> x & 1:
            continue
        for d in range(h, bound - length + 1):
            cores.append(bits)
            lengths.append(length)
            ds.append(d)
            flags.append(bool(mask >> y & 1))
            mult.append(a[d])
    if not cores:
        raise UnsatisfiableError("empty state space")
    return StateSpace(
        x, y, excess, bound, aut, tuple(cores),
        np.array(lengths, dtype=np.int64), np.array(ds, dtype=np.int64),
        np.array(flags, dtype=bool), np.array(mult, dtype=np.int64),
    )


@dataclass(frozen=True)
class Protocol:
    """Switching schedule ``0 = lam_0 < ... < lam_M = 1`` and sampling budget."""

    schedule: tuple[float, ...]
    beta: float
    coupling: float
    sweeps: int = 200
    trajectories: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "schedule", tuple(float(v) for v in self.schedule))
        s = self.schedule
        if len(s) < 2 or s[0] != 0.0 or s[-1] != 1.0:
            raise DomainError("schedule must start at exactly 0 and end at exactly 1")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise DomainError("schedule must be strictly increasing")
        if self.beta <= 0:
            raise DomainError("beta must be positive")
        if self.coupling == HARD or not 0 <= self.coupling < math.inf:
            raise DomainError("Jarzynski switching needs a finite coupling")
        if self.sweeps < 0 or self.trajectories < 1:
            raise DomainError("sweeps must be >= 0 and trajectories >= 1")

    @classmethod
    def linear(cls, steps: int, beta: float, coupling: float, **kw) -> "Protocol":
        if steps < 1:
            raise DomainError("need at least one switching step")
        schedule = [k / steps for k in range(steps + 1)]
        return cls(tuple(schedule), beta, coupling, **kw)

    @property
    def steps(self) -> int:
        return len(self.schedule) - 1


@dataclass(frozen=True)
class SamplerState:
    index: int
    core: str
    d: int
    energy: float


def _proposal_cdf(space: StateSpace, beta: float) -> np.ndarray:
    cdf = np.cumsum(space.distribution(beta))
    cdf[-1] = 1.0
    return cdf


def _draw(cdf: np.ndarray, u) -> np.ndarray:
    return np.searchsorted(cdf, u, side="right")


def initial_state(space: StateSpace, beta: float, rng: np.random.Generator) -> SamplerState:
    """Exact draw from the ``lam = 0`` equilibrium."""
    i = int(_draw(_proposal_cdf(space, beta), rng.random()))
    return _state(space, i, 0.0, 0.0)


def _state(space, i, lam, coupling) -> SamplerState:
    return SamplerState(i, space.cores[i], int(space.d[i]), space.energy(i, lam, coupling))


def equilibrium_step(
    space: StateSpace,
    state: SamplerState,
    lam: float,
    beta: float,
    coupling: float,
    rng: np.random.Generator,
) -> SamplerState:
    """One independence-sampler Metropolis update targeting ``pi(. | lam)``."""
    u_prop, u_acc = rng.random(2)
    j = int(_draw(_proposal_cdf(space, beta), u_prop))
    miss = space.missing_y
    if miss[j] <= miss[state.index] or u_acc < math.exp(-beta * coupling * lam):
        return _state(space, j, lam, coupling)
    return _state(space, state.index, lam, coupling)


def trajectory_rngs(protocol: Protocol) -> list[np.random.Generator]:
    """Independent per-trajectory generators derived from the protocol seed."""
    children = np.random.SeedSequence(protocol.seed).spawn(protocol.trajectories)
    return [np.random.default_rng(c) for c in children]


def run_trajectory(space: StateSpace, protocol: Protocol, rng: np.random.Generator) -> float:
    """Work accumulated along one switching trajectory.

    Work is collected as ``E_{k+1}(p) - E_k(p)`` at fixed state, then the
    chain is equilibrated at ``lam_{k+1}``.  The final equilibration is
    skipped since it no longer changes the work.
    """
    lam, beta, J = protocol.schedule, protocol.beta, protocol.coupling
    cdf = _proposal_cdf(space, beta)
    miss = space.missing_y
    state = int(_draw(cdf, rng.random()))
    work = 0.0
    for k in range(protocol.steps):
        work += J * (lam[k + 1] - lam[k]) * int(miss[state])
        if k == protocol.steps - 1:
            break
        threshold = math.exp(-beta * J * lam[k + 1])
        u = rng.random(2 * protocol.sweeps)
        props = _draw(cdf, u[: protocol.sweeps])
        for j, ua in zip(props, u[protocol.sweeps :]):
            if miss[j] <= miss[state] or ua < threshold:
                state = int(j)
    return work


def _run_batch(space: StateSpace, protocol: Protocol, rngs: list[np.random.Generator]) -> np.ndarray:
    # Same random stream per trajectory as run_trajectory, vectorized across trajectories.
    lam, beta, J = protocol.schedule, protocol.beta, protocol.coupling
    cdf = _proposal_cdf(space, beta)
    miss = space.missing_y
    state = _draw(cdf, np.array([g.random() for g in rngs]))
    work = np.zeros(len(rngs))
    n = protocol.sweeps
    for k in range(protocol.steps):
        work += J * (lam[k + 1] - lam[k]) * miss[state]
        if k == protocol.steps - 1:
            break
        threshold = math.exp(-beta * J * lam[k + 1])
        u = np.stack([g.random(2 * n) for g in rngs])
        props = _draw(cdf, u[:, :n])
        for s in range(n):
            j = props[:, s]
            accept = (miss[j] <= miss[state]) | (u[:, n + s] < threshold)
            state = np.where(accept, j, state)
    return work


def simulate(space: StateSpace, protocol: Protocol, threads: int = 1) -> np.ndarray:
    """Work of every trajectory, in trajectory order."""
    rngs = trajectory_rngs(protocol)
    batches = [rngs[i : i + BATCH] for i in range(0, len(rngs), BATCH)]
    if threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _run_batch(space, protocol, b), batches))
    else:
        parts = [_run_batch(space, protocol, b) for b in batches]
    return np.concatenate(parts)


def log_mean_exp(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    top = values.max()
    return float(top + math.log(np.mean(np.exp(values - top))))


def jarzynski_free_energy(works: np.ndarray, beta: float) -> float:
    """``-beta^-1 ln <exp(-beta W)>``."""
    return -log_mean_exp(-beta * np.asarray(works)) / beta


def jackknife_error(works: np.ndarray, beta: float) -> float:
    """Leave-one-out jackknife standard error of the Jarzynski estimator."""
    works = np.asarray(works, dtype=float)
    n = works.size
    if n < 2:
        return 0.0
    v = -beta * works
    prefix = np.logaddexp.accumulate(v)
    suffix = np.logaddexp.accumulate(v[::-1])[::-1]
    loo = np.empty(n)
    loo[0], loo[-1] = suffix[1], prefix[-2]
    if n > 2:
        loo[1:-1] = np.logaddexp(prefix[:-2], suffix[2:])
    estimates = -(loo - math.log(n - 1)) / beta
    return float(math.sqrt((n - 1) / n * np.sum((estimates - estimates.mean()) ** 2)))


@dataclass(frozen=True)
class WorkEstimate:
    delta_f: float
    standard_error: float
    mean_work: float
    work_standard_error: float
    exact_delta_f: float
    trajectories: int
    works: np.ndarray = field(repr=False, compare=False)

    @property
    def dissipation(self) -> float:
        return self.mean_work - self.exact_delta_f

    @property
    def bias(self) -> float:
        return self.delta_f - self.exact_delta_f

    def summary(self) -> dict:
        return {
            "delta_f_estimate": self.delta_f,
            "standard_error": self.standard_error,
            "mean_work": self.mean_work,
            "dissipation": self.dissipation,
            "exact_delta_f": self.exact_delta_f,
            "trajectories": self.trajectories,
        }


def estimate(
    table: ProgramTable,
    aut: WrapperAutomaton,
    x: int,
    y: int,
    excess: int,
    protocol: Protocol,
    threads: int = 1,
) -> WorkEstimate:
    """Jarzynski estimate of the coupled free-energy difference, checked against the exact value."""
    if protocol.trajectories < 2:
        raise DomainError("need at least two trajectories")
    space = build_state_space(table, aut, x, y, excess)
    works = simulate(space, protocol, threads)
    exact = coupled_free_energy_difference(table, aut, x, y, protocol.beta, protocol.coupling, excess)
    return WorkEstimate(
        delta_f=jarzynski_free_energy(works, protocol.beta),
        standard_error=jackknife_error(works, protocol.beta),
        mean_work=float(works.mean()),
        work_standard_error=float(works.std(ddof=1) / math.sqrt(works.size)),
        exact_delta_f=exact,
        trajectories=works.size,
        works=works,
    )
