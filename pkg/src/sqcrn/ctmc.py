"""Exact bounded CTMC semantics of a CRN, used as the reference oracle.

Everything here works on an explicit, finite state space: build it by
breadth-first closure of the initial state under the reactions (dropping
successors above per-species caps), then query hitting times, stationary
distributions of bottom components, transient distributions by
uniformization, cylinder probabilities, or sample runs with SSA.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.stats import poisson

from . import kernels
from .crn import CRN, ConcreteState, enabled, propensity

DEFAULT_STATE_LIMIT = 200_000
DIRECT_SOLVE_LIMIT = 10_000


class StateSpaceOverflow(RuntimeError):
    pass


class AbsorbingStateError(ValueError):
    pass


class IllConditionedError(ArithmeticError):
    """A linear solve returned a solution that fails its own residual check."""


class NotBottomSCCError(ValueError):
    pass


@dataclass(frozen=True)
class ConcreteCTMC:
    states: tuple
    rates: sp.csr_matrix
    initial_distribution: np.ndarray
    caps: tuple[int, ...] | None = None
    dropped_mass: float = 0.0
    index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})
        if self.rates.diagonal().any():
            raise ValueError("rate matrix must have a zero diagonal")

    @classmethod
    def from_rates(cls, rates, initial=0, states: Sequence | None = None) -> "ConcreteCTMC":
        """Wrap an explicit rate matrix; ``initial`` is a state index or a distribution."""
        R = sp.csr_matrix(np.asarray(rates, dtype=float) if not sp.issparse(rates) else rates, dtype=float)
        n = R.shape[0]
        if np.isscalar(initial):
            pi0 = np.zeros(n)
            pi0[int(initial)] = 1.0
        else:
            pi0 = np.asarray(initial, dtype=float)
        return cls(tuple(states) if states is not None else tuple(range(n)), R, pi0)

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def exit_rates(self) -> np.ndarray:
        return np.asarray(self.rates.sum(axis=1)).ravel()

    def state_index(self, state) -> int:
        return self.index[tuple(state) if isinstance(state, list) else state]


@dataclass(frozen=True)
class CylinderTemplate:
    states: tuple[int, ...]
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.states) != len(self.intervals) + 1 or not self.intervals:
            raise ValueError("template needs n+2 states and n+1 intervals, n >= 0")
        for lo, hi in self.intervals:
            if lo < 0 or lo > hi:
                raise ValueError(f"bad interval [{lo}, {hi}]")


@dataclass(frozen=True)
class TimedRun:
    states: tuple[ConcreteState, ...]
    sojourns: tuple[float, ...]
    final_state: ConcreteState
    horizon: float

    @property
    def jump_times(self) -> tuple[float, ...]:
        return tuple(np.cumsum(self.sojourns)) if self.sojourns else ()


def build_bounded_ctmc(
    crn: CRN, caps: Sequence[int], state_limit: int = DEFAULT_STATE_LIMIT
) -> ConcreteCTMC:
    caps = tuple(int(c) for c in caps)
    if len(caps) != len(crn.species):
        raise ValueError("one cap per species required")
    x0 = tuple(crn.initial_state)
    if any(x > c for x, c in zip(x0, caps)):
        raise ValueError(f"initial state {x0} exceeds caps {caps}")
    index = {x0: 0}
    states = [x0]
    rows, cols, vals = [], [], []
    dropped = 0.0
    queue = deque([x0])
    while queue:
        x = queue.popleft()
        i = index[x]
        for reaction in crn.reactions:
            if not enabled(reaction, x):
                continue
            y = tuple(a + d for a, d in zip(x, reaction.change))
            a = propensity(crn, reaction, x)
            if y == x:
                continue
            if any(v > c for v, c in zip(y, caps)):
                dropped += a
                continue
            j = index.get(y)
            if j is None:
                if len(states) >= state_limit:
                    raise StateSpaceOverflow(f"more than {state_limit} states under caps {caps}")
                j = index[y] = len(states)
                states.append(y)
                queue.append(y)
            rows.append(i)
            cols.append(j)
            vals.append(a)
    n = len(states)
    # duplicates (distinct reactions with equal change) are summed by the COO->CSR conversion
    R = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    R.sum_duplicates()
    pi0 = np.zeros(n)
    pi0[0] = 1.0
    return ConcreteCTMC(tuple(states), R, pi0, caps, dropped, index)


def exit_rate(ctmc: ConcreteCTMC, s: int) -> float:
    return float(ctmc.rates[s].sum())


def embedded_probability(ctmc: ConcreteCTMC, s: int, s2: int) -> float:
    e = exit_rate(ctmc, s)
    if e <= 0:
        raise AbsorbingStateError(f"state {s} is absorbing; embedded probabilities are undefined")
    return float(ctmc.rates[s, s2]) / e


def cylinder_probability(ctmc: ConcreteCTMC, template: CylinderTemplate) -> float:
    p = float(ctmc.initial_distribution[template.states[0]])
    for (s, s2), (lo, hi) in zip(zip(template.states, template.states[1:]), template.intervals):
        if p == 0.0:
            return 0.0
        e = exit_rate(ctmc, s)
        r = float(ctmc.rates[s, s2])
        if r == 0.0:
            return 0.0
        upper = 0.0 if math.isinf(hi) else math.exp(-e * hi)
        p *= (r / e) * (math.exp(-e * lo) - upper)
    return p


def transient_distribution(ctmc: ConcreteCTMC, t: float, epsilon: float = 1e-8) -> np.ndarray:
    """Distribution at time ``t`` by uniformization; Poisson tails of mass <= epsilon are cut."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    pi = ctmc.initial_distribution.astype(float).copy()
    exits = ctmc.exit_rates
    q = exits.max() * 1.02
    if t == 0 or q == 0:
        return pi
    qt = q * t
    left = int(poisson.ppf(epsilon / 2, qt)) if qt > 25 else 0
    right = int(poisson.isf(epsilon / 2, qt)) + 1
    weights = poisson.pmf(np.arange(left, right + 1), qt)
    RT = ctmc.rates.T.tocsr()
    result = np.zeros_like(pi)
    v = pi
    for k in range(right + 1):
        if k >= left:
            result += weights[k - left] * v
        v = v + (RT @ v - exits * v) / q
    return result


def _backward_reachable(RT: sp.csr_matrix, seeds: np.ndarray, blocked: np.ndarray) -> np.ndarray:
    """States that can reach a seed without passing through a blocked state (seeds included)."""
    seen = seeds.copy()
    stack = list(np.flatnonzero(seeds))
    indptr, indices = RT.indptr, RT.indices
    while stack:
        j = stack.pop()
        for i in indices[indptr[j] : indptr[j + 1]]:
            if not seen[i] and not blocked[i]:
                seen[i] = True
                stack.append(i)
    return seen


def hitting_times_from_rates(R: sp.spmatrix, target: np.ndarray) -> np.ndarray:
    """Expected time to reach the ``target`` mask from every state of the rate matrix ``R``.

    States that reach the target with probability < 1 get ``inf``.
    """
    R = sp.csr_matrix(R, dtype=float)
    n = R.shape[0]
    target = np.asarray(target, dtype=bool)
    RT = R.T.tocsr()
    can_reach = _backward_reachable(RT, target, np.zeros(n, dtype=bool))
    bad = ~can_reach
    # from these, a state that cannot reach the target is hit with positive probability
    doomed = _backward_reachable(RT, bad, target)
    finite = ~target & ~doomed
    h = np.full(n, np.inf)
    h[target] = 0.0
    idx = np.flatnonzero(finite)
    if idx.size:
        exits = np.asarray(R.sum(axis=1)).ravel()
        sub = R[idx][:, idx]
        A = (sp.diags(exits[idx]) - sub).tocsc()
        b = np.ones(idx.size)
        if idx.size < DIRECT_SOLVE_LIMIT:
            with warnings.catch_warnings():
                # singularity is reported by the residual check below
                warnings.simplefilter("ignore", spla.MatrixRankWarning)
                x = spla.spsolve(A, b)
        else:
            x, _ = spla.bicgstab(A, b, rtol=1e-12, maxiter=10 * idx.size)
            for _ in range(3):
                resid = b - A @ x
                dx, _ = spla.bicgstab(A, resid, rtol=1e-12, maxiter=10 * idx.size)
                x = x + 0.9 * dx
        x = np.atleast_1d(x)
        resid = np.abs(A @ x - b) / np.maximum(1.0, exits[idx] * np.abs(x))
        if not (np.all(np.isfinite(x)) and np.all(x >= 0) and resid.max() < 1e-6):
            raise IllConditionedError(f"hitting-time system is numerically singular (residual {resid.max():.1e})")
        h[idx] = x
    return h


def mean_hitting_time(
    ctmc: ConcreteCTMC, target: Callable[[ConcreteState], bool] | Iterable[int]
) -> np.ndarray:
    """Expected first-passage time into ``target`` (predicate on states or index set) per start state."""
    mask = np.zeros(ctmc.size, dtype=bool)
    if callable(target):
        for i, s in enumerate(ctmc.states):
            mask[i] = bool(target(s))
    else:
        mask[list(target)] = True
    return hitting_times_from_rates(ctmc.rates, mask)


def bscc_steady_state(ctmc: ConcreteCTMC, bscc: Iterable[int]) -> np.ndarray:
    """Stationary distribution of the chain restricted to a bottom SCC, ordered as given."""
    members = list(bscc)
    member_set = set(members)
    R = ctmc.rates
    for i in members:
        row = R[i]
        if any(j not in member_set for j in row.indices[row.data > 0]):
            raise NotBottomSCCError(f"state {i} has a transition leaving the set")
    sub = R[members][:, members]
    n_comp, _ = sp.csgraph.connected_components(sub, directed=True, connection="strong")
    if n_comp != 1:
        raise NotBottomSCCError("set is not strongly connected")
    k = len(members)
    if k == 1:
        return np.ones(1)
    Q = (sub - sp.diags(np.asarray(sub.sum(axis=1)).ravel())).toarray()
    # pi Q = 0 with sum(pi) = 1: replace one balance equation by normalization
    A = Q.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def _ssa_arrays(crn: CRN):
    shape = (len(crn.reactions), len(crn.species))
    reactants = np.array([r.reactants for r in crn.reactions], dtype=np.int64).reshape(shape)
    change = np.array([r.change for r in crn.reactions], dtype=np.int64).reshape(shape)
    rates = np.array([r.rate for r in crn.reactions], dtype=np.float64)
    return reactants, change, rates


_CHUNK = 4096


def ssa_sample(crn: CRN, horizon: float, seed: int, backend=None) -> TimedRun:
    """One Gillespie run up to ``horizon``; identical for a given seed on either kernel backend."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    k = backend or kernels
    reactants, change, rates = _ssa_arrays(crn)
    rng = np.random.default_rng(seed)
    x = np.array(crn.initial_state, dtype=np.int64)
    states = [tuple(crn.initial_state)]
    jumps: list[float] = []
    t = 0.0
    times_buf = np.empty(_CHUNK)
    states_buf = np.empty((_CHUNK, len(crn.species)), dtype=np.int64)
    if horizon > 0 and len(crn.reactions):
        while True:
            u = rng.random(2 * _CHUNK)
            t, steps, _, status = k.ssa_advance(x, t, horizon, reactants, change, rates, u, times_buf, states_buf)
            jumps.extend(times_buf[:steps].tolist())
            states.extend(map(tuple, states_buf[:steps].tolist()))
            if status != kernels.NEED_MORE:
                break
    times = [0.0] + jumps
    sojourns = tuple(b - a for a, b in zip(times, times[1:]))
    return TimedRun(tuple(states), sojourns, states[-1], horizon)


def ssa_final_state(crn: CRN, horizon: float, seed: int, backend=None) -> ConcreteState:
    k = backend or kernels
    reactants, change, rates = _ssa_arrays(crn)
    rng = np.random.default_rng(seed)
    x = np.array(crn.initial_state, dtype=np.int64)
    t = 0.0
    if horizon > 0 and len(crn.reactions):
        while True:
            u = rng.random(2 * _CHUNK)
            t, _, status = k.ssa_final(x, t, horizon, reactants, change, rates, u)
            if status != kernels.NEED_MORE:
                break
    return tuple(int(v) for v in x)


def ssa_frequency(
    crn: CRN, horizon: float, seeds: Iterable[int], predicate: Callable[[ConcreteState], bool], backend=None
) -> float:
    """Fraction of seeded runs whose state at ``horizon`` satisfies ``predicate``."""
    hits = total = 0
    for seed in seeds:
        total += 1
        hits += bool(predicate(ssa_final_state(crn, horizon, seed, backend)))
    return hits / total if total else float("nan")


def write_triplets(ctmc: ConcreteCTMC, path) -> None:
    """Dump the rate matrix as ``row col rate`` lines preceded by a ``# n nnz`` header and the state list."""
    coo = ctmc.rates.tocoo()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {ctmc.size} {coo.nnz}\n")
        for i, s in enumerate(ctmc.states):
            fh.write(f"# state {i} {' '.join(map(str, s)) if isinstance(s, tuple) else s}\n")
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            fh.write(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}\n")
