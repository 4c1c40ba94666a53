"""Constructive algorithms for HEGs: imitative better-response dynamics, the
contractually individually stable swap procedure, and greedy coalitions."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from . import _kernels
from .config import Config, resolve, tolerance
from .core import Instance, Partition, from_mask, validate
from .errors import CapabilityError, InvalidArgumentError
from .hgcrp import psi


@dataclass
class MoveStep:
    kind: str  # "BetterResponse", "Imitation" or "CisSwap"
    agent: str
    source: list
    target: list
    utility_before: float
    utility_after: float
    psi_after: tuple
    partner: str | None = None
    gamma_before: int | None = None
    gamma_after: int | None = None


@dataclass
class MoveTrace:
    seed: int | None = None
    move_bound: int | None = None
    psi_initial: tuple = ()
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "move_bound": self.move_bound,
                "psi_initial": list(self.psi_initial),
                "steps": [dict(asdict(s), psi_after=list(s.psi_after)) for s in self.steps]}


def initial_block_partition(g: Instance, seed: int = 0) -> Partition:
    """Shuffle agents (seed 0 keeps instance order) and cut them into blocks of kappa."""
    order = np.arange(g.n) if seed == 0 else np.random.default_rng(seed).permutation(g.n)
    order = [int(i) for i in order]
    return Partition.of(order[lo:lo + g.kappa] for lo in range(0, g.n, g.kappa))


def _is_block_partition(g, p: Partition) -> bool:
    return sum(1 for c in p.coalitions if len(c) != g.kappa) <= 1


def move_bound(g: Instance) -> int | None:
    """beta * |S| * floor(|N|/kappa) * kappa for (0, beta) instances, else None."""
    if g.level_bound is None:
        return None
    return g.level_bound * len(g.skills) * (g.n // g.kappa) * g.kappa


class _State:
    """Mutable partition as a list of member lists; slots may become empty."""

    def __init__(self, p: Partition):
        self.slots = [list(c) for c in p.coalitions]
        self.where = {i: s for s, c in enumerate(self.slots) for i in c}

    def move(self, i, dst):
        self.slots[self.where[i]].remove(i)
        self.slots[dst].append(i)
        self.slots[dst].sort()
        self.where[i] = dst

    def partition(self) -> Partition:
        return Partition.of(self.slots)


def _better_response(g, state: _State, U, eps):
    """First agent (by index) with an improving move, into the first eligible coalition."""
    order = sorted((s for s, c in enumerate(state.slots) if c), key=lambda s: state.slots[s][0])
    for i in range(g.n):
        src = state.where[i]
        current = U(state.slots[src])
        for dst in order:
            if dst == src or len(state.slots[dst]) >= g.kappa:
                continue
            if U(state.slots[dst] + [i]) > current + eps:
                return i, dst
    return None


def _cached_utility(g):
    cache: dict = {}

    def U(members):
        key = tuple(sorted(members))
        if key not in cache:
            cache[key] = g.utility(key) if key else 0
        return cache[key]

    return U


def imitative_brd(g: Instance, p0: Partition, *, seed: int | None = None,
                  config: Config | None = None) -> tuple[Partition, MoveTrace]:
    """Better-response dynamics where former coalition-mates copy the last move.

    ``p0`` must consist of coalitions of exactly kappa agents plus at most one
    smaller one.  After an agent moves into a coalition that is still below
    kappa, the first agent left behind in its old coalition that would gain
    by following does so; otherwise the lowest-indexed agent with an improving move takes its
    first improving target.
    """
    validate(g, p0)
    if not _is_block_partition(g, p0):
        raise InvalidArgumentError(
            "initial partition must have all coalitions of size kappa except at most one")
    cfg = resolve(config)
    eps = tolerance(g, cfg)
    U = _cached_utility(g)
    state = _State(p0)
    trace = MoveTrace(seed=seed, move_bound=move_bound(g), psi_initial=psi(g, p0).values)
    last = None  # (source slot, target slot) of the previous move

    while True:
        move = None
        kind = "BetterResponse"
        if last is not None:
            src, dst = last
            followers = state.slots[src]
            if len(state.slots[dst]) < g.kappa:
                i = next((a for a in followers
                          if U(state.slots[dst] + [a]) > U(followers) + eps), None)
                if i is not None:
                    move, kind = (i, dst), "Imitation"
        if move is None:
            move = _better_response(g, state, U, eps)
        if move is None:
            break
        if len(trace.steps) >= cfg.max_steps:
            raise CapabilityError(f"dynamics exceeded {cfg.max_steps} steps")
        i, dst = move
        src = state.where[i]
        source = list(state.slots[src])
        before = U(source)
        after = U(state.slots[dst] + [i])
        target = sorted(state.slots[dst] + [i])
        state.move(i, dst)
        trace.steps.append(MoveStep(kind, g.agents[i], g.ids(source), g.ids(target),
                                    before, after, psi(g, state.partition()).values))
        last = (src, dst)
    return state.partition(), trace


def better_response_dynamics(g, p0: Partition, *, config: Config | None = None
                             ) -> tuple[Partition, MoveTrace]:
    """Unrestricted better-response dynamics from any partition.

    No move-count guarantee; only the step cap in ``config`` stops it.
    """
    validate(g, p0)
    cfg = resolve(config)
    eps = tolerance(g, cfg)
    U = _cached_utility(g)
    state = _State(p0)
    trace = MoveTrace(psi_initial=psi(g, p0).values)
    while (move := _better_response(g, state, U, eps)) is not None:
        if len(trace.steps) >= cfg.max_steps:
            raise CapabilityError(f"dynamics exceeded {cfg.max_steps} steps")
        i, dst = move
        source = list(state.slots[state.where[i]])
        target = sorted(state.slots[dst] + [i])
        before, after = U(source), U(target)
        state.move(i, dst)
        trace.steps.append(MoveStep("BetterResponse", g.agents[i], g.ids(source), g.ids(target),
                                    before, after, psi(g, state.partition()).values))
    return state.partition(), trace


def is_critical(g: Instance, i, c: Iterable) -> bool:
    """Whether agent ``i`` strictly tops every other member of ``c`` in some skill."""
    i = g.index(i)
    others = [j for j in g.coalition(c) if j != i]
    return bool(np.any(g.expertise[i] > g.joint_expertise_vector(others)))


def gamma(g: Instance, c: Iterable) -> int:
    """Number of members that are critical for their own coalition."""
    members = g.coalition(c)
    return sum(is_critical(g, i, members) for i in members)


def cis_algorithm(g: Instance, seed: int = 0, *, config: Config | None = None
                  ) -> tuple[Partition, MoveTrace]:
    """Reach a CIS partition by swapping non-critical agents out of full coalitions.

    Starting from :func:`initial_block_partition`, while some full coalition
    ``C`` holds an agent ``j`` whose removal costs ``C`` nothing and who would
    be better off in the leftover coalition ``L``, ``j`` trades places with
    the first agent of ``L`` that is critical for ``C``.
    """
    cfg = resolve(config)
    eps = tolerance(g, cfg)
    p0 = initial_block_partition(g, seed)
    trace = MoveTrace(seed=seed, psi_initial=psi(g, p0).values)
    full = [list(c) for c in p0.coalitions if len(c) == g.kappa]
    rest = [list(c) for c in p0.coalitions if len(c) != g.kappa]
    if not rest:
        return p0, trace
    L = rest[0]
    U = _cached_utility(g)
    evicted = [set() for _ in full]

    def partition():
        return Partition.of(full + [L])

    while True:
        swap = None
        for s, C in enumerate(full):
            uc = U(C)
            for j in C:
                others = [a for a in C if a != j]
                if U(others) + eps >= uc and U(L + [j]) > uc + eps:
                    swap = s, j
                    break
            if swap:
                break
        if swap is None:
            break
        s, j = swap
        C = full[s]
        partner = next((a for a in L if is_critical(g, a, C)), None)
        if partner is None:
            raise RuntimeError("no critical agent in the leftover coalition; utilities inconsistent")
        if partner in evicted[s]:
            raise RuntimeError(f"agent {g.agents[partner]} re-entered a coalition it was swapped out of")
        if len(trace.steps) >= cfg.max_steps:
            raise CapabilityError(f"swap procedure exceeded {cfg.max_steps} steps")
        before, g_before = U(C), gamma(g, C)
        new_c = sorted([a for a in C if a != j] + [partner])
        new_l = sorted([a for a in L if a != partner] + [j])
        full[s], L = new_c, new_l
        evicted[s].add(j)
        trace.steps.append(MoveStep("CisSwap", g.agents[j], g.ids(C), g.ids(new_l), before,
                                    U(new_l), psi(g, partition()).values,
                                    partner=g.agents[partner], gamma_before=g_before,
                                    gamma_after=gamma(g, new_c)))
    return partition(), trace


def _pool_indices(g: Instance, pool) -> list:
    idx = sorted({g.index(a) for a in (range(g.n) if pool is None else pool)})
    if not idx:
        raise InvalidArgumentError("agent pool must be non-empty")
    return idx


def greedy_max_joint_utility(g: Instance, pool: Iterable | None = None) -> tuple:
    """Grow a coalition from empty, adding the agent with the largest marginal gain.

    Ties go to the lowest index; stops at ``min(kappa, |pool|)`` members even if
    gains reach zero.
    """
    remaining = _pool_indices(g, pool)
    chosen: list = []
    joint = np.zeros(len(g.skills), dtype=g.expertise.dtype)
    for _ in range(min(g.kappa, len(remaining))):
        gains = np.maximum(g.expertise[remaining] - joint, 0).sum(axis=1)
        k = int(np.argmax(gains))
        pick = remaining.pop(k)
        chosen.append(pick)
        joint = np.maximum(joint, g.expertise[pick])
    return tuple(sorted(chosen))


def brute_force_max_joint_utility(g: Instance, pool: Iterable | None = None, *,
                                  config: Config | None = None) -> tuple:
    """Exact best coalition of at most kappa pool agents; earliest subset wins ties."""
    idx = _pool_indices(g, pool)
    kmax = min(g.kappa, len(idx))
    count = _kernels.subset_count(len(idx), kmax)
    if count > resolve(config).subset_budget:
        raise CapabilityError(f"{count} subsets exceed the subset budget")
    masks = _kernels.combination_masks(len(idx), kmax)
    utils = _kernels.mask_utilities(np.ascontiguousarray(g.expertise[idx]), masks)
    k = int(np.argmax(utils))
    return tuple(idx[i] for i in from_mask(int(masks[k])))


def greedy_core_partition(g: Instance) -> Partition:
    """Repeatedly carve a greedy coalition out of the remaining agents."""
    remaining = set(range(g.n))
    blocks = []
    while remaining:
        c = greedy_max_joint_utility(g, remaining)
        blocks.append(c)
        remaining.difference_update(c)
    return Partition.of(blocks)
