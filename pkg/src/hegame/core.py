"""HEG instances, coalitions and partitions.

Agents are referred to either by their string id or by their position in
``Instance.agents``; internally a coalition is a sorted tuple of agent
positions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError, InvalidPartitionError, InvalidReferenceError

Coalition = tuple  # tuple[int, ...] of agent positions, ascending
AgentRef = Union[int, str]


def to_mask(coalition: Iterable[int]) -> int:
    m = 0
    for i in coalition:
        m |= 1 << i
    return m


def from_mask(mask: int) -> Coalition:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class _AgentIndex:
    """Mixin resolving agent ids/positions; needs ``self.agents``."""

    agents: tuple

    @cached_property
    def _positions(self) -> dict:
        return {a: i for i, a in enumerate(self.agents)}

    @property
    def n(self) -> int:
        return len(self.agents)

    def index(self, agent: AgentRef) -> int:
        if isinstance(agent, (int, np.integer)) and not isinstance(agent, bool):
            if 0 <= agent < len(self.agents):
                return int(agent)
            raise InvalidReferenceError(f"agent index {agent} out of range")
        try:
            return self._positions[agent]
        except (KeyError, TypeError):
            raise InvalidReferenceError(f"unknown agent {agent!r}") from None

    def coalition(self, members: Iterable[AgentRef]) -> Coalition:
        """Canonical coalition (sorted positions) from ids or positions."""
        return tuple(sorted({self.index(a) for a in members}))

    def ids(self, coalition: Iterable[int]) -> list:
        return [self.agents[i] for i in coalition]


@dataclass(frozen=True, eq=False)
class Instance(_AgentIndex):
    """A hedonic expertise game ``(N, S, e, kappa)``.

    ``expertise[i, s]`` is the expertise of agent ``i`` in skill ``s``.  When
    every entry is an integer the matrix is stored as int64 and
    ``level_bound`` holds beta, which makes all utility arithmetic exact.
    """

    agents: tuple
    skills: tuple
    expertise: np.ndarray
    kappa: int
    level_bound: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        agents = tuple(str(a) for a in self.agents)
        skills = tuple(str(s) for s in self.skills)
        if len(set(agents)) != len(agents):
            raise InvalidArgumentError("agent ids must be unique")
        if len(set(skills)) != len(skills):
            raise InvalidArgumentError("skill ids must be unique")
        if not agents:
            raise InvalidArgumentError("an instance needs at least one agent")
        e = np.asarray(self.expertise, dtype=np.float64)
        if e.size == 0:
            e = e.reshape(len(agents), len(skills))
        if e.shape != (len(agents), len(skills)):
            raise InvalidArgumentError(
                f"expertise has shape {e.shape}, expected {(len(agents), len(skills))}")
        if not np.all(np.isfinite(e)) or np.any(e < 0):
            raise InvalidArgumentError("expertise values must be finite and non-negative")
        kappa = self.kappa
        if isinstance(kappa, bool) or int(kappa) != kappa or not 1 <= kappa <= len(agents):
            raise InvalidArgumentError(f"kappa must be an integer in [1, {len(agents)}], got {kappa}")

        integral = bool(np.all(e == np.round(e)))
        beta = self.level_bound
        if beta is not None:
            if int(beta) != beta or beta < 0:
                raise InvalidArgumentError("level_bound must be a non-negative integer")
            if not integral or (e.size and e.max() > beta):
                raise InvalidArgumentError(f"expertise values must be integers in [0, {beta}]")
            beta = int(beta)
        elif integral:
            beta = int(e.max()) if e.size else 0
        e = e.astype(np.int64) if beta is not None else e
        e.setflags(write=False)

        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "skills", skills)
        object.__setattr__(self, "expertise", e)
        object.__setattr__(self, "kappa", int(kappa))
        object.__setattr__(self, "level_bound", beta)
        object.__setattr__(self, "meta", dict(self.meta))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.agents == other.agents and self.skills == other.skills
                and self.kappa == other.kappa and self.level_bound == other.level_bound
                and self.expertise.dtype == other.expertise.dtype
                and np.array_equal(self.expertise, other.expertise)
                and self.meta == other.meta)

    __hash__ = object.__hash__

    @property
    def integral(self) -> bool:
        return self.level_bound is not None

    # Every HEG utility is monotone (and submodular).
    monotone = True

    def skill_index(self, skill: AgentRef) -> int:
        if isinstance(skill, (int, np.integer)) and not isinstance(skill, bool):
            if 0 <= skill < len(self.skills):
                return int(skill)
        elif skill in self.skills:
            return self.skills.index(skill)
        raise InvalidReferenceError(f"unknown skill {skill!r}")

    def _scalar(self, value):
        return int(value) if self.integral else float(value)

    def joint_expertise_vector(self, coalition: Sequence[int]) -> np.ndarray:
        if len(coalition) == 0:
            return np.zeros(len(self.skills), dtype=self.expertise.dtype)
        return self.expertise[list(coalition)].max(axis=0)

    def utility(self, coalition: Iterable[AgentRef]):
        """Joint utility of a coalition given as ids or positions."""
        c = self.coalition(coalition)
        return self._scalar(self.joint_expertise_vector(c).sum())

    def mask_utilities(self, masks: np.ndarray) -> np.ndarray:
        return _kernels.mask_utilities(self.expertise, masks)


def joint_expertise(inst: Instance, c: Iterable[AgentRef], s: AgentRef):
    """Best expertise any member of ``c`` has in skill ``s``."""
    members = inst.coalition(c)
    if not members:
        raise InvalidArgumentError("joint expertise needs a non-empty coalition")
    return inst._scalar(inst.expertise[list(members), inst.skill_index(s)].max())


def joint_utility(inst: Instance, c: Iterable[AgentRef] = ()):
    """Sum over skills of the coalition's joint expertise; 0 for the empty set."""
    return inst.utility(c)


def marginal_gain(inst: Instance, c: Iterable[AgentRef], x: AgentRef):
    """Utility gained when ``x`` joins ``c``, computed skill by skill."""
    members = inst.coalition(c)
    xi = inst.index(x)
    if xi in members:
        raise InvalidArgumentError(f"agent {inst.agents[xi]!r} is already in the coalition")
    base = inst.joint_expertise_vector(members)
    return inst._scalar(np.maximum(inst.expertise[xi] - base, 0).sum())


@dataclass(frozen=True)
class Partition:
    """Disjoint coalitions ordered by their smallest member."""

    coalitions: tuple

    @classmethod
    def of(cls, blocks: Iterable[Iterable[int]]) -> "Partition":
        coalitions = []
        seen: set = set()
        for block in blocks:
            c = tuple(sorted(int(i) for i in block))
            if not c:
                continue
            if len(set(c)) != len(c) or seen.intersection(c):
                raise InvalidPartitionError("coalitions must be pairwise disjoint")
            seen.update(c)
            coalitions.append(c)
        coalitions.sort(key=lambda c: c[0])
        return cls(tuple(coalitions))

    @classmethod
    def from_ids(cls, game, blocks: Iterable[Iterable[AgentRef]]) -> "Partition":
        p = cls.of(game.coalition(b) for b in blocks)
        validate(game, p)
        return p

    def to_ids(self, game) -> list:
        return [game.ids(c) for c in self.coalitions]

    def __iter__(self) -> Iterator[Coalition]:
        return iter(self.coalitions)

    def __len__(self) -> int:
        return len(self.coalitions)

    @cached_property
    def _owner(self) -> dict:
        return {i: c for c in self.coalitions for i in c}

    def coalition_of(self, i: int) -> Coalition:
        try:
            return self._owner[i]
        except KeyError:
            raise InvalidPartitionError(f"agent {i} is not covered by the partition") from None

    def agents(self) -> list:
        return sorted(self._owner)

    def move(self, i: int, target: Coalition) -> "Partition":
        """Partition after agent ``i`` leaves its coalition and joins ``target``."""
        src = self.coalition_of(i)
        blocks = [c for c in self.coalitions if c != src and c != tuple(target)]
        blocks.append([j for j in src if j != i])
        blocks.append(list(target) + [i])
        return Partition.of(blocks)

    def induced(self, c: Iterable[int]) -> "Partition":
        """Partition arising when the agents of ``c`` deviate together; empty residues dropped."""
        cs = set(c)
        blocks = [[j for j in b if j not in cs] for b in self.coalitions]
        blocks.append(sorted(cs))
        return Partition.of(blocks)


def validate(game, p: Partition) -> None:
    """Raise :class:`InvalidPartitionError` unless ``p`` is feasible for ``game``."""
    covered = sorted(i for c in p.coalitions for i in c)
    if covered != list(range(game.n)):
        raise InvalidPartitionError("partition must cover every agent exactly once")
    for c in p.coalitions:
        if len(c) > game.kappa:
            raise InvalidPartitionError(
                f"coalition {game.ids(c)} exceeds the size cap {game.kappa}")


def agent_utility(game, p: Partition, i: AgentRef):
    """Utility of agent ``i`` in ``p``: the joint utility of its coalition."""
    return game.utility(p.coalition_of(game.index(i)))


def singletons(n: int) -> Partition:
    return Partition(tuple((i,) for i in range(n)))


def iter_partitions(n: int, kappa: int) -> Iterator[Partition]:
    """All partitions of ``range(n)`` into blocks of size <= kappa.

    The enumeration order is the canonical partition order used for
    tie-breaking: agent ``i`` is tried in each existing block (in order of
    creation) before opening a new block.
    """
    blocks: list = []

    def rec(i):
        if i == n:
            yield Partition(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            if len(b) < kappa:
                b.append(i)
                yield from rec(i + 1)
                b.pop()
        blocks.append([i])
        yield from rec(i + 1)
        blocks.pop()

    yield from rec(0)


@dataclass(frozen=True)
class _SpaceShape:
    partitions: tuple
    block_masks: np.ndarray
    owner_block: np.ndarray  # (P, n) index into block_masks


@lru_cache(maxsize=32)
def _space_shape(n: int, kappa: int) -> _SpaceShape:
    partitions = tuple(iter_partitions(n, kappa))
    block_ids: dict = {}
    owner = np.empty((len(partitions), n), dtype=np.int64)
    for r, p in enumerate(partitions):
        for c in p.coalitions:
            b = block_ids.setdefault(to_mask(c), len(block_ids))
            owner[r, list(c)] = b
    masks = np.fromiter(block_ids, dtype=np.int64, count=len(block_ids))
    return _SpaceShape(partitions, masks, owner)


class PartitionSpace:
    """Every feasible partition of a game with its (P, n) agent-utility matrix."""

    def __init__(self, game, limit: int):
        from .errors import CapabilityError

        if game.n > limit:
            raise CapabilityError(
                f"{game.n} agents exceed the exhaustive partition limit of {limit}")
        shape = _space_shape(game.n, game.kappa)
        self.partitions = shape.partitions
        block_utils = np.asarray(game.mask_utilities(shape.block_masks), dtype=np.float64)
        self.utilities = block_utils[shape.owner_block]
        self._index = None

    def __len__(self):
        return len(self.partitions)

    def row(self, p: Partition) -> int:
        if self._index is None:
            self._index = {q: r for r, q in enumerate(self.partitions)}
        return self._index[p]
