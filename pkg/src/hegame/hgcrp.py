"""Hedonic games with common ranking property and a monotone submodular
joint utility, plus the lexicographic potential over partitions."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .config import Config, resolve, tolerance
from .core import Instance, Partition, PartitionSpace, _AgentIndex, from_mask, to_mask, validate
from .errors import CapabilityError, InvalidArgumentError


class HgcrpInstance(_AgentIndex):
    """A triple ``(N, U, kappa)`` with ``U`` given as a table or a callable.

    Table form stores ``U`` for every subset as an array indexed by bitmask
    (entry 0 is the empty set, fixed at 0).  Callable form receives a
    coalition as a tuple of agent positions.
    """

    def __init__(self, agents: Sequence[str], kappa: int, *, values: np.ndarray | None = None,
                 function: Callable | None = None, batch: Callable | None = None,
                 integral: bool = False, monotone: bool | None = None):
        self.agents = tuple(str(a) for a in agents)
        if len(set(self.agents)) != len(self.agents) or not self.agents:
            raise InvalidArgumentError("agent ids must be unique and non-empty")
        if isinstance(kappa, bool) or int(kappa) != kappa or not 1 <= kappa <= len(self.agents):
            raise InvalidArgumentError(f"kappa must be an integer in [1, {len(self.agents)}]")
        self.kappa = int(kappa)
        if (values is None) == (function is None):
            raise InvalidArgumentError("give exactly one of a utility table or a function")
        if values is not None:
            values = np.asarray(values, dtype=np.float64)
            if values.shape != (1 << len(self.agents),):
                raise InvalidArgumentError("utility table must cover every subset of agents")
            if np.any(values < 0) or values[0] != 0:
                raise InvalidArgumentError("utilities must be non-negative with U(empty) = 0")
            integral = bool(np.all(values == np.round(values)))
            values.setflags(write=False)
        self.values = values
        self._function = function
        self._batch = batch
        self.integral = integral
        self._declared_monotone = monotone

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_table(cls, agents: Sequence[str], kappa: int | None,
                   utilities: Mapping) -> "HgcrpInstance":
        """Build from ``{subset: value}``; keys are iterables of ids or comma-joined strings.

        ``kappa=None`` means no size cap (kappa = |N|).
        """
        agents = tuple(str(a) for a in agents)
        pos = {a: i for i, a in enumerate(agents)}
        values = np.full(1 << len(agents), np.nan)
        values[0] = 0.0
        for key, value in utilities.items():
            members = key.split(",") if isinstance(key, str) else list(key)
            try:
                mask = to_mask(pos[str(a).strip()] for a in members)
            except KeyError as exc:
                raise InvalidArgumentError(f"unknown agent {exc.args[0]!r} in utility table") from None
            if mask == 0:
                if value != 0:
                    raise InvalidArgumentError("U(empty) must be 0")
                continue
            values[mask] = float(value)
        if np.isnan(values).any():
            missing = from_mask(int(np.flatnonzero(np.isnan(values))[0]))
            raise InvalidArgumentError(f"utility table misses subset {[agents[i] for i in missing]}")
        return cls(agents, len(agents) if kappa is None else kappa, values=values)

    @classmethod
    def from_instance(cls, inst: Instance) -> "HgcrpInstance":
        """Adapter exposing an HEG through the generic interface."""
        return cls(inst.agents, inst.kappa, function=inst.utility,
                   batch=inst.mask_utilities, integral=inst.integral, monotone=True)

    @classmethod
    def from_function(cls, agents, kappa, function, *, integral=False, monotone=None):
        return cls(agents, kappa, function=function, integral=integral, monotone=monotone)

    # -- game protocol ------------------------------------------------------

    @property
    def table_backed(self) -> bool:
        return self.values is not None

    def utility(self, coalition: Iterable) -> float:
        c = self.coalition(coalition)
        if self.values is not None:
            return float(self.values[to_mask(c)])
        return self._function(c) if c else 0

    def mask_utilities(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        if self.values is not None:
            return self.values[masks]
        if self._batch is not None:
            return self._batch(masks)
        return np.array([self.utility(from_mask(int(m))) for m in masks], dtype=np.float64)

    def full_table(self) -> np.ndarray:
        if self.values is not None:
            return self.values
        return np.asarray(self.mask_utilities(np.arange(1 << self.n, dtype=np.int64)),
                          dtype=np.float64)

    @cached_property
    def monotone(self) -> bool:
        """Whether U is monotone; unknown callables count as non-monotone."""
        if self._declared_monotone is not None:
            return self._declared_monotone
        if self.values is not None:
            return check_monotone_submodular(self).monotone
        return False

    def to_table(self) -> dict:
        table = self.full_table()
        return {",".join(self.ids(from_mask(m))): _plain(table[m], self.integral)
                for m in range(1, 1 << self.n)}


def _plain(x, integral):
    return int(round(x)) if integral else float(x)


@dataclass(frozen=True)
class MonotoneSubmodularReport:
    monotone: bool
    submodular: bool
    counterexample: dict | None = None
    mode: str = "exhaustive"
    checked: int = 0

    def to_dict(self) -> dict:
        return {"monotone": self.monotone, "submodular": self.submodular,
                "counterexample": self.counterexample, "mode": self.mode,
                "checked": self.checked}


def check_monotone_submodular(g, *, samples: int | None = None, seed: int = 0,
                              config: Config | None = None) -> MonotoneSubmodularReport:
    """Test membership of ``U`` in the monotone submodular class.

    Exhaustive mode checks the local conditions ``U(X) <= U(X+y)`` and
    ``U(X+x) - U(X) >= U(X+x+y) - U(X+y)`` over every ``X`` and ``x, y`` not
    in ``X``.  They are equivalent to the global ``X <= Y`` statements, and a
    failure is reported as a concrete ``(X, Y, x)`` triple.  Passing
    ``samples`` instead draws that many random ``(X <= Y, x not in Y)``
    triples.
    """
    cfg = resolve(config)
    eps = tolerance(g, cfg)
    if samples is not None:
        return _sampled_check(g, samples, seed, eps)
    if not getattr(g, "table_backed", False) and g.n > cfg.exhaustive_limit:
        raise CapabilityError(
            f"exhaustive check of {g.n} agents exceeds the limit of {cfg.exhaustive_limit}; "
            "request sampled mode explicitly")
    n = g.n
    v = g.full_table() if hasattr(g, "full_table") else np.asarray(
        g.mask_utilities(np.arange(1 << n, dtype=np.int64)), dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    masks = np.arange(1 << n, dtype=np.int64)

    mono_cx = None
    for b in range(n):
        bit = 1 << b
        xs = masks[(masks & bit) == 0]
        bad = v[xs] > v[xs | bit] + eps
        if bad.any():
            x = int(xs[np.argmax(bad)])
            mono_cx = {"kind": "monotone", "X": g.ids(from_mask(x)),
                       "Y": g.ids(from_mask(x | bit))}
            break

    sub_cx = None
    for a, b in combinations(range(n), 2):
        ba, bb = 1 << a, 1 << b
        xs = masks[(masks & (ba | bb)) == 0]
        lhs = v[xs | ba] - v[xs]
        rhs = v[xs | ba | bb] - v[xs | bb]
        bad = lhs < rhs - eps
        if bad.any():
            x = int(xs[np.argmax(bad)])
            sub_cx = {"kind": "submodular", "X": g.ids(from_mask(x)),
                      "Y": g.ids(from_mask(x | bb)), "x": g.agents[a]}
            break
    checked = (1 << n) * n + (1 << n) * n * (n - 1) // 2
    return MonotoneSubmodularReport(mono_cx is None, sub_cx is None, mono_cx or sub_cx,
                                    "exhaustive", checked)


def _sampled_check(g, samples: int, seed: int, eps: float) -> MonotoneSubmodularReport:
    n = g.n
    if n < 1 or samples <= 0:
        raise InvalidArgumentError("sampled mode needs at least one agent and one sample")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, n, size=samples)
    ybits = rng.random((samples, n)) < 0.5
    ybits[np.arange(samples), x] = False
    xbits = ybits & (rng.random((samples, n)) < 0.5)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    ym = ybits.astype(np.int64) @ weights
    xm = xbits.astype(np.int64) @ weights
    xb = np.int64(1) << x.astype(np.int64)
    allm = np.concatenate([xm, ym, xm | xb, ym | xb])
    vals = np.asarray(g.mask_utilities(allm), dtype=np.float64).reshape(4, samples)
    ux, uy, uxx, uyx = vals
    mono_bad = ux > uy + eps
    sub_bad = (uxx - ux) < (uyx - uy) - eps
    cx = None
    if mono_bad.any():
        k = int(np.argmax(mono_bad))
        cx = {"kind": "monotone", "X": g.ids(from_mask(int(xm[k]))), "Y": g.ids(from_mask(int(ym[k])))}
    elif sub_bad.any():
        k = int(np.argmax(sub_bad))
        cx = {"kind": "submodular", "X": g.ids(from_mask(int(xm[k]))),
              "Y": g.ids(from_mask(int(ym[k]))), "x": g.agents[int(x[k])]}
    return MonotoneSubmodularReport(not mono_bad.any(), not sub_bad.any(), cx, "sampled", samples)


class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class PotentialVector:
    """Agent utilities sorted non-increasingly."""

    values: tuple

    def __post_init__(self):
        if any(a < b for a, b in zip(self.values, self.values[1:])):
            raise InvalidArgumentError("potential vector must be non-increasing")

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def psi(g, p: Partition) -> PotentialVector:
    validate(g, p)
    utils = []
    for c in p.coalitions:
        utils.extend([g.utility(c)] * len(c))
    return PotentialVector(tuple(sorted(utils, reverse=True)))


def lex_compare(a, b, eps: float = 0.0) -> Order:
    """Lexicographic comparison; entries within ``eps`` count as equal."""
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        raise InvalidArgumentError(f"cannot compare potentials of length {len(a)} and {len(b)}")
    for x, y in zip(a, b):
        if x > y + eps:
            return Order.GREATER
        if y > x + eps:
            return Order.LESS
    return Order.EQUAL


def psi_maximal_partition(g, *, config: Config | None = None,
                          space: PartitionSpace | None = None) -> Partition:
    """Exhaustively find a partition whose potential is lexicographically maximal.

    Ties go to the earliest partition in canonical enumeration order.
    """
    cfg = resolve(config)
    space = space or PartitionSpace(g, cfg.partition_limit)
    eps = tolerance(g, cfg)
    potentials = -np.sort(-space.utilities, axis=1)
    best = 0
    for r in range(1, len(space)):
        if lex_compare(potentials[r], potentials[best], eps) is Order.GREATER:
            best = r
    return space.partitions[best]
