"""Instance constructors: coverage and set-cover reductions, weighted graphs,
and seeded random families."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import ceil

import numpy as np

from .core import Instance, Partition
from .errors import InvalidArgumentError
from .hgcrp import HgcrpInstance


@dataclass(frozen=True)
class SetSystem:
    """Universe ``{1..m}``, a family of subsets, and a size budget ``k``."""

    m: int
    sets: tuple
    k: int

    def __post_init__(self):
        if self.m < 0 or self.k < 1:
            raise InvalidArgumentError("need m >= 0 and k >= 1")
        sets = tuple(frozenset(int(e) for e in s) for s in self.sets)
        for s in sets:
            if any(not 1 <= e <= self.m for e in s):
                raise InvalidArgumentError(f"set {sorted(s)} leaves the universe 1..{self.m}")
        object.__setattr__(self, "sets", sets)

    @property
    def n(self) -> int:
        return len(self.sets)

    def to_dict(self) -> dict:
        return {"m": self.m, "sets": [sorted(s) for s in self.sets], "k": self.k}


def _incidence(ss: SetSystem) -> np.ndarray:
    e = np.zeros((ss.n, ss.m), dtype=np.int64)
    for i, s in enumerate(ss.sets):
        for el in s:
            e[i, el - 1] = 1
    return e


def from_max_coverage(ss: SetSystem) -> Instance:
    """(0,1)-HEG whose coalition utilities equal the coverage of the chosen sets.

    One skill per universe element, one agent per set, kappa = k (capped at
    the number of agents).
    """
    if ss.n == 0:
        raise InvalidArgumentError("an empty set family yields no agents")
    return Instance(
        agents=tuple(f"a{i + 1}" for i in range(ss.n)),
        skills=tuple(f"u{j + 1}" for j in range(ss.m)),
        expertise=_incidence(ss),
        kappa=min(ss.k, ss.n),
        level_bound=1,
        meta={"reduction": "max-coverage"},
    )


def padding_count(n: int, k: int) -> int:
    if k < 2:
        raise InvalidArgumentError("padding needs k >= 2")
    return max(0, ceil((n - k) / (k - 1)))


def from_set_cover(ss: SetSystem) -> Instance:
    """Coverage instance plus ``ceil((n-k)/(k-1))`` all-ones padding agents.

    Any feasible partition then has at least one coalition without padding
    agents, and that coalition has utility ``m`` exactly when its sets cover
    the universe.
    """
    if ss.k < 2:
        raise InvalidArgumentError("set-cover reduction needs k >= 2")
    if ss.n < ss.k:
        raise InvalidArgumentError("set-cover reduction needs at least k sets")
    x = padding_count(ss.n, ss.k)
    e = np.vstack([_incidence(ss), np.ones((x, ss.m), dtype=np.int64)])
    pads = [f"p{i + 1}" for i in range(x)]
    return Instance(
        agents=tuple(f"a{i + 1}" for i in range(ss.n)) + tuple(pads),
        skills=tuple(f"u{j + 1}" for j in range(ss.m)),
        expertise=e,
        kappa=ss.k,
        level_bound=1,
        meta={"reduction": "set-cover", "padding": pads, "m": ss.m, "n": ss.n, "k": ss.k},
    )


def hardness_witness_partition(g: Instance) -> Partition | None:
    """Partition ``(X_1, ..., X_x, C)`` with each padding agent anchoring one X_i
    and a padding-free remainder ``C`` of utility below ``m``.

    Candidate remainders are tried in canonical subset order; the other
    original agents fill the X_i in index order, ``k - 1`` per block.  Returns
    ``None`` when no remainder has utility below ``m``.
    """
    meta = g.meta or {}
    if meta.get("reduction") != "set-cover" or "padding" not in meta:
        raise InvalidArgumentError("instance lacks set-cover padding metadata")
    m, k = int(meta["m"]), g.kappa
    pads = [g.index(a) for a in meta["padding"]]
    originals = [i for i in range(g.n) if i not in set(pads)]
    x = len(pads)
    smallest = max(1, len(originals) - x * (k - 1))
    for size in range(smallest, min(k, len(originals)) + 1):
        for c in combinations(originals, size):
            if g.utility(c) >= m:
                continue
            left = [i for i in originals if i not in set(c)]
            blocks = [[p] + left[t * (k - 1):(t + 1) * (k - 1)] for t, p in enumerate(pads)]
            return Partition.of(blocks + [list(c)])
    return None


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple
    edges: tuple  # ((u, v, w), ...) with u < v in vertex order
    kappa: int

    def __post_init__(self):
        vertices = tuple(str(v) for v in self.vertices)
        if len(set(vertices)) != len(vertices):
            raise InvalidArgumentError("vertex ids must be unique")
        pos = {v: i for i, v in enumerate(vertices)}
        edges = []
        for u, v, w in self.edges:
            u, v = str(u), str(v)
            if u not in pos or v not in pos:
                raise InvalidArgumentError(f"edge ({u}, {v}) uses an unknown vertex")
            if u == v:
                raise InvalidArgumentError("self-loops are not allowed")
            if w < 0:
                raise InvalidArgumentError("edge weights must be non-negative")
            if pos[u] > pos[v]:
                u, v = v, u
            edges.append((u, v, w))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", tuple(edges))

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges],
                "kappa": self.kappa}


def from_graph(wg: WeightedGraph) -> Instance:
    """One skill per edge; a vertex has the edge's weight in it when incident."""
    pos = {v: i for i, v in enumerate(wg.vertices)}
    e = np.zeros((len(wg.vertices), len(wg.edges)))
    for j, (u, v, w) in enumerate(wg.edges):
        e[pos[u], j] = e[pos[v], j] = w
    return Instance(
        agents=wg.vertices,
        skills=tuple(f"{u}-{v}" for u, v, _ in wg.edges),
        expertise=e,
        kappa=min(wg.kappa, len(wg.vertices)),
        meta={"reduction": "hvcg"},
    )


def random_graph(n_vertices: int, kappa: int, *, p: float = 0.5, max_weight: int | None = None,
                 seed: int = 0) -> WeightedGraph:
    """Erdos-Renyi graph with uniform weights (integers 1..max_weight, or reals in [0, 1))."""
    rng = np.random.default_rng(seed)
    vertices = tuple(f"v{i + 1}" for i in range(n_vertices))
    edges = []
    for a, b in combinations(range(n_vertices), 2):
        if rng.random() < p:
            w = int(rng.integers(1, max_weight + 1)) if max_weight else float(rng.random())
            edges.append((vertices[a], vertices[b], w))
    return WeightedGraph(vertices, tuple(edges), kappa)


def random_instance(n: int, skills: int, kappa: int, *, beta: int | None = None,
                    density: float = 0.7, seed: int = 0) -> Instance:
    """Seeded random HEG.

    Each entry is non-zero with probability ``density``; non-zero entries are
    uniform on ``{1..beta}``, or on ``(0, 1]`` when ``beta`` is None.
    """
    if n < 1 or skills < 0 or not 1 <= kappa <= n:
        raise InvalidArgumentError("need n >= 1, skills >= 0 and 1 <= kappa <= n")
    if not 0.0 <= density <= 1.0:
        raise InvalidArgumentError("density must lie in [0, 1]")
    if beta is not None and beta < 1:
        raise InvalidArgumentError("beta must be at least 1")
    rng = np.random.default_rng(seed)
    keep = rng.random((n, skills)) < density
    if beta is None:
        values = np.where(keep, 1.0 - rng.random((n, skills)), 0.0)
    else:
        values = np.where(keep, rng.integers(1, beta + 1, size=(n, skills)), 0)
    return Instance(
        agents=tuple(f"a{i + 1}" for i in range(n)),
        skills=tuple(f"s{j + 1}" for j in range(skills)),
        expertise=values,
        kappa=kappa,
        level_bound=beta,
    )


def random_submodular_table(n: int, kappa: int, *, seed: int = 0,
                            integral: bool = False) -> HgcrpInstance:
    """Random monotone submodular table that is not an expertise game.

    Sum of concave functions of random modular weights (budget-additive terms
    when ``integral``), which keeps both properties by construction.
    """
    rng = np.random.default_rng(seed)
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    values = np.zeros(1 << n)
    for _ in range(int(rng.integers(1, 4))):
        if integral:
            w = rng.integers(0, 5, size=n).astype(np.float64)
            cap = float(rng.integers(1, max(2, int(w.sum()) + 1)))
            values += np.minimum(bits @ w, cap)
        else:
            w = rng.random(n)
            shape = rng.integers(0, 3)
            s = bits @ w
            values += (np.sqrt(s), np.log1p(s), np.minimum(s, rng.random() * w.sum() + 1e-3))[shape]
    values[0] = 0.0
    return HgcrpInstance(tuple(f"h{i + 1}" for i in range(n)), kappa, values=values)
