"""Stability and optimality checkers.

Every checker accepts any game exposing ``agents``, ``kappa``, ``integral``,
``monotone``, ``utility(coalition)`` and ``mask_utilities(masks)``: an HEG
:class:`~hegame.core.Instance` or an :class:`~hegame.hgcrp.HgcrpInstance`.
The core, perfect, SO and PO checkers are brute-force oracles bounded by the
budgets in :class:`~hegame.config.Config`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .config import Config, resolve, tolerance
from .core import Partition, PartitionSpace, from_mask, validate
from .errors import CapabilityError, InvalidArgumentError

CONCEPTS = ("NS", "CIS", "CS", "ApproxCS", "Perfect", "SO", "PO")


@dataclass(frozen=True)
class StabilityReport:
    concept: str
    holds: bool
    witness: dict | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.holds == (self.witness is not None):
            raise ValueError("a report carries a witness exactly when the property fails")

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        out = {"concept": self.concept, "holds": self.holds, "witness": self.witness}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out


def _num(game, x):
    return int(round(x)) if game.integral else float(x)


class _Utilities:
    """Memoised coalition utilities for a single checker call."""

    def __init__(self, game):
        self.game = game
        self._cache: dict = {}

    def __call__(self, members: Iterable[int]):
        key = tuple(sorted(members))
        if key not in self._cache:
            self._cache[key] = self.game.utility(key) if key else 0
        return self._cache[key]


def _improving_moves(game, p: Partition, eps: float, contractual: bool):
    U = _Utilities(game)
    for i in range(game.n):
        own = p.coalition_of(i)
        current = U(own)
        rest = tuple(j for j in own if j != i)
        targets = [c for c in p.coalitions if c != own and len(c) < game.kappa]
        if not contractual and not game.monotone and rest:
            # moving alone only matters when U may drop on growth
            targets.append(())
        for c in targets:
            joined = U(c + (i,))
            if not joined > current + eps:
                continue
            if contractual:
                if U(c) > joined + eps:
                    continue
                # nobody is left behind to object when i was alone
                if rest and current > U(rest) + eps:
                    continue
            yield i, c, current, joined


def is_nash_stable(g, p: Partition, *, config: Config | None = None) -> StabilityReport:
    """No agent gains by joining another coalition below the size cap."""
    validate(g, p)
    for i, c, before, after in _improving_moves(g, p, tolerance(g, config), contractual=False):
        return StabilityReport("NS", False, {
            "agent": g.agents[i], "target": g.ids(c),
            "utility_before": before, "utility_after": after})
    return StabilityReport("NS", True)


def is_cis(g, p: Partition, *, config: Config | None = None) -> StabilityReport:
    """No improving move that leaves the source and target coalitions no worse off."""
    validate(g, p)
    for i, c, before, after in _improving_moves(g, p, tolerance(g, config), contractual=True):
        return StabilityReport("CIS", False, {
            "agent": g.agents[i], "target": g.ids(c),
            "utility_before": before, "utility_after": after})
    return StabilityReport("CIS", True)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def _block_eps(g, alpha: float, config) -> float:
    return 0.0 if (alpha == 1.0 and g.integral) else resolve(config).epsilon


def alpha_blocks(g, c: Iterable, p: Partition, alpha: float, *,
                 config: Config | None = None) -> bool:
    """True when ``alpha * U(c)`` strictly exceeds every member's current utility."""
    alpha = _check_alpha(alpha)
    validate(g, p)
    members = g.coalition(c)
    if not members:
        raise InvalidArgumentError("a blocking coalition must be non-empty")
    if len(members) > g.kappa:
        raise InvalidArgumentError(f"coalition of size {len(members)} exceeds kappa={g.kappa}")
    eps = _block_eps(g, alpha, config)
    challenge = alpha * g.utility(members)
    return all(challenge > g.utility(p.coalition_of(i)) + eps for i in members)


def blocks(g, c: Iterable, p: Partition, *, config: Config | None = None) -> bool:
    return alpha_blocks(g, c, p, 1.0, config=config)


def _subset_masks(g, config) -> np.ndarray:
    cfg = resolve(config)
    count = _kernels.subset_count(g.n, g.kappa)
    if count > cfg.subset_budget:
        raise CapabilityError(
            f"{count} candidate coalitions exceed the subset budget of {cfg.subset_budget}")
    return _kernels.combination_masks(g.n, g.kappa)


def current_utilities(g, p: Partition) -> np.ndarray:
    out = np.empty(g.n, dtype=np.float64)
    for c in p.coalitions:
        out[list(c)] = g.utility(c)
    return out


def is_alpha_core_stable(g, p: Partition, alpha: float, *,
                         config: Config | None = None) -> StabilityReport:
    alpha = _check_alpha(alpha)
    validate(g, p)
    masks = _subset_masks(g, config)
    utils = np.asarray(g.mask_utilities(masks), dtype=np.float64)
    k = _kernels.first_alpha_block(masks, utils, current_utilities(g, p), alpha,
                                   _block_eps(g, alpha, config))
    concept = "CS" if alpha == 1.0 else "ApproxCS"
    if k < 0:
        return StabilityReport(concept, True, alpha=alpha)
    c = from_mask(int(masks[k]))
    return StabilityReport(concept, False, {
        "coalition": g.ids(c), "utility": _num(g, utils[k])}, alpha=alpha)


def is_core_stable(g, p: Partition, *, config: Config | None = None) -> StabilityReport:
    return is_alpha_core_stable(g, p, 1.0, config=config)


def best_coalitions(g, *, config: Config | None = None):
    """Per agent, the best achievable utility and the first coalition reaching it."""
    masks = _subset_masks(g, config)
    utils = np.asarray(g.mask_utilities(masks), dtype=np.float64)
    best, arg = _kernels.best_per_agent(masks, utils, g.n)
    return best, [from_mask(int(masks[k])) for k in arg]


def is_perfect(g, p: Partition, *, config: Config | None = None) -> StabilityReport:
    """Every agent already sits in a coalition of maximal utility for it."""
    validate(g, p)
    best, where = best_coalitions(g, config=config)
    current = current_utilities(g, p)
    eps = tolerance(g, config)
    unhappy = {}
    for i in range(g.n):
        if best[i] > current[i] + eps:
            unhappy[g.agents[i]] = {"current": _num(g, current[i]), "best": _num(g, best[i]),
                                    "coalition": g.ids(where[i])}
    if unhappy:
        return StabilityReport("Perfect", False, {"agents": unhappy})
    return StabilityReport("Perfect", True)


def social_welfare(g, p: Partition):
    """Sum of agent utilities, i.e. sum over coalitions of |C| * U(C)."""
    validate(g, p)
    return sum(len(c) * g.utility(c) for c in p.coalitions)


def _space(g, config, space):
    return space if space is not None else PartitionSpace(g, resolve(config).partition_limit)


def is_socially_optimal(g, p: Partition, *, config: Config | None = None,
                        space: PartitionSpace | None = None) -> StabilityReport:
    validate(g, p)
    space = _space(g, config, space)
    welfare = space.utilities.sum(axis=1)
    r = int(np.argmax(welfare))
    mine = social_welfare(g, p)
    if welfare[r] > mine + tolerance(g, config):
        return StabilityReport("SO", False, {
            "partition": space.partitions[r].to_ids(g), "welfare": _num(g, welfare[r]),
            "current_welfare": mine})
    return StabilityReport("SO", True)


def pareto_dominates(g, p1: Partition, p2: Partition, *, config: Config | None = None) -> bool:
    """Whether ``p1`` makes nobody worse off and somebody strictly better off than ``p2``."""
    validate(g, p1)
    validate(g, p2)
    eps = tolerance(g, config)
    u1, u2 = current_utilities(g, p1), current_utilities(g, p2)
    return bool(np.all(u1 >= u2 - eps) and np.any(u1 > u2 + eps))


def is_pareto_optimal(g, p: Partition, *, config: Config | None = None,
                      space: PartitionSpace | None = None) -> StabilityReport:
    validate(g, p)
    space = _space(g, config, space)
    eps = tolerance(g, config)
    mine = current_utilities(g, p)
    dominating = np.all(space.utilities >= mine - eps, axis=1) & np.any(
        space.utilities > mine + eps, axis=1)
    if dominating.any():
        r = int(np.argmax(dominating))
        return StabilityReport("PO", False, {"partition": space.partitions[r].to_ids(g)})
    return StabilityReport("PO", True)


def check(g, p: Partition, prop: str, *, alpha: float | None = None,
          config: Config | None = None) -> StabilityReport:
    """Dispatch by the CLI property names."""
    prop = prop.lower()
    if prop == "ns":
        return is_nash_stable(g, p, config=config)
    if prop == "cis":
        return is_cis(g, p, config=config)
    if prop == "core":
        return is_core_stable(g, p, config=config)
    if prop == "approx-core":
        if alpha is None:
            raise InvalidArgumentError("approx-core needs alpha")
        return is_alpha_core_stable(g, p, alpha, config=config)
    if prop == "perfect":
        return is_perfect(g, p, config=config)
    if prop == "so":
        return is_socially_optimal(g, p, config=config)
    if prop == "po":
        return is_pareto_optimal(g, p, config=config)
    raise InvalidArgumentError(f"unknown property {prop!r}")
