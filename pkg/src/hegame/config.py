from __future__ import annotations

import os
from dataclasses import dataclass

# 1 - 1/e, the greedy guarantee for monotone submodular maximisation.
GREEDY_RATIO = 0.6321205588285577


@dataclass(frozen=True)
class Config:
    """Budgets and tolerances for the brute-force oracles.

    ``epsilon`` is only applied to real-valued games; integer games are
    compared exactly.
    """

    subset_budget: int = 10**7
    partition_limit: int = 8
    exhaustive_limit: int = 12
    epsilon: float = 1e-9
    max_steps: int = 10**6

    def __post_init__(self):
        from .errors import InvalidArgumentError

        if self.subset_budget <= 0 or self.partition_limit <= 0 or self.exhaustive_limit <= 0:
            raise InvalidArgumentError("budgets must be positive")
        if not (0.0 < self.epsilon <= 1e-3):
            raise InvalidArgumentError("epsilon must lie in (0, 1e-3]")
        if self.max_steps <= 0:
            raise InvalidArgumentError("max_steps must be positive")


DEFAULT_CONFIG = Config()


def resolve(config: Config | None) -> Config:
    return DEFAULT_CONFIG if config is None else config


def tolerance(game, config: Config | None = None) -> float:
    """Comparison slack for ``game``: zero for integer-valued games."""
    return 0.0 if getattr(game, "integral", False) else resolve(config).epsilon


def thread_cap() -> int | None:
    raw = os.environ.get("HEG_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value > 0 else None
