"""Solvers and brute-force oracles for hedonic expertise games."""
from ._kernels import BACKEND
from .algorithms import (
    MoveStep,
    MoveTrace,
    brute_force_max_joint_utility,
    cis_algorithm,
    gamma,
    greedy_core_partition,
    greedy_max_joint_utility,
    imitative_brd,
    initial_block_partition,
    is_critical,
)
from .config import GREEDY_RATIO, Config
from .core import (
    Instance,
    Partition,
    PartitionSpace,
    agent_utility,
    iter_partitions,
    joint_expertise,
    joint_utility,
    marginal_gain,
)
from .errors import (
    CapabilityError,
    HegError,
    InvalidArgumentError,
    InvalidPartitionError,
    InvalidReferenceError,
)
from .generators import (
    SetSystem,
    WeightedGraph,
    from_graph,
    from_max_coverage,
    from_set_cover,
    hardness_witness_partition,
    random_instance,
)
from .hgcrp import (
    HgcrpInstance,
    Order,
    PotentialVector,
    check_monotone_submodular,
    lex_compare,
    psi,
    psi_maximal_partition,
)
from .stability import (
    StabilityReport,
    alpha_blocks,
    blocks,
    is_alpha_core_stable,
    is_cis,
    is_core_stable,
    is_nash_stable,
    is_pareto_optimal,
    is_perfect,
    is_socially_optimal,
    pareto_dominates,
    social_welfare,
)

__version__ = "0.1.0"
