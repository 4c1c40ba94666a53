from collections import Counter
from itertools import combinations
from math import e

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hegame import (
    GREEDY_RATIO,
    CapabilityError,
    Config,
    InvalidArgumentError,
    Instance,
    Order,
    Partition,
    SetSystem,
    brute_force_max_joint_utility,
    cis_algorithm,
    from_max_coverage,
    gamma,
    greedy_core_partition,
    greedy_max_joint_utility,
    imitative_brd,
    initial_block_partition,
    is_alpha_core_stable,
    is_cis,
    is_critical,
    is_nash_stable,
    joint_utility,
    lex_compare,
    psi,
)
from hegame.algorithms import better_response_dynamics, move_bound
from hegame.generators import random_instance, random_submodular_table


def sizes(p):
    return sorted(len(c) for c in p)


def block_sizes(n, kappa):
    return sorted([kappa] * (n // kappa) + ([n % kappa] if n % kappa else []))


def replay(g, p0, trace):
    """Rebuild the partition after every step from the recorded source/target."""
    p, out = p0, []
    for step in trace.steps:
        i = g.index(step.agent)
        assert g.coalition(step.source) == p.coalition_of(i)
        target = tuple(j for j in g.coalition(step.target) if j != i)
        p = p.move(i, target) if target else p.move(i, ())
        out.append(p)
    return out


# -- initial partition -------------------------------------------------------

def test_initial_block_partition_seed0():
    g = random_instance(5, 2, 2, seed=0)
    assert initial_block_partition(g, 0).to_ids(g) == [["a1", "a2"], ["a3", "a4"], ["a5"]]


def test_initial_block_partition_divisible():
    g = random_instance(4, 2, 2, seed=0)
    assert sizes(initial_block_partition(g, 0)) == [2, 2]


@given(n=st.integers(1, 15), kappa=st.integers(1, 15), seed=st.integers(0, 10**6))
def test_initial_block_partition_sizes(n, kappa, seed):
    kappa = min(kappa, n)
    g = random_instance(n, 1, kappa, seed=1)
    p = initial_block_partition(g, seed)
    assert sizes(p) == block_sizes(n, kappa)
    assert initial_block_partition(g, seed) == p


# -- imitative dynamics ------------------------------------------------------

def test_move_bound_formula():
    g = random_instance(12, 4, 3, beta=3, seed=0)
    assert move_bound(g) == 3 * 4 * 4 * 3
    assert move_bound(random_instance(12, 4, 3, seed=0)) is None


def test_ns_start_returned_unchanged(alice_bob):
    p0 = Partition.of([[0, 1]])
    p, trace = imitative_brd(alice_bob, p0)
    assert p == p0 and len(trace) == 0


def test_rejects_non_block_start():
    g = random_instance(6, 2, 3, seed=0)
    with pytest.raises(InvalidArgumentError):
        imitative_brd(g, Partition.of([[0], [1], [2, 3, 4], [5]]))


@pytest.mark.parametrize("seed", range(8))
def test_brd_random_03_instances(seed):
    g = random_instance(12, 4, 3, beta=3, seed=seed)
    p0 = initial_block_partition(g, seed)
    p, trace = imitative_brd(g, p0, seed=seed)
    assert is_nash_stable(g, p)
    assert len(trace) <= 3 * 4 * 4 * 3 == trace.move_bound
    prev = psi(g, p0)
    for step, q in zip(trace.steps, replay(g, p0, trace)):
        assert step.utility_after > step.utility_before
        assert joint_utility(g, step.target) == step.utility_after
        now = psi(g, q)
        assert now.values == step.psi_after
        assert lex_compare(now, prev) is Order.GREATER
        prev = now
    states = replay(g, p0, trace)
    assert (states[-1] if states else p0) == p


@pytest.mark.parametrize("seed", range(6))
def test_brd_preserves_block_structure(seed):
    g = random_instance(11, 3, 3, beta=2, seed=seed)
    p0 = initial_block_partition(g, seed)
    _, trace = imitative_brd(g, p0)
    states = replay(g, p0, trace)
    for k, q in enumerate(states):
        burst_over = k + 1 == len(states) or trace.steps[k + 1].kind == "BetterResponse"
        if burst_over:
            assert sizes(q) == block_sizes(11, 3)


def test_brd_real_valued_terminates():
    g = random_instance(10, 3, 4, seed=4)
    p, trace = imitative_brd(g, initial_block_partition(g, 0))
    assert is_nash_stable(g, p) and trace.move_bound is None


def test_brd_step_cap():
    g = random_instance(12, 4, 3, beta=3, seed=1)
    _, trace = imitative_brd(g, initial_block_partition(g, 0))
    if len(trace):
        with pytest.raises(CapabilityError):
            imitative_brd(g, initial_block_partition(g, 0), config=Config(max_steps=len(trace) - 1))


def test_unrestricted_brd_on_table_game():
    g = random_submodular_table(6, 3, seed=2)
    p, trace = better_response_dynamics(g, Partition.of([[i] for i in range(6)]))
    assert is_nash_stable(g, p)


# -- criticality and the swap procedure ---------------------------------------

def test_is_critical_examples():
    g = Instance(("x", "y", "z"), ("s", "t"), [[2, 0], [2, 0], [1, 3]], 3)
    assert is_critical(g, "x", ["x"])
    assert not is_critical(g, "x", ["x", "y"]) and not is_critical(g, "y", ["x", "y"])
    assert is_critical(g, "z", ["x", "y"])
    assert gamma(g, ["x", "y", "z"]) == 1


@given(seed=st.integers(0, 10**6))
def test_is_critical_iff_utility_drop(seed):
    g = random_instance(6, 4, 6, beta=2, seed=seed)
    rng = np.random.default_rng(seed)
    c = [i for i in range(6) if rng.random() < 0.6] or [0]
    for i in c:
        rest = [j for j in c if j != i]
        assert is_critical(g, i, c) == (joint_utility(g, c) > joint_utility(g, rest))


def test_cis_divisible_returns_initial():
    g = random_instance(6, 3, 3, seed=0)
    p, trace = cis_algorithm(g, 0)
    assert p == initial_block_partition(g, 0) and len(trace) == 0


@pytest.mark.parametrize("seed", range(10))
def test_cis_random_real_valued(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 13))
    kappa = int(rng.integers(2, 5))
    g = random_instance(n, 4, kappa, seed=seed)
    p, trace = cis_algorithm(g, seed)
    assert is_cis(g, p)
    assert len(trace) <= (n // kappa) * n


@pytest.mark.parametrize("seed", range(10))
def test_cis_no_return(seed):
    g = random_instance(11, 3, 3, beta=2, density=0.5, seed=seed)
    p0 = initial_block_partition(g, seed)
    _, trace = cis_algorithm(g, seed)
    slots = [c for c in p0 if len(c) == g.kappa]
    left = next((c for c in p0 if len(c) < g.kappa), ())
    evicted = [set() for _ in slots]
    for step in trace.steps:
        s = slots.index(g.coalition(step.source))
        j, partner = g.index(step.agent), g.index(step.partner)
        assert partner in left and is_critical(g, partner, slots[s])
        assert partner not in evicted[s]
        evicted[s].add(j)
        slots[s] = tuple(sorted(set(slots[s]) - {j} | {partner}))
        left = tuple(sorted(set(left) - {partner} | {j}))
        assert g.coalition(step.target) == left


def test_swap_need_not_raise_gamma():
    # k tops skill s2 alone until j' arrives with a higher s2 level
    g = Instance(("k", "j", "jp"), ("s1", "s2"), [[0, 5], [0, 0], [1, 6]], 2)
    p, trace = cis_algorithm(g, 0)
    assert is_cis(g, p)
    (step,) = trace.steps
    assert (step.agent, step.partner) == ("j", "jp")
    assert gamma(g, ["k", "j"]) == gamma(g, ["k", "jp"]) == 1
    assert step.gamma_before == step.gamma_after == 1


# -- greedy --------------------------------------------------------------------

def test_greedy_examples(alice_bob):
    assert greedy_max_joint_utility(alice_bob, ["Bob"]) == (1,)
    assert greedy_max_joint_utility(alice_bob) == (0, 1)
    ones = random_instance(5, 3, 3, beta=1, density=1.0, seed=0)
    assert greedy_max_joint_utility(ones) == (0, 1, 2)
    with pytest.raises(InvalidArgumentError):
        greedy_max_joint_utility(alice_bob, [])


def test_greedy_ratio_constant():
    assert GREEDY_RATIO == pytest.approx(1 - 1 / e, abs=1e-15)


@st.composite
def set_systems(draw):
    m = draw(st.integers(1, 7))
    n = draw(st.integers(1, 8))
    sets = tuple(tuple(draw(st.sets(st.integers(1, m), max_size=m))) for _ in range(n))
    return SetSystem(m, sets, draw(st.integers(1, 4)))


def coverage_optimum(ss):
    k = min(ss.k, ss.n)
    return max(len(set().union(*c)) for r in range(1, k + 1) for c in combinations(ss.sets, r))


@given(set_systems())
def test_greedy_ratio_on_coverage(ss):
    g = from_max_coverage(ss)
    opt = joint_utility(g, brute_force_max_joint_utility(g))
    assert opt == coverage_optimum(ss)
    greedy = joint_utility(g, greedy_max_joint_utility(g))
    assert greedy <= opt
    assert greedy >= GREEDY_RATIO * opt - 1e-9


def test_brute_force_examples():
    g = random_instance(5, 3, 5, seed=3)
    best = brute_force_max_joint_utility(g)
    assert joint_utility(g, best) == joint_utility(g, range(5))
    # earliest subset in size-then-lexicographic order reaching the optimum
    assert all(joint_utility(g, c) < joint_utility(g, best)
               for r in range(1, len(best)) for c in combinations(range(5), r))
    cover = from_max_coverage(SetSystem(4, ((1, 2), (3,), (3, 4), (1,)), 2))
    assert joint_utility(cover, brute_force_max_joint_utility(cover)) == 4
    assert brute_force_max_joint_utility(cover) == (0, 2)
    with pytest.raises(CapabilityError):
        brute_force_max_joint_utility(random_instance(20, 2, 10, seed=0),
                                      config=Config(subset_budget=1000))


def test_greedy_core_small_is_grand_coalition():
    g = random_instance(3, 4, 3, seed=2)
    assert greedy_core_partition(g) == Partition.of([[0, 1, 2]])


@pytest.mark.parametrize("seed", range(5))
def test_greedy_core_01_instances(seed):
    g = random_instance(10, 5, 3, beta=1, density=0.4, seed=seed)
    p = greedy_core_partition(g)
    assert is_alpha_core_stable(g, p, GREEDY_RATIO)
    first = greedy_max_joint_utility(g)
    assert first in p.coalitions
    best = joint_utility(g, brute_force_max_joint_utility(g))
    assert joint_utility(g, first) >= GREEDY_RATIO * best - 1e-9


@pytest.mark.parametrize("n,kappa,beta", [(12, 4, None), (12, 3, 2), (9, 4, 1), (7, 2, None)])
def test_greedy_core_approximate_soundness(n, kappa, beta):
    for seed in range(3):
        g = random_instance(n, 4, kappa, beta=beta, density=0.5, seed=seed)
        p = greedy_core_partition(g)
        current = {i: joint_utility(g, p.coalition_of(i)) for i in range(n)}
        for r in range(1, kappa + 1):
            for c in combinations(range(n), r):
                u = GREEDY_RATIO * joint_utility(g, c)
                assert not all(u > current[i] + 1e-9 for i in c)
