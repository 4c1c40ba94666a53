from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from hegame import (
    CapabilityError,
    Config,
    HgcrpInstance,
    InvalidArgumentError,
    Instance,
    Partition,
    PartitionSpace,
    StabilityReport,
    alpha_blocks,
    blocks,
    is_alpha_core_stable,
    is_cis,
    is_core_stable,
    is_nash_stable,
    is_pareto_optimal,
    is_perfect,
    iter_partitions,
)
from hegame.generators import from_set_cover, random_instance, random_submodular_table, SetSystem
from hegame.stability import check, is_socially_optimal, pareto_dominates, social_welfare


# -- independent definitional oracles ---------------------------------------

def oracle_ns(g, p):
    for i in range(g.n):
        own = p.coalition_of(i)
        targets = [c for c in p.coalitions if c != own and len(c) < g.kappa]
        if not g.monotone and len(own) > 1:
            targets.append(())
        if any(g.utility(c + (i,)) > g.utility(own) for c in targets):
            return False
    return True


def oracle_cis(g, p):
    for i in range(g.n):
        own = p.coalition_of(i)
        rest = tuple(j for j in own if j != i)
        for c in p.coalitions:
            if c == own or len(c) >= g.kappa:
                continue
            joined = g.utility(c + (i,))
            if (joined > g.utility(own) and joined >= g.utility(c)
                    and (not rest or g.utility(rest) >= g.utility(own))):
                return False
    return True


def oracle_core(g, p, alpha=1.0):
    for r in range(1, g.kappa + 1):
        for c in combinations(range(g.n), r):
            if all(alpha * g.utility(c) > g.utility(p.coalition_of(i)) + 1e-9 for i in c):
                return False
    return True


def small_games(seed):
    yield random_instance(5, 3, 2, beta=2, seed=seed)
    yield random_instance(4, 3, 3, seed=seed)
    yield random_submodular_table(4, 3, seed=seed, integral=True)


# -- examples ---------------------------------------------------------------

def test_grand_coalition_of_two_is_ns(alice_bob):
    assert is_nash_stable(alice_bob, Partition.of([[0, 1]]))


def test_singletons_not_ns(alice_bob):
    rep = is_nash_stable(alice_bob, Partition.of([[0], [1]]))
    assert not rep
    assert rep.witness == {"agent": "Alice", "target": ["Bob"],
                           "utility_before": 7, "utility_after": 9}


def test_lonely_pair_has_no_nash_stable_partition(lonely_pair):
    reports = [is_nash_stable(lonely_pair, p) for p in iter_partitions(2, 2)]
    assert not any(reports)
    # agent 2 prefers leaving the pair to be alone
    pair = is_nash_stable(lonely_pair, Partition.of([[0, 1]]))
    assert pair.witness["agent"] == "2" and pair.witness["target"] == []


def test_lonely_pair_every_partition_is_cis(lonely_pair):
    assert is_cis(lonely_pair, Partition.of([[0], [1]]))
    # agent 2 would leave the pair, but agent 1 (U drops 2 -> 1) vetoes
    assert is_cis(lonely_pair, Partition.of([[0, 1]]))


def test_grand_coalition_blocks_singletons(alice_bob):
    p = Partition.of([[0], [1]])
    assert blocks(alice_bob, ["Alice", "Bob"], p)
    assert not blocks(alice_bob, ["Alice"], p)
    rep = is_core_stable(alice_bob, p)
    assert not rep and rep.witness == {"coalition": ["Alice", "Bob"], "utility": 9}
    assert is_core_stable(alice_bob, Partition.of([[0, 1]]))


def test_alpha_block_threshold(alice_bob):
    p = Partition.of([[0], [1]])
    # 9 * alpha > 7 iff alpha > 7/9
    assert alpha_blocks(alice_bob, [0, 1], p, 0.8)
    assert not alpha_blocks(alice_bob, [0, 1], p, 0.75)
    assert is_alpha_core_stable(alice_bob, p, 0.75).concept == "ApproxCS"


def test_alpha_range(alice_bob):
    p = Partition.of([[0, 1]])
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(InvalidArgumentError):
            is_alpha_core_stable(alice_bob, p, bad)


def test_block_argument_errors(alice_bob):
    p = Partition.of([[0, 1]])
    with pytest.raises(InvalidArgumentError):
        blocks(alice_bob, [], p)
    single = Instance(("a", "b"), ("s",), [[1], [2]], 1)
    with pytest.raises(InvalidArgumentError):
        blocks(single, [0, 1], Partition.of([[0], [1]]))


def test_social_welfare_alice_bob(alice_bob):
    assert social_welfare(alice_bob, Partition.of([[0, 1]])) == 18
    assert is_socially_optimal(alice_bob, Partition.of([[0, 1]]))
    rep = is_socially_optimal(alice_bob, Partition.of([[0], [1]]))
    assert not rep and rep.witness["welfare"] == 18 and rep.witness["current_welfare"] == 14


def test_pareto(alice_bob):
    grand, alone = Partition.of([[0, 1]]), Partition.of([[0], [1]])
    assert pareto_dominates(alice_bob, grand, alone)
    assert not pareto_dominates(alice_bob, alone, grand)
    assert not pareto_dominates(alice_bob, grand, grand)
    assert is_pareto_optimal(alice_bob, grand)
    assert is_pareto_optimal(alice_bob, alone).witness == {"partition": [["Alice", "Bob"]]}


def test_perfect_partition_for_coverable_set_cover():
    # {1,2} and {3} cover {1,2,3} with k = 2
    g = from_set_cover(SetSystem(3, ((1, 2), (3,), (1,), (2, 3)), 2))
    perfect = [p for p in iter_partitions(g.n, g.kappa) if is_perfect(g, p)]
    assert perfect
    for p in perfect:
        assert all(g.utility(c) == 3 for c in p)


def test_perfect_witness_lists_unhappy_agents(alice_bob):
    rep = is_perfect(alice_bob, Partition.of([[0], [1]]))
    assert set(rep.witness["agents"]) == {"Alice", "Bob"}
    assert rep.witness["agents"]["Alice"] == {"current": 7, "best": 9, "coalition": ["Alice", "Bob"]}


def test_report_invariant():
    with pytest.raises(ValueError):
        StabilityReport("NS", True, {"agent": "a"})
    with pytest.raises(ValueError):
        StabilityReport("NS", False)
    assert StabilityReport("CS", True, alpha=1.0).to_dict() == {
        "concept": "CS", "holds": True, "witness": None, "alpha": 1.0}


def test_check_dispatch(alice_bob):
    p = Partition.of([[0, 1]])
    for prop in ("ns", "cis", "core", "perfect", "so", "po"):
        assert check(alice_bob, p, prop)
    assert check(alice_bob, p, "approx-core", alpha=0.5)
    with pytest.raises(InvalidArgumentError):
        check(alice_bob, p, "approx-core")
    with pytest.raises(InvalidArgumentError):
        check(alice_bob, p, "stable")


def test_capability_limits():
    g = random_instance(10, 2, 5, seed=0)
    p = Partition.of([[i] for i in range(10)])
    with pytest.raises(CapabilityError):
        is_core_stable(g, p, config=Config(subset_budget=100))
    with pytest.raises(CapabilityError):
        is_pareto_optimal(g, p)
    with pytest.raises(CapabilityError):
        is_perfect(g, p, config=Config(subset_budget=10))


# -- properties against the oracles -----------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_checkers_agree_with_definitions(seed):
    for g in small_games(seed):
        for p in iter_partitions(g.n, g.kappa):
            assert bool(is_nash_stable(g, p)) == oracle_ns(g, p)
            assert bool(is_cis(g, p)) == oracle_cis(g, p)
            assert bool(is_core_stable(g, p)) == oracle_core(g, p)
            assert bool(is_alpha_core_stable(g, p, 0.6)) == oracle_core(g, p, 0.6)


def test_non_monotone_ns_matches_definition():
    g = HgcrpInstance.from_table(["a", "b", "c"], 2, {
        "a": 2, "b": 1, "c": 3, "a,b": 1, "a,c": 4, "b,c": 2, "a,b,c": 4})
    for p in iter_partitions(3, 2):
        assert bool(is_nash_stable(g, p)) == oracle_ns(g, p)
        assert bool(is_cis(g, p)) == oracle_cis(g, p)


@given(seed=st.integers(0, 10_000))
def test_witnesses_are_sound(seed):
    g = random_instance(6, 3, 3, beta=3, seed=seed)
    for k, p in enumerate(iter_partitions(6, 3)):
        if k % 17:
            continue
        ns = is_nash_stable(g, p)
        if not ns:
            w = ns.witness
            i, c = g.index(w["agent"]), g.coalition(w["target"])
            assert len(c) < g.kappa and c in p.coalitions
            assert g.utility(c + (i,)) > g.utility(p.coalition_of(i))
        cs = is_core_stable(g, p)
        if not cs:
            assert blocks(g, cs.witness["coalition"], p)
        pf = is_perfect(g, p)
        if not pf:
            for a, info in pf.witness["agents"].items():
                assert g.utility(info["coalition"]) == info["best"] > info["current"]


@given(seed=st.integers(0, 10_000), a=st.floats(0.05, 1.0), b=st.floats(0.05, 1.0))
def test_alpha_core_monotone_in_alpha(seed, a, b):
    lo, hi = sorted((a, b))
    g = random_instance(5, 3, 3, seed=seed)
    for p in list(iter_partitions(5, 3))[::11]:
        if is_alpha_core_stable(g, p, hi):
            assert is_alpha_core_stable(g, p, lo)


@pytest.mark.parametrize("seed", range(4))
def test_concept_implications(seed):
    for g in small_games(seed):
        space = PartitionSpace(g, 8)
        for p in space.partitions:
            ns, cis, cs = is_nash_stable(g, p), is_cis(g, p), is_core_stable(g, p)
            perfect = is_perfect(g, p)
            so, po = is_socially_optimal(g, p, space=space), is_pareto_optimal(g, p, space=space)
            if ns:
                assert cis
            if perfect:
                assert cs and so and po
            if so:
                assert po
