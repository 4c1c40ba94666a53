"""Desk-scale acceptance suite.

Each criterion returns ``(ok, detail)``; :func:`run_all` times them and turns
capability errors into skips.  Used by ``heg verify-paper`` and by
``tests/test_acceptance.py``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from math import ceil, comb

import numpy as np

from . import algorithms as alg
from . import stability as st
from .config import GREEDY_RATIO, Config, resolve, tolerance
from .core import Instance, Partition, PartitionSpace, iter_partitions, joint_expertise, joint_utility, marginal_gain
from .errors import CapabilityError
from .generators import (
    SetSystem,
    from_graph,
    from_max_coverage,
    from_set_cover,
    hardness_witness_partition,
    padding_count,
    random_graph,
    random_instance,
    random_submodular_table,
)
from .hgcrp import HgcrpInstance, Order, check_monotone_submodular, lex_compare, psi, psi_maximal_partition


@dataclass
class CriterionResult:
    number: int
    title: str
    status: str  # "pass", "fail" or "skip"
    detail: str
    seconds: float
    time_limit: float

    def line(self) -> str:
        return (f"[{self.status.upper():4}] {self.number:2d}. {self.title} "
                f"({self.seconds:.1f}s / {self.time_limit:g}s): {self.detail}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


# 1 ----------------------------------------------------------------------------

def alice_bob_utility(cfg: Config):
    inst = Instance(("Alice", "Bob"), ("Python", "Java", "SQL"), [[1, 3, 3], [3, 3, 1]], 2)
    u = joint_utility(inst, ["Alice", "Bob"])
    each = [joint_expertise(inst, ["Alice", "Bob"], s) for s in inst.skills]
    ok = u == 9 and isinstance(u, int) and each == [3, 3, 3]
    return ok, f"U={u}, joint expertise={each}"


# 2 ----------------------------------------------------------------------------

def monotone_submodular_utilities(cfg: Config, count: int = 200):
    violations = identity_errors = exhaustive = sampled = 0
    for seed in range(count):
        r = _rng(10_000 + seed)
        n = int(r.integers(1, 21))
        beta = [None, 1, 2, 3, 5][seed % 5]
        g = random_instance(n, int(r.integers(1, 7)), int(r.integers(1, n + 1)), beta=beta,
                            density=float(r.uniform(0.3, 1.0)), seed=seed)
        if n <= 6:
            rep = check_monotone_submodular(g, config=cfg)
            exhaustive += 1
        else:
            rep = check_monotone_submodular(g, samples=10_000, seed=seed, config=cfg)
            sampled += 1
        violations += (not rep.monotone) + (not rep.submodular)
        tol = 0.0 if g.integral else 1e-9
        for _ in range(50):
            x = int(r.integers(n))
            c = [i for i in range(n) if i != x and r.random() < 0.5]
            diff = joint_utility(g, c + [x]) - joint_utility(g, c)
            if abs(marginal_gain(g, c, x) - diff) > tol:
                identity_errors += 1
    ok = violations == 0 and identity_errors == 0
    return ok, (f"{exhaustive} exhaustive + {sampled} sampled instances, "
                f"{violations} violations, {identity_errors} marginal-gain mismatches")


# 3 ----------------------------------------------------------------------------

def multiconcept_existence(cfg: Config, count: int = 50):
    failures = []
    for seed in range(count):
        r = _rng(20_000 + seed)
        n = int(r.integers(1, 8))
        kappa = int(r.integers(1, n + 1))
        if seed % 2 == 0:
            g = random_submodular_table(n, kappa, seed=seed, integral=seed % 4 == 0)
            rep = check_monotone_submodular(g, config=cfg)
            if not (rep.monotone and rep.submodular):
                failures.append(f"seed {seed}: generated table not monotone submodular")
                continue
        else:
            g = HgcrpInstance.from_instance(random_instance(
                n, int(r.integers(1, 5)), kappa, beta=[None, 2][seed % 4 == 1], seed=seed))
        space = PartitionSpace(g, cfg.partition_limit)
        p = psi_maximal_partition(g, config=cfg, space=space)
        checks = (st.is_nash_stable(g, p, config=cfg), st.is_core_stable(g, p, config=cfg),
                  st.is_pareto_optimal(g, p, config=cfg, space=space))
        bad = [rep.concept for rep in checks if not rep.holds]
        if bad:
            failures.append(f"seed {seed}: fails {bad}")
    return not failures, f"{count} instances, failures: {failures or 'none'}"


# 4 ----------------------------------------------------------------------------

def example_without_nash_stable(cfg: Config):
    g = HgcrpInstance.from_table(["1", "2"], None, {"1": 1, "1,2": 2, "2": 3})
    rep = check_monotone_submodular(g, config=cfg)
    stable = [p for p in iter_partitions(g.n, g.kappa) if st.is_nash_stable(g, p, config=cfg).holds]
    ok = not rep.monotone and not stable
    return ok, f"monotone={rep.monotone}, NS partitions found={len(stable)}"


# 5 ----------------------------------------------------------------------------

def _replay_increases_psi(g, p0: Partition, trace, eps) -> tuple[bool, Partition]:
    p, before = p0, psi(g, p0)
    for step in trace.steps:
        i = g.index(step.agent)
        target = tuple(j for j in g.coalition(step.target) if j != i)
        p = p.move(i, target)
        after = psi(g, p)
        if lex_compare(after, before, eps) is not Order.GREATER:
            return False, p
        before = after
    return True, p


def imitative_dynamics(cfg: Config, count: int = 100):
    failures = []
    total_moves = 0
    for seed in range(count):
        r = _rng(30_000 + seed)
        beta = [1, 2, 3][seed % 3]
        kappa = [2, 3, 4][(seed // 3) % 3]
        n = int(r.integers(kappa, 16))
        g = random_instance(n, int(r.integers(1, 7)), kappa, beta=beta,
                            density=float(r.uniform(0.3, 1.0)), seed=seed)
        p0 = alg.initial_block_partition(g, seed)
        p, trace = alg.imitative_brd(g, p0, seed=seed, config=cfg)
        total_moves += len(trace)
        bound = beta * len(g.skills) * (n // kappa) * kappa
        increasing, replayed = _replay_increases_psi(g, p0, trace, 0.0)
        if not st.is_nash_stable(g, p, config=cfg).holds:
            failures.append(f"seed {seed}: not NS")
        if len(trace) > bound:
            failures.append(f"seed {seed}: {len(trace)} moves > bound {bound}")
        if not increasing or replayed != p:
            failures.append(f"seed {seed}: potential not strictly increasing")
    return not failures, f"{count} runs, {total_moves} moves, failures: {failures or 'none'}"


# 6 ----------------------------------------------------------------------------

def _critical_count(g, members, eps) -> int:
    u = g.utility(members)
    return sum(u > g.utility([j for j in members if j != i]) + eps for i in members)


def cis_construction(cfg: Config, count: int = 100):
    not_cis, over_bound, gamma_flat, swaps = [], [], 0, 0
    for seed in range(count):
        r = _rng(40_000 + seed)
        kappa = int(r.integers(2, 5))
        n = int(r.integers(kappa, 13))
        beta = [None, None, 1, 2, 3][seed % 5]
        g = random_instance(n, int(r.integers(1, 7)), kappa, beta=beta,
                            density=float(r.uniform(0.3, 1.0)), seed=seed)
        eps = tolerance(g, cfg)
        p, trace = alg.cis_algorithm(g, seed, config=cfg)
        if not st.is_cis(g, p, config=cfg).holds:
            not_cis.append(seed)
        if len(trace) > (n // kappa) * n:
            over_bound.append(seed)
        for step in trace.steps:
            swaps += 1
            old = g.coalition(step.source)
            new = tuple(sorted([a for a in old if a != g.index(step.agent)] + [g.index(step.partner)]))
            if not _critical_count(g, new, eps) > _critical_count(g, old, eps):
                gamma_flat += 1
    ok = not not_cis and not over_bound and gamma_flat == 0
    return ok, (f"{count} runs, {swaps} swaps; not CIS: {not_cis or 'none'}; over bound: "
                f"{over_bound or 'none'}; swaps without strict gamma increase: {gamma_flat}")


# 7 ----------------------------------------------------------------------------

def _ratio_instances(count: int, base: int):
    for seed in range(count):
        r = _rng(base + seed)
        n = int(r.integers(1, 13))
        kappa = int(r.integers(1, min(4, n) + 1))
        if seed % 3 == 0:
            sets = [[e for e in range(1, 9) if r.random() < 0.35] for _ in range(n)]
            yield seed, from_max_coverage(SetSystem(8, tuple(map(tuple, sets)), kappa))
        else:
            yield seed, random_instance(n, int(r.integers(1, 7)), kappa,
                                        beta=[None, 1, 3][seed % 3],
                                        density=float(r.uniform(0.3, 1.0)), seed=seed)


def adversarial_coverage() -> Instance:
    # greedy takes the 4-element set first and then gains only 1
    return from_max_coverage(SetSystem(6, ((1, 2, 3), (4, 5, 6), (2, 3, 4, 5)), 2))


def greedy_ratio(cfg: Config, count: int = 100):
    worst = 1.0
    low = []
    for seed, g in _ratio_instances(count, 50_000):
        greedy = g.utility(alg.greedy_max_joint_utility(g))
        best = g.utility(alg.brute_force_max_joint_utility(g, config=cfg))
        ratio = 1.0 if best == 0 else greedy / best
        worst = min(worst, ratio)
        if ratio < GREEDY_RATIO - 1e-9:
            low.append(seed)
    adv = adversarial_coverage()
    adv_ratio = adv.utility(alg.greedy_max_joint_utility(adv)) / adv.utility(
        alg.brute_force_max_joint_utility(adv, config=cfg))
    ok = not low and adv_ratio < 1.0
    return ok, (f"worst ratio {worst:.4f} over {count} instances (below bound: {low or 'none'}); "
                f"adversarial coverage ratio {adv_ratio:.4f}")


# 8 ----------------------------------------------------------------------------

def greedy_core(cfg: Config, count: int = 100):
    failures = []
    for seed, g in _ratio_instances(count, 60_000):
        p = alg.greedy_core_partition(g)
        rep = st.is_alpha_core_stable(g, p, GREEDY_RATIO, config=cfg)
        if not rep.holds:
            failures.append((seed, rep.witness))
    return not failures, f"{count} instances, alpha=1-1/e, blocked: {failures or 'none'}"


# 9 ----------------------------------------------------------------------------

def _covers(ss: SetSystem) -> bool:
    universe = set(range(1, ss.m + 1))
    return any(set().union(*choice) >= universe
               for r in range(0, min(ss.k, ss.n) + 1)
               for choice in combinations(ss.sets, r))


def set_cover_family(max_m: int = 6, max_n: int = 6, ks=(2, 3), per_cell: int = 60, seed: int = 0):
    """All multisets of subsets when a cell is small, else a seeded sample."""
    r = _rng(70_000 + seed)
    for m in range(1, max_m + 1):
        subsets = [tuple(e for e in range(1, m + 1) if mask >> (e - 1) & 1) for mask in range(1 << m)]
        for k in ks:
            for n in range(k, max_n + 1):
                if comb(len(subsets) + n - 1, n) <= per_cell:
                    families = combinations_with_replacement(subsets, n)
                else:
                    families = ([subsets[int(i)] for i in r.integers(0, len(subsets), size=n)]
                                for _ in range(per_cell))
                for fam in families:
                    yield SetSystem(m, tuple(fam), k)


def hardness_construction(cfg: Config):
    counts = dict(instances=0, yes=0, no=0, degenerate=0, witness_missing=0)
    failures = []
    for ss in set_cover_family():
        counts["instances"] += 1
        x = padding_count(ss.n, ss.k)
        if x != max(0, ceil((ss.n - ss.k) / (ss.k - 1))) or ceil((ss.n + x) / ss.k) != x + 1:
            failures.append(f"(a) padding arithmetic n={ss.n} k={ss.k}")
        g = from_set_cover(ss)
        covered = _covers(ss)
        counts["yes" if covered else "no"] += 1
        space = PartitionSpace(g, max(cfg.partition_limit, g.n))
        best, _ = st.best_coalitions(g, config=cfg)
        perfect_rows = np.flatnonzero(np.all(space.utilities >= best - 1e-12, axis=1))
        if perfect_rows.size:
            p = space.partitions[int(perfect_rows[0])]
            assert st.is_perfect(g, p, config=cfg).holds
        if x == 0:
            # no padding agents: the grand coalition is always perfect
            counts["degenerate"] += 1
            if not perfect_rows.size:
                failures.append(f"(b) n=k instance {ss.to_dict()} without a perfect partition")
        elif bool(perfect_rows.size) != covered:
            failures.append(f"(b) {ss.to_dict()}: perfect={bool(perfect_rows.size)} cover={covered}")
        w = hardness_witness_partition(g)
        if w is None:
            counts["witness_missing"] += 1
            if not covered:
                failures.append(f"(c) no witness for no-instance {ss.to_dict()}")
            continue
        po = st.is_pareto_optimal(g, w, config=cfg, space=space).holds
        if po == covered:
            failures.append(f"(c) {ss.to_dict()}: witness PO={po} cover={covered}")
    detail = ", ".join(f"{k}={v}" for k, v in counts.items())
    detail += ("; (b) equivalence checked on instances with padding (n > k), "
               "n = k instances checked for a perfect grand coalition instead")
    return not failures, f"{detail}; failures: {failures[:5] or 'none'}"


# 10 ---------------------------------------------------------------------------

def hvcg_correspondence(cfg: Config, count: int = 20):
    mismatches = checked = 0
    for seed in range(count):
        r = _rng(80_000 + seed)
        nv = int(r.integers(2, 11))
        wg = random_graph(nv, int(r.integers(1, min(4, nv) + 1)), p=float(r.uniform(0.2, 0.8)),
                          max_weight=[None, 5][seed % 2], seed=seed)
        g = from_graph(wg)
        tol = 0.0 if g.integral else 1e-9
        for size in range(1, g.kappa + 1):
            for c in combinations(range(nv), size):
                names = {wg.vertices[i] for i in c}
                direct = sum(w for u, v, w in wg.edges if u in names or v in names)
                checked += 1
                if abs(joint_utility(g, c) - direct) > tol:
                    mismatches += 1
    return mismatches == 0, f"{count} graphs, {checked} coalitions, {mismatches} mismatches"


# 11 ---------------------------------------------------------------------------

def _lattice_games(n: int, kappa: int, seed: int):
    r = _rng(90_000 + 100 * n + 10 * kappa + seed)
    yield random_instance(n, int(r.integers(1, 4)), kappa, beta=2, seed=seed)
    yield random_instance(n, int(r.integers(1, 4)), kappa, seed=seed)
    yield random_submodular_table(n, kappa, seed=seed, integral=seed % 2 == 0)
    table = r.integers(0, 6, size=1 << n).astype(float)
    table[0] = 0.0
    yield HgcrpInstance([f"h{i + 1}" for i in range(n)], kappa, values=table)


def containment_lattice(cfg: Config, per_shape: int = 3):
    violations = []
    partitions = 0
    for n in range(1, 6):
        for kappa in range(1, n + 1):
            for seed in range(per_shape):
                for g in _lattice_games(n, kappa, seed):
                    space = PartitionSpace(g, cfg.partition_limit)
                    subsets = [c for s in range(1, kappa + 1) for c in combinations(range(n), s)]
                    for p in space.partitions:
                        partitions += 1
                        ns = st.is_nash_stable(g, p, config=cfg).holds
                        cis = st.is_cis(g, p, config=cfg).holds
                        perfect = st.is_perfect(g, p, config=cfg).holds
                        so = st.is_socially_optimal(g, p, config=cfg, space=space).holds
                        po = st.is_pareto_optimal(g, p, config=cfg, space=space).holds
                        cs = st.is_core_stable(g, p, config=cfg).holds
                        cs1 = st.is_alpha_core_stable(g, p, 1.0, config=cfg).holds
                        by_definition = not any(st.blocks(g, c, p, config=cfg) for c in subsets)
                        if ns and not cis:
                            violations.append(("NS=>CIS", n, kappa, seed))
                        if perfect and not so:
                            violations.append(("Perfect=>SO", n, kappa, seed))
                        if so and not po:
                            violations.append(("SO=>PO", n, kappa, seed))
                        if not cs == cs1 == by_definition:
                            violations.append(("CS<=>1-CS", n, kappa, seed))
    return not violations, f"{partitions} partitions scanned, violations: {violations[:5] or 'none'}"


CRITERIA = [
    (1, "Alice and Bob joint utility", alice_bob_utility, 1.0),
    (2, "Monotone submodular joint utility", monotone_submodular_utilities, 10.0),
    (3, "NS+CS+PO potential maximiser", multiconcept_existence, 60.0),
    (4, "Non-monotone game without NS partition", example_without_nash_stable, 1.0),
    (5, "Imitative dynamics reach NS within bound", imitative_dynamics, 30.0),
    (6, "CIS swap procedure", cis_construction, 30.0),
    (7, "Greedy coalition ratio", greedy_ratio, 60.0),
    (8, "Greedy approximate core", greedy_core, 120.0),
    (9, "Set-cover hardness construction", hardness_construction, 60.0),
    (10, "Vertex-cover game correspondence", hvcg_correspondence, 10.0),
    (11, "Containment lattice", containment_lattice, 30.0),
]


def run_criterion(number: int, config: Config | None = None) -> CriterionResult:
    cfg = resolve(config)
    _, title, fn, limit = next(c for c in CRITERIA if c[0] == number)
    start = time.perf_counter()
    try:
        ok, detail = fn(cfg)
        status = "pass" if ok else "fail"
    except CapabilityError as exc:
        status, detail = "skip", f"capability limit: {exc}"
    seconds = time.perf_counter() - start
    if status == "pass" and seconds > limit:
        status, detail = "fail", f"{detail}; exceeded runtime limit"
    return CriterionResult(number, title, status, detail, seconds, limit)


def run_all(config: Config | None = None, echo=None) -> list[CriterionResult]:
    results = []
    for number, *_ in CRITERIA:
        res = run_criterion(number, config)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
