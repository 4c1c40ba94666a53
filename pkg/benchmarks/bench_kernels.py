"""Time the numba kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--agents 18] [--kappa 6] [--skills 12] [--repeat 3]
"""
import argparse
import time

import numpy as np

from hegame import _kernels


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--agents", type=int, default=18)
    ap.add_argument("--kappa", type=int, default=6)
    ap.add_argument("--skills", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n, kappa = args.agents, args.kappa
    expertise = rng.integers(0, 4, size=(n, args.skills)).astype(np.float64)
    current = rng.uniform(0, 4 * args.skills, size=n)
    impls = _kernels.implementations()
    count = _kernels.subset_count(n, kappa)
    print(f"{count} coalitions of <= {kappa} among {n} agents, {args.skills} skills")

    # warm-up compiles (or loads cached) numba code outside the timed region
    small = impls["numpy"].combination_masks(4, 2)
    for impl in impls.values():
        impl.combination_masks(4, 2)
        u = impl.mask_utilities(expertise[:4], small)
        impl.first_alpha_block(small, u, current[:4], 1.0, 1e-9)
        impl.best_per_agent(small, u, 4)

    masks = impls["numpy"].combination_masks(n, kappa)
    utils = impls["numpy"].mask_utilities(expertise, masks)
    cases = {
        "combination_masks": lambda k: k.combination_masks(n, kappa),
        "mask_utilities": lambda k: k.mask_utilities(expertise, masks),
        # alpha tiny: no coalition blocks, so the whole list is scanned
        "first_alpha_block": lambda k: k.first_alpha_block(masks, utils, current, 1e-6, 1e-9),
        "best_per_agent": lambda k: k.best_per_agent(masks, utils, n),
    }
    names = sorted(impls)
    print(f"{'kernel':<20}" + "".join(f"{name:>12}" for name in names) + f"{'speedup':>10}")
    for label, call in cases.items():
        t = {name: best_time(lambda: call(impls[name]), args.repeat) for name in names}
        speedup = t["numpy"] / t["numba"] if "numba" in t else float("nan")
        print(f"{label:<20}" + "".join(f"{t[name]:>11.4f}s" for name in names) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
