"""Hot loops of the brute-force oracles.

Coalitions are int64 bitmasks (bit ``i`` set when agent ``i`` is a member).
Every kernel has a numba implementation and a pure-numpy one with identical
results.  The numba path is used when numba imports cleanly and the
``HEG_DISABLE_NUMBA`` environment variable is not set to a truthy value.
"""
from __future__ import annotations

import itertools
import os
from functools import lru_cache
from math import comb
from types import SimpleNamespace

import numpy as np

from .config import thread_cap

_CHUNK = 4096


def subset_count(n: int, kmax: int) -> int:
    """Number of non-empty subsets of ``n`` agents with at most ``kmax`` members."""
    return sum(comb(n, r) for r in range(1, min(kmax, n) + 1))


def _member_bits(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


# -- numpy -----------------------------------------------------------------

def _np_combination_masks(n: int, kmax: int) -> np.ndarray:
    out = [
        sum(1 << i for i in combo)
        for r in range(1, min(kmax, n) + 1)
        for combo in itertools.combinations(range(n), r)
    ]
    return np.array(out, dtype=np.int64)


def _np_mask_utilities(expertise: np.ndarray, masks: np.ndarray) -> np.ndarray:
    n = expertise.shape[0]
    out = np.zeros(masks.shape[0], dtype=expertise.dtype)
    for lo in range(0, masks.shape[0], _CHUNK):
        bits = _member_bits(masks[lo:lo + _CHUNK], n)
        # expertise is non-negative, so zero is a safe floor for non-members
        joint = np.where(bits[:, :, None], expertise[None, :, :], 0).max(axis=1)
        out[lo:lo + _CHUNK] = joint.sum(axis=1)
    return out


def _np_first_alpha_block(masks, utils, current, alpha, eps) -> int:
    n = current.shape[0]
    for lo in range(0, masks.shape[0], _CHUNK):
        bits = _member_bits(masks[lo:lo + _CHUNK], n)
        worst = np.where(bits, current[None, :], -np.inf).max(axis=1)
        hit = alpha * utils[lo:lo + _CHUNK] > worst + eps
        if hit.any():
            return lo + int(np.argmax(hit))
    return -1


def _np_best_per_agent(masks, utils, n):
    best = np.full(n, -np.inf)
    arg = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        sel = ((masks >> i) & 1).astype(bool)
        if not sel.any():
            continue
        vals = np.where(sel, utils, -np.inf)
        k = int(np.argmax(vals))
        best[i], arg[i] = vals[k], k
    return best, arg


NUMPY = SimpleNamespace(
    name="numpy",
    combination_masks=_np_combination_masks,
    mask_utilities=_np_mask_utilities,
    first_alpha_block=_np_first_alpha_block,
    best_per_agent=_np_best_per_agent,
)


# -- numba -----------------------------------------------------------------

def _build_numba():
    import warnings

    import numba
    from numba import njit, prange

    # old system TBB is skipped in favour of the OpenMP/workqueue layers
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)

    cap = thread_cap()
    if cap is not None:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))

    @njit(cache=True)
    def _fill_combinations(n, kmax, out):
        pos = 0
        idx = np.empty(max(kmax, 1), np.int64)
        one = np.int64(1)
        for r in range(1, kmax + 1):
            for t in range(r):
                idx[t] = t
            while True:
                m = np.int64(0)
                for t in range(r):
                    m |= one << idx[t]
                out[pos] = m
                pos += 1
                t = r - 1
                while t >= 0 and idx[t] == n - r + t:
                    t -= 1
                if t < 0:
                    break
                idx[t] += 1
                for u in range(t + 1, r):
                    idx[u] = idx[u - 1] + 1
        return out

    def combination_masks(n, kmax):
        kmax = min(kmax, n)
        out = np.empty(subset_count(n, kmax), np.int64)
        return _fill_combinations(n, kmax, out)

    @njit(cache=True, parallel=True)
    def mask_utilities(expertise, masks):
        n_skills = expertise.shape[1]
        out = np.zeros(masks.shape[0], expertise.dtype)
        for k in prange(masks.shape[0]):
            acc = out[k]
            for j in range(n_skills):
                best = out[k]
                m = masks[k]
                i = 0
                while m:
                    if m & 1:
                        v = expertise[i, j]
                        if v > best:
                            best = v
                    m >>= 1
                    i += 1
                acc += best
            out[k] = acc
        return out

    @njit(cache=True)
    def first_alpha_block(masks, utils, current, alpha, eps):
        for k in range(masks.shape[0]):
            challenge = alpha * utils[k]
            m = masks[k]
            i = 0
            blocked = True
            while m:
                if (m & 1) and not (challenge > current[i] + eps):
                    blocked = False
                    break
                m >>= 1
                i += 1
            if blocked:
                return k
        return -1

    @njit(cache=True)
    def best_per_agent(masks, utils, n):
        best = np.full(n, -np.inf)
        arg = np.full(n, -1, np.int64)
        for k in range(masks.shape[0]):
            m = masks[k]
            i = 0
            while m:
                if (m & 1) and utils[k] > best[i]:
                    best[i] = utils[k]
                    arg[i] = k
                m >>= 1
                i += 1
        return best, arg

    return SimpleNamespace(
        name="numba",
        combination_masks=combination_masks,
        mask_utilities=mask_utilities,
        first_alpha_block=first_alpha_block,
        best_per_agent=best_per_agent,
    )


def _numba_disabled() -> bool:
    return os.environ.get("HEG_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    NUMBA = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA = None

_impl = NUMPY if (NUMBA is None or _numba_disabled()) else NUMBA
BACKEND = _impl.name


def implementations() -> dict[str, SimpleNamespace]:
    out = {"numpy": NUMPY}
    if NUMBA is not None:
        out["numba"] = NUMBA
    return out


@lru_cache(maxsize=64)
def combination_masks(n: int, kmax: int) -> np.ndarray:
    """All non-empty subsets of size <= kmax, by size then lexicographically."""
    masks = _impl.combination_masks(n, kmax)
    masks.setflags(write=False)
    return masks


def mask_utilities(expertise: np.ndarray, masks: np.ndarray) -> np.ndarray:
    return _impl.mask_utilities(expertise, np.ascontiguousarray(masks, dtype=np.int64))


def first_alpha_block(masks, utils, current, alpha: float, eps: float) -> int:
    return int(_impl.first_alpha_block(
        np.ascontiguousarray(masks, dtype=np.int64),
        np.ascontiguousarray(utils, dtype=np.float64),
        np.ascontiguousarray(current, dtype=np.float64),
        float(alpha), float(eps),
    ))


def best_per_agent(masks, utils, n: int):
    return _impl.best_per_agent(
        np.ascontiguousarray(masks, dtype=np.int64),
        np.ascontiguousarray(utils, dtype=np.float64),
        n,
    )
