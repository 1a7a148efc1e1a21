"""Compiled sufficiency kernel for high-volume sampling.

``sufficient_kernel`` reproduces ``ftcheck.check_sufficiency`` (two faults,
output tiles excluded) on raw arrays: support and generator-coefficient bit
vectors per step.  Residues are taken as syndromes under a parity-check
matrix of the outcome space, so every fault location's residue is an XOR of
single-flip syndromes and consistent pairs share a bucket.
"""

from __future__ import annotations

import numba
import numpy as np
from numba import njit, prange, uint64

from .rng import GAMMA

# the bundled TBB is too old for numba; the portable work-queue layer is enough here
if numba.config.THREADING_LAYER == "default":
    numba.config.THREADING_LAYER = "workqueue"

_GAMMA = np.uint64(GAMMA)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True)
def _sample_key(seed_key, index):
    return _mix64(seed_key + uint64(index) * _GAMMA)


@njit(cache=True, inline="always")
def _below(key, j, m):
    x = _mix64(key + uint64(j + 1) * _GAMMA)
    return np.int64(((x >> uint64(32)) * uint64(m)) >> uint64(32))


MAX_STEPS = 62
MAX_BUCKET_BITS = 12


def make_scratch(n_tiles: int):
    """Work buffers for ``_check`` (reused across calls by one thread)."""
    max_locs = MAX_STEPS * (n_tiles + 1) + n_tiles
    return (
        np.zeros(64, dtype=np.int64),  # eliminated rows by pivot column
        np.zeros(64, dtype=np.int64),  # pivot-present flags
        np.zeros(64, dtype=np.int64),  # step tags, then single-flip syndromes
        np.empty(max_locs, dtype=np.int64),  # residues
        np.empty(max_locs, dtype=np.int64),  # forward option
        np.empty(max_locs, dtype=np.int64),  # backward option (-1 for outcome flips)
        np.zeros((1 << MAX_BUCKET_BITS) + 1, dtype=np.int64),  # bucket starts
        np.empty(max_locs, dtype=np.int64),  # locations ordered by bucket
    )


@njit(cache=True, inline="always")
def _pair_bad(opt1, opt2, ix, iy):
    """True unless the two locations share a flip option (then they can cancel)."""
    if opt1[ix] == opt1[iy]:
        return False
    if opt2[iy] >= 0 and opt1[ix] == opt2[iy]:
        return False
    if opt2[ix] >= 0 and (opt2[ix] == opt1[iy] or (opt2[iy] >= 0 and opt2[ix] == opt2[iy])):
        return False
    return True


@njit(cache=True)
def _check(sup, co, n, n_tiles, fault_mask, k, basis, pivots, unit, res, opt1, opt2, starts, order):
    for i in range(n):
        if co[i] < 0:
            return False
    # Eliminate the rows of the coefficient matrix while tracking which steps
    # were combined; rows that vanish give a basis of the left null space,
    # i.e. a parity-check matrix H of the outcome space.  H @ flips is the
    # (compressed) residue of a flip vector, and unit[i] is column i of H.
    for j in range(k):
        pivots[j] = 0
    rank = 0
    n_checks = 0
    for i in range(n):
        a = co[i]
        tag = np.int64(1) << i
        for j in range(k):
            if (a >> j) & 1:
                if pivots[j]:
                    a ^= basis[j]
                    tag ^= unit[j]
                else:
                    pivots[j] = 1
                    basis[j] = a
                    unit[j] = tag
                    rank += 1
                    break
        if a == 0:
            starts[n_checks] = tag
            n_checks += 1
    if rank < k:
        return False
    free_bits = n_checks
    for i in range(n):
        c = np.int64(0)
        for b in range(n_checks):
            c |= ((starts[b] >> i) & 1) << b
        if c == 0:
            return False  # an undetectable single outcome flip
        order[i] = c
    for i in range(n):
        unit[i] = order[i]

    nloc = 0
    for i in range(n):
        res[nloc] = unit[i]
        opt1[nloc] = np.int64(1) << i
        opt2[nloc] = -1
        nloc += 1
    # locations with zero residue either fail on their own or offer a zero
    # flip option, so pairs among them always cancel and are not stored
    for q in range(n_tiles):
        if not (fault_mask >> q) & 1:
            continue
        col = np.int64(0)
        rcol = np.int64(0)
        for i in range(n):
            if (sup[i] >> q) & 1:
                col |= np.int64(1) << i
                rcol ^= unit[i]
        # one class per distinct forward mask: slot 0, then just after each step touching q
        fwd = col
        r = rcol
        i = 0
        while True:
            bwd = col ^ fwd
            if r == 0:
                if fwd != 0 and bwd != 0:
                    return False
            else:
                res[nloc] = r
                opt1[nloc] = fwd
                opt2[nloc] = bwd
                nloc += 1
            if fwd == 0:
                break
            while not (fwd >> i) & 1:
                i += 1
            fwd ^= np.int64(1) << i
            r ^= unit[i]

    if free_bits <= MAX_BUCKET_BITS:
        nb = np.int64(1) << free_bits
        for b in range(nb + 1):
            starts[b] = 0
        for x in range(nloc):
            starts[res[x] + 1] += 1
        for b in range(nb):
            starts[b + 1] += starts[b]
        for x in range(nloc):
            b = res[x]
            order[starts[b]] = x
            starts[b] += 1
        # starts[b] now marks the end of bucket b
        lo = 0
        for b in range(nb):
            hi = starts[b]
            for x in range(lo, hi):
                for y in range(x + 1, hi):
                    if _pair_bad(opt1, opt2, order[x], order[y]):
                        return False
            lo = hi
        return True

    srt = np.argsort(res[:nloc])
    a = 0
    while a < nloc:
        b = a + 1
        while b < nloc and res[srt[b]] == res[srt[a]]:
            b += 1
        for x in range(a, b):
            for y in range(x + 1, b):
                if _pair_bad(opt1, opt2, srt[x], srt[y]):
                    return False
        a = b
    return True


def sufficient_kernel(sup, co, n, n_tiles, fault_mask, k):
    """True iff the ``n``-step sequence measures the full frame and tolerates any two faults."""
    if n > MAX_STEPS:
        raise ValueError(f"at most {MAX_STEPS} steps are supported")
    return _check(sup, co, n, n_tiles, fault_mask, k, *make_scratch(n_tiles))


@njit(cache=True)
def _fill(seed_key, index, sup_pool, co_pool, offsets, sizes, position_pool, sup, co):
    key = _sample_key(seed_key, index)
    for j in range(position_pool.shape[0]):
        pid = position_pool[j]
        x = offsets[pid] + _below(key, j, sizes[pid])
        sup[j] = sup_pool[x]
        co[j] = co_pool[x]


@njit(cache=True, parallel=True)
def sample_and_check(seed_key, start, count, sup_pool, co_pool, offsets, sizes, position_pool, n_tiles, fault_mask, k):
    """Verdict for each sample index in ``[start, start + count)``."""
    out = np.zeros(count, dtype=np.bool_)
    n = position_pool.shape[0]
    n_chunks = 64
    step = (count + n_chunks - 1) // n_chunks
    max_locs = n * (n_tiles + 1) + n_tiles
    for c in prange(n_chunks):
        sup = np.empty(n, dtype=np.int64)
        co = np.empty(n, dtype=np.int64)
        basis = np.zeros(64, dtype=np.int64)
        pivots = np.zeros(64, dtype=np.int64)
        unit = np.zeros(64, dtype=np.int64)
        res = np.empty(max_locs, dtype=np.int64)
        opt1 = np.empty(max_locs, dtype=np.int64)
        opt2 = np.empty(max_locs, dtype=np.int64)
        starts = np.zeros((1 << MAX_BUCKET_BITS) + 1, dtype=np.int64)
        order = np.empty(max_locs, dtype=np.int64)
        lo = c * step
        hi = min(count, lo + step)
        for t in range(lo, hi):
            _fill(seed_key, start + t, sup_pool, co_pool, offsets, sizes, position_pool, sup, co)
            out[t] = _check(sup, co, n, n_tiles, fault_mask, k, basis, pivots, unit, res, opt1, opt2, starts, order)
    return out


def kernel_seed_key(seed: int) -> np.uint64:
    from .rng import seed_key

    return np.uint64(seed_key(seed))


def check_arrays(supports, coeffs, n_tiles: int, fault_mask: int, k: int) -> bool:
    sup = np.asarray(supports, dtype=np.int64)
    co = np.asarray(coeffs, dtype=np.int64)
    return bool(sufficient_kernel(sup, co, len(sup), n_tiles, np.int64(fault_mask), k))
