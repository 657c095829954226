"""Hot loops: bitset branch-and-bound for the maximum induced matching.

Every kernel is plain Python over numpy arrays. When numba is importable and
``NC_GEOM_NO_NUMBA`` is unset (or "0"), the same source is compiled with
``@njit``; otherwise it runs interpreted, which is slow but bit-identical.

Node sets are little-endian bitsets stored as ``uint64[W]`` rows, with
``W = ceil(n / 64)``.
"""
from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("NC_GEOM_NO_NUMBA", "0") in ("", "0")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


BACKEND = "numba" if USE_NUMBA else "python"

# counter layout: [calls, budget (0 = unlimited), aborted flag]
CALLS, BUDGET, ABORTED = 0, 1, 2


def pack_rows(mat: np.ndarray) -> np.ndarray:
    """Pack an ``(n, k)`` boolean matrix into ``(n, ceil(k / 64))`` uint64 bitset rows."""
    n, k = mat.shape
    w = max(1, (k + 63) // 64)
    packed = np.packbits(np.asarray(mat, dtype=bool), axis=1, bitorder="little")
    out = np.zeros((n, w * 8), dtype=np.uint8)
    out[:, : packed.shape[1]] = packed
    return out.view("<u8").astype(np.uint64).reshape(n, w)


def full_set(n: int) -> np.ndarray:
    w = max(1, (n + 63) // 64)
    bits = np.zeros(w * 64, dtype=bool)
    bits[:n] = True
    return np.packbits(bits, bitorder="little").view("<u8").astype(np.uint64)


def members(bits: np.ndarray) -> list[int]:
    raw = np.unpackbits(bits.astype("<u8").view(np.uint8), bitorder="little")
    return np.nonzero(raw)[0].tolist()


@njit(cache=True, nogil=True)
def popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    x = x + (x >> np.uint64(8))
    x = x + (x >> np.uint64(16))
    x = x + (x >> np.uint64(32))
    return np.int64(x & np.uint64(0x7F))


@njit(cache=True, nogil=True)
def lowest_bit(x):
    """Index of the lowest set bit of a nonzero word."""
    low = x & (~x + np.uint64(1))
    return popcount(low - np.uint64(1))


@njit(cache=True, nogil=True)
def is_empty(a):
    for k in range(a.shape[0]):
        if a[k] != np.uint64(0):
            return False
    return True


@njit(cache=True, nogil=True)
def first_member(a, start):
    """Smallest member of ``a`` that is >= ``start``, or -1."""
    w = a.shape[0]
    k = start >> 6
    if k >= w:
        return -1
    word = a[k] & ~((np.uint64(1) << np.uint64(start & 63)) - np.uint64(1))
    while True:
        if word != np.uint64(0):
            return k * 64 + lowest_bit(word)
        k += 1
        if k >= w:
            return -1
        word = a[k]


@njit(cache=True, nogil=True)
def lex_less(a, b):
    """Lexicographic order of equal-size sets: the smaller set owns min(a ^ b)."""
    for k in range(a.shape[0]):
        x = a[k] ^ b[k]
        if x != np.uint64(0):
            low = x & (~x + np.uint64(1))
            return (a[k] & low) != np.uint64(0)
    return False


@njit(cache=True, nogil=True)
def matching_ub(cand, far):
    """Even-rounded count of members of ``cand`` with a far partner inside ``cand``."""
    w = cand.shape[0]
    count = 0
    u = first_member(cand, 0)
    while u >= 0:
        for k in range(w):
            if far[u, k] & cand[k] != np.uint64(0):
                count += 1
                break
        u = first_member(cand, u + 1)
    return count - (count & 1)


@njit(cache=True, nogil=True)
def _search(cand, need, conn, far, depth, out, scratch, counter):
    """Lexicographically smallest maximum induced matching of ``far`` inside ``cand``.

    Returns its size in nodes (even) and leaves the node set in ``out[depth]``;
    returns -1 when the maximum is below ``need``.
    """
    w = cand.shape[0]
    counter[CALLS] += 1
    if counter[BUDGET] > 0 and counter[CALLS] > counter[BUDGET]:
        counter[ABORTED] = 1
    best = -1
    cur = scratch[depth, 0]
    avail = scratch[depth, 1]
    lens = scratch[depth, 2]
    sub = scratch[depth, 3]
    vcur = scratch[depth, 4]
    trial = scratch[depth, 5]
    if matching_ub(cand, far) >= need and counter[ABORTED] == 0:
        for k in range(w):
            avail[k] = cand[k]
        v = first_member(cand, 0)
        while v >= 0:
            # solutions whose smallest node is v draw everything else from avail
            avail[v >> 6] &= ~(np.uint64(1) << np.uint64(v & 63))
            thr_v = need if best < 0 else best + 2
            partners = False
            for k in range(w):
                lens[k] = avail[k] & conn[v, k]
                if avail[k] & far[v, k] != np.uint64(0):
                    partners = True
            if partners and 2 + matching_ub(lens, far) >= thr_v:
                vbest = -1
                u = first_member(avail, v + 1)
                while u >= 0:
                    if far[v, u >> 6] & (np.uint64(1) << np.uint64(u & 63)) != np.uint64(0):
                        for k in range(w):
                            sub[k] = lens[k] & conn[u, k]
                        thr = thr_v if vbest < 0 else vbest
                        s = _search(sub, thr - 2, conn, far, depth + 1, out, scratch, counter)
                        if s >= 0:
                            for k in range(w):
                                trial[k] = out[depth + 1, k]
                            trial[v >> 6] |= np.uint64(1) << np.uint64(v & 63)
                            trial[u >> 6] |= np.uint64(1) << np.uint64(u & 63)
                            if vbest < 0 or s + 2 > vbest or lex_less(trial, vcur):
                                vbest = s + 2
                                for k in range(w):
                                    vcur[k] = trial[k]
                    if counter[ABORTED] != 0:
                        break
                    u = first_member(avail, u + 1)
                if vbest >= 0:
                    best = vbest
                    for k in range(w):
                        cur[k] = vcur[k]
            if counter[ABORTED] != 0:
                break
            v = first_member(cand, v + 1)
    if best < 0 and need <= 0:
        best = 0
        for k in range(w):
            cur[k] = np.uint64(0)
    if best >= 0:
        for k in range(w):
            out[depth, k] = cur[k]
    return best


def max_induced_matching(conn: np.ndarray, far: np.ndarray, budget: int = 0):
    """Run the search over all ``n`` nodes.

    Returns ``(size, node_indices, exact)``; ``exact`` is False when the
    call budget ran out and the result is only a lower bound.
    """
    n = conn.shape[0]
    if n == 0:
        return 0, [], True
    w = conn.shape[1]
    depth = n // 2 + 2
    out = np.zeros((depth + 1, w), dtype=np.uint64)
    scratch = np.zeros((depth + 1, 6, w), dtype=np.uint64)
    counter = np.zeros(3, dtype=np.int64)
    counter[BUDGET] = budget
    size = _search(full_set(n), 0, conn, far, 0, out, scratch, counter)
    return int(size), members(out[0]), counter[ABORTED] == 0


def search_calls(conn: np.ndarray, far: np.ndarray) -> int:
    """Number of recursive calls the search makes (used by the benchmark)."""
    n = conn.shape[0]
    if n == 0:
        return 0
    w = conn.shape[1]
    depth = n // 2 + 2
    out = np.zeros((depth + 1, w), dtype=np.uint64)
    scratch = np.zeros((depth + 1, 6, w), dtype=np.uint64)
    counter = np.zeros(3, dtype=np.int64)
    _search(full_set(n), 0, conn, far, 0, out, scratch, counter)
    return int(counter[CALLS])
