# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled edit-distance kernels.

Behaviourally identical to ``_editdist_py``; that module is the reference.
"""
from libc.stdlib cimport free, malloc


def levenshtein(str a, str b):
    """Minimal number of single-character edits turning ``a`` into ``b``."""
    return _dp(a, b, -1)


cdef long _dp(str a, str b, long bound) except -2:
    # Two-row DP over the shorter string. With bound >= 0 the exact distance
    # is returned when it is <= bound, otherwise bound + 1 (early exit).
    cdef Py_ssize_t la = len(a), lb = len(b)
    cdef str tmp
    if la > lb:
        tmp = a
        a = b
        b = tmp
        la, lb = lb, la
    if bound >= 0 and lb - la > bound:
        return bound + 1
    if la == 0:
        return lb
    cdef long* prev = <long*> malloc((la + 1) * sizeof(long))
    cdef long* curr = <long*> malloc((la + 1) * sizeof(long))
    cdef Py_UCS4* abuf = <Py_UCS4*> malloc(la * sizeof(Py_UCS4))
    if prev == NULL or curr == NULL or abuf == NULL:
        if prev != NULL:
            free(prev)
        if curr != NULL:
            free(curr)
        if abuf != NULL:
            free(abuf)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef long v, ins, dele, best, out
    cdef long* swap
    cdef Py_UCS4 cb
    try:
        for j in range(la):
            abuf[j] = a[j]
        for j in range(la + 1):
            prev[j] = j
        for i in range(1, lb + 1):
            cb = b[i - 1]
            curr[0] = i
            best = i
            for j in range(1, la + 1):
                v = prev[j - 1]
                if abuf[j - 1] != cb:
                    v += 1
                ins = curr[j - 1] + 1
                if ins < v:
                    v = ins
                dele = prev[j] + 1
                if dele < v:
                    v = dele
                curr[j] = v
                if v < best:
                    best = v
            if bound >= 0 and best > bound:
                return bound + 1
            swap = prev
            prev = curr
            curr = swap
        out = prev[la]
        return out
    finally:
        free(prev)
        free(curr)
        free(abuf)


def nearest(str query, candidates):
    """Index and distance of the candidate closest to ``query``.

    Ties go to the shorter candidate, then the lexicographically smaller
    one, then the earlier position. Raises ValueError on an empty list.
    """
    cdef Py_ssize_t n = len(candidates)
    if n == 0:
        raise ValueError("empty candidate list")
    cdef Py_ssize_t lq = len(query), lc, lbest
    cdef Py_ssize_t best_i = -1
    cdef long best_d = -1
    cdef str best_s = None
    cdef str cand
    cdef long d, diff
    cdef Py_ssize_t i
    for i in range(n):
        cand = <str> candidates[i]
        if best_d >= 0:
            diff = len(cand) - lq
            if diff < 0:
                diff = -diff
            if diff > best_d:
                continue
            d = _dp(query, cand, best_d)
            if d > best_d:
                continue
            if d == best_d:
                lc = len(cand)
                lbest = len(best_s)
                if lc < lbest or (lc == lbest and cand < best_s):
                    best_i = i
                    best_s = cand
                continue
        else:
            d = _dp(query, cand, -1)
        best_d = d
        best_i = i
        best_s = cand
    return best_i, best_d
