"""Pure-Python edit-distance kernels.

Reference implementation for the compiled extension in ``_editdist.pyx``;
the two must stay behaviourally identical (see tests/test_distance.py).
"""


def levenshtein(a: str, b: str) -> int:
    """Minimal number of single-character edits turning ``a`` into ``b``."""
    return _dp(a, b, -1)


def _dp(a, b, bound):
    # Two-row DP over the shorter string. With bound >= 0 the exact distance
    # is returned when it is <= bound, otherwise bound + 1 (early exit).
    la, lb = len(a), len(b)
    if la > lb:
        a, b = b, a
        la, lb = lb, la
    if bound >= 0 and lb - la > bound:
        return bound + 1
    if la == 0:
        return lb
    prev = list(range(la + 1))
    curr = [0] * (la + 1)
    for i in range(1, lb + 1):
        cb = b[i - 1]
        curr[0] = i
        best = i
        for j in range(1, la + 1):
            v = prev[j - 1]
            if a[j - 1] != cb:
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
        prev, curr = curr, prev
    return prev[la]


def nearest(query: str, candidates) -> tuple[int, int]:
    """Index and distance of the candidate closest to ``query``.

    Ties go to the shorter candidate, then the lexicographically smaller
    one, then the earlier position. Raises ValueError on an empty list.
    """
    if not candidates:
        raise ValueError("empty candidate list")
    lq = len(query)
    best_i = -1
    best_d = -1
    best_s = None
    for i, cand in enumerate(candidates):
        if best_d >= 0:
            if abs(len(cand) - lq) > best_d:
                continue
            d = _dp(query, cand, best_d)
            if d > best_d:
                continue
            if d == best_d:
                lc, lbest = len(cand), len(best_s)
                if lc < lbest or (lc == lbest and cand < best_s):
                    best_i, best_s = i, cand
                continue
        else:
            d = _dp(query, cand, -1)
        best_d, best_i, best_s = d, i, cand
    return best_i, best_d
