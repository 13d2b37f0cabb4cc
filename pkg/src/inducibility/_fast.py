"""Compiled kernels for the hot loops (canonical codes, 4-subset classification).

All kernels work on *state matrices*: ``S[u, v] = 1`` if ``u -> v``,
``S[u, v] = 2`` if ``v -> u`` and ``0`` otherwise.  Pair codes are base-3
integers with the first pair (lexicographic order) as the most significant
digit, so integer order equals lexicographic order of encodings.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def canon_codes(S, perms, pi, pj):
    """Minimum code over all permutations for each matrix in ``S`` (B, n, n).

    Returns ``(codes, argperm)``; valid while ``3**len(pi)`` fits in int64.
    """
    B = S.shape[0]
    P = perms.shape[0]
    m = pi.shape[0]
    pow3 = np.empty(m + 1, np.int64)
    pow3[0] = 1
    for k in range(1, m + 1):
        pow3[k] = pow3[k - 1] * 3
    codes = np.empty(B, np.int64)
    arg = np.empty(B, np.int64)
    for b in range(B):
        best = -1
        bestq = 0
        for q in range(P):
            code = 0
            worse = False
            for k in range(m):
                code = code * 3 + S[b, perms[q, pi[k]], perms[q, pj[k]]]
                if best >= 0:
                    prefix = best // pow3[m - 1 - k]
                    if code > prefix:
                        worse = True
                        break
                    if code < prefix:
                        # strictly better prefix: finish without comparisons
                        for kk in range(k + 1, m):
                            code = code * 3 + S[b, perms[q, pi[kk]], perms[q, pj[kk]]]
                        break
            if worse:
                continue
            if best < 0 or code < best:
                best = code
                bestq = q
        codes[b] = best
        arg[b] = bestq
    return codes, arg


@njit(cache=True, nogil=True)
def count4_range(S, lut, ncls, lo, hi):
    """Per-class counts of 4-subsets ``i<j<k<l`` with ``lo <= i < hi``."""
    n = S.shape[0]
    counts = np.zeros(ncls, np.int64)
    for i in range(lo, hi):
        for j in range(i + 1, n):
            cij = S[i, j] * 243
            for k in range(j + 1, n):
                cijk = cij + S[i, k] * 81 + S[j, k] * 9
                for l in range(k + 1, n):
                    counts[lut[cijk + S[i, l] * 27 + S[j, l] * 3 + S[k, l]]] += 1
    return counts


@njit(cache=True)
def count4_batch(S, lut, ncls):
    """Profiles of a batch of equally sized state matrices (B, n, n)."""
    B = S.shape[0]
    n = S.shape[1]
    out = np.zeros((B, ncls), np.int64)
    for b in range(B):
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    for l in range(k + 1, n):
                        c = (S[b, i, j] * 243 + S[b, i, k] * 81 + S[b, i, l] * 27
                             + S[b, j, k] * 9 + S[b, j, l] * 3 + S[b, k, l])
                        out[b, lut[c]] += 1
    return out


@njit(cache=True)
def count_class(S, lut, cid):
    n = S.shape[0]
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for l in range(k + 1, n):
                    c = (S[i, j] * 243 + S[i, k] * 81 + S[i, l] * 27
                         + S[j, k] * 9 + S[j, l] * 3 + S[k, l])
                    if lut[c] == cid:
                        total += 1
    return total


@njit(cache=True)
def triangle_counts(S):
    """(cyclic, transitive) triangle counts of a state matrix."""
    n = S.shape[0]
    cyc = 0
    trans = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = S[i, j]
            if a == 0:
                continue
            for k in range(j + 1, n):
                b = S[j, k]
                c = S[i, k]
                if b == 0 or c == 0:
                    continue
                # i->j->k->i or reverse
                if (a == 1 and b == 1 and c == 2) or (a == 2 and b == 2 and c == 1):
                    cyc += 1
                else:
                    trans += 1
    return cyc, trans
