# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of `_iso_py`: the same backtracking kernels with the inner
loop in C and the GIL released while matching.  Selected automatically at
import by `motifdiff.isomorphism` when present."""

import numpy as np

from posix.time cimport CLOCK_MONOTONIC, clock_gettime, timespec

from motifdiff._iso_py import _match_order


cdef double _now() noexcept nogil:
    cdef timespec ts
    clock_gettime(CLOCK_MONOTONIC, &ts)
    return ts.tv_sec + ts.tv_nsec * 1e-9


cdef long _search(int depth, int k, int n,
                  const int* order,
                  const int* sub_et,
                  const int* host_et,
                  const int* cand_flat,
                  const int* cand_off,
                  int* mapping,
                  unsigned char* used,
                  double deadline,
                  bint first_only,
                  long* steps) noexcept nogil:
    """Count completions of the partial mapping; -1 signals timeout."""
    cdef long total = 0
    cdef long got
    cdef int p, h, ci, q_idx, q, g
    cdef bint ok
    if depth == k:
        return 1
    p = order[depth]
    for ci in range(cand_off[depth], cand_off[depth + 1]):
        h = cand_flat[ci]
        steps[0] += 1
        if (steps[0] & 0xFF) == 0 and _now() > deadline:
            return -1
        if used[h]:
            continue
        ok = True
        for q_idx in range(depth):
            q = order[q_idx]
            g = mapping[q]
            if sub_et[p * k + q] != host_et[h * n + g] or \
               sub_et[q * k + p] != host_et[g * n + h]:
                ok = False
                break
        if not ok:
            continue
        mapping[p] = h
        used[h] = 1
        got = _search(depth + 1, k, n, order, sub_et, host_et, cand_flat,
                      cand_off, mapping, used, deadline, first_only, steps)
        used[h] = 0
        if got < 0:
            return -1
        total += got
        if first_only and total > 0:
            return total
    return total


def count_mappings(sub_nt, sub_et, host_nt, host_et,
                   double deadline=float("inf"), bint first_only=False):
    """Injective class- and edge-preserving maps pattern -> host; -1 on
    hitting the deadline.  Mirrors `_iso_py.count_mappings` exactly."""
    cdef int k = len(sub_nt)
    cdef int n = len(host_nt)
    if k > n:
        return 0
    if k == 0:
        return 1
    sub_et_arr = np.ascontiguousarray(sub_et, dtype=np.int32)
    host_et_arr = np.ascontiguousarray(host_et, dtype=np.int32)
    sub_nt_arr = np.ascontiguousarray(sub_nt, dtype=np.int32)
    host_nt_arr = np.ascontiguousarray(host_nt, dtype=np.int32)

    order_list = _match_order(sub_et_arr)
    order_arr = np.asarray(order_list, dtype=np.int32)

    sub_in = np.count_nonzero(sub_et_arr, axis=0)
    sub_out = np.count_nonzero(sub_et_arr, axis=1)
    host_in = np.count_nonzero(host_et_arr, axis=0)
    host_out = np.count_nonzero(host_et_arr, axis=1)

    cand_lists = []
    for p in order_list:
        ok = np.nonzero(
            (host_nt_arr == sub_nt_arr[p])
            & (host_in >= sub_in[p])
            & (host_out >= sub_out[p])
        )[0]
        if ok.size == 0:
            return 0
        cand_lists.append(ok.astype(np.int32))
    cand_flat_arr = np.concatenate(cand_lists)
    cand_off_arr = np.zeros(k + 1, dtype=np.int32)
    cand_off_arr[1:] = np.cumsum([c.size for c in cand_lists])

    mapping_arr = np.full(k, -1, dtype=np.int32)
    used_arr = np.zeros(n, dtype=np.uint8)

    cdef const int[::1] order_v = order_arr
    cdef const int[:, ::1] sub_v = sub_et_arr
    cdef const int[:, ::1] host_v = host_et_arr
    cdef const int[::1] flat_v = cand_flat_arr
    cdef const int[::1] off_v = cand_off_arr
    cdef int[::1] mapping_v = mapping_arr
    cdef unsigned char[::1] used_v = used_arr
    cdef long steps = 0
    cdef long result
    with nogil:
        result = _search(0, k, n, &order_v[0], &sub_v[0, 0], &host_v[0, 0],
                         &flat_v[0], &off_v[0], &mapping_v[0], &used_v[0],
                         deadline, first_only, &steps)
    return result


def isomorphic(nt1, et1, nt2, et2):
    """Exact graph isomorphism for equal-size typed digraphs."""
    nt1 = np.ascontiguousarray(nt1, dtype=np.int32)
    nt2 = np.ascontiguousarray(nt2, dtype=np.int32)
    et1 = np.ascontiguousarray(et1, dtype=np.int32)
    et2 = np.ascontiguousarray(et2, dtype=np.int32)
    if len(nt1) != len(nt2):
        return False
    if sorted(nt1.tolist()) != sorted(nt2.tolist()):
        return False
    if np.count_nonzero(et1) != np.count_nonzero(et2):
        return False
    h1 = np.bincount(et1.ravel(), minlength=int(et1.max(initial=0)) + 1)
    h2 = np.bincount(et2.ravel(), minlength=int(et2.max(initial=0)) + 1)
    if len(h1) != len(h2) or not np.array_equal(h1, h2):
        return False
    return count_mappings(nt1, et1, nt2, et2, float("inf"), True) > 0
