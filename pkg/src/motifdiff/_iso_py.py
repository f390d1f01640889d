"""Pure-Python backtracking kernels for isomorphism and induced-occurrence
counting.

These are the reference implementations; `motifdiff.isomorphism` swaps in the
compiled twin from `_motifcore` when it is importable.  Both backends take
plain int32 node/edge arrays so they stay interchangeable.
"""

from __future__ import annotations

import time

import numpy as np

TIMEOUT_CHECK_MASK = 0xFF  # check the wall clock every 256 recursion steps


def _match_order(sub_et: np.ndarray) -> list[int]:
    """Pattern-node visit order: start anywhere, then always pick a node
    adjacent (either direction) to the already-ordered prefix when possible.
    Keeps partial mappings connected so dead branches die early."""
    k = sub_et.shape[0]
    present = (sub_et != 0) | (sub_et.T != 0)
    order = [0]
    chosen = {0}
    while len(order) < k:
        nxt = -1
        for v in range(k):
            if v in chosen:
                continue
            if any(present[v, u] for u in order):
                nxt = v
                break
        if nxt < 0:  # disconnected pattern: take the smallest leftover
            nxt = min(v for v in range(k) if v not in chosen)
        order.append(nxt)
        chosen.add(nxt)
    return order


def count_mappings(
    sub_nt: np.ndarray,
    sub_et: np.ndarray,
    host_nt: np.ndarray,
    host_et: np.ndarray,
    deadline: float = float("inf"),
    first_only: bool = False,
) -> int:
    """Number of injective node maps pattern -> host preserving node classes
    and the edge class of every ordered pair (absence included).

    Returns -1 if the wall clock passes ``deadline`` mid-search.  With
    ``first_only`` the search stops at the first full mapping (returns 1).
    """
    k = len(sub_nt)
    n = len(host_nt)
    if k > n:
        return 0
    if k == 0:
        return 1
    order = _match_order(sub_et)

    sub_in = np.count_nonzero(sub_et, axis=0)
    sub_out = np.count_nonzero(sub_et, axis=1)
    host_in = np.count_nonzero(host_et, axis=0)
    host_out = np.count_nonzero(host_et, axis=1)

    # candidate lists per pattern node: class equal, degrees no smaller
    cand = []
    for p in order:
        ok = [
            h
            for h in range(n)
            if host_nt[h] == sub_nt[p]
            and host_in[h] >= sub_in[p]
            and host_out[h] >= sub_out[p]
        ]
        if not ok:
            return 0
        cand.append(ok)

    mapping = [-1] * k  # pattern node -> host node
    used = [False] * n
    count = 0
    steps = 0

    def backtrack(depth: int) -> bool:
        """Returns True when aborting on timeout."""
        nonlocal count, steps
        if depth == k:
            count += 1
            return False
        p = order[depth]
        for h in cand[depth]:
            steps += 1
            if (steps & TIMEOUT_CHECK_MASK) == 0 and time.monotonic() > deadline:
                return True
            if used[h]:
                continue
            ok = True
            for q_idx in range(depth):
                q = order[q_idx]
                g = mapping[q]
                if sub_et[p, q] != host_et[h, g] or sub_et[q, p] != host_et[g, h]:
                    ok = False
                    break
            if not ok:
                continue
            mapping[p] = h
            used[h] = True
            aborted = backtrack(depth + 1)
            used[h] = False
            mapping[p] = -1
            if aborted:
                return True
            if first_only and count > 0:
                return False
        return False

    if backtrack(0):
        return -1
    return count


def isomorphic(
    nt1: np.ndarray, et1: np.ndarray, nt2: np.ndarray, et2: np.ndarray
) -> bool:
    """Exact graph isomorphism for equal-size typed digraphs."""
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
    return count_mappings(nt1, et1, nt2, et2, first_only=True) > 0
