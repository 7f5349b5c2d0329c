# cython: language_level=3
"""Compiled Warshall closure with next-hop tracking."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def warshall(adj):
    """Reflexive-free transitive closure of a boolean adjacency matrix.

    Returns ``(reach, nxt)`` where ``nxt[i, j]`` is the first hop of a path
    from ``i`` to ``j`` (``-1`` when unreachable).
    """
    cdef cnp.uint8_t[:, ::1] r
    cdef cnp.int32_t[:, ::1] nx
    cdef Py_ssize_t n, i, j, k
    cdef cnp.int32_t hop
    a = np.ascontiguousarray(adj, dtype=np.uint8)
    n = a.shape[0]
    reach = a.copy()
    nxt = np.full((n, n), -1, dtype=np.int32)
    r = reach
    nx = nxt
    for i in range(n):
        for j in range(n):
            if r[i, j]:
                nx[i, j] = <cnp.int32_t>j
    for k in range(n):
        for i in range(n):
            if not r[i, k]:
                continue
            hop = nx[i, k]
            for j in range(n):
                if r[k, j] and not r[i, j]:
                    r[i, j] = 1
                    nx[i, j] = hop
    return reach.astype(bool), nxt
