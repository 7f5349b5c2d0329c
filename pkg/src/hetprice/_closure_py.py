"""Pure-Python Warshall closure; mirrors ``_closure_ext.warshall``."""

from __future__ import annotations

import numpy as np


def warshall(adj):
    n = len(adj)
    reach = [[bool(v) for v in row] for row in np.asarray(adj, dtype=bool).tolist()]
    nxt = [[j if reach[i][j] else -1 for j in range(n)] for i in range(n)]
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            ri = reach[i]
            if not ri[k]:
                continue
            hop = nxt[i][k]
            ni = nxt[i]
            for j in range(n):
                if rk[j] and not ri[j]:
                    ri[j] = True
                    ni[j] = hop
    return np.array(reach, dtype=bool).reshape(n, n), np.array(nxt, dtype=np.int32).reshape(n, n)
