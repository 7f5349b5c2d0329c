"""Backend selection for the closure kernel.

The compiled extension is used when importable; set ``HETPRICE_PURE=1`` to
force the pure-Python path.  Both return identical arrays.
"""

from __future__ import annotations

import os

from . import _closure_py

try:
    if os.environ.get("HETPRICE_PURE"):
        raise ImportError("pure backend requested")
    from . import _closure_ext as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _closure_py
    BACKEND = "python"

BACKENDS = {"python": _closure_py.warshall}
if BACKEND == "cython":
    BACKENDS["cython"] = _impl.warshall


def warshall(adj):
    return _impl.warshall(adj)


def path(nxt, src: int, dst: int) -> list[int]:
    """Node sequence from ``src`` to ``dst`` following next-hop pointers."""
    out = [src]
    u = src
    for _ in range(len(nxt) + 1):
        if u == dst and len(out) > 1:
            return out
        u = int(nxt[u][dst])
        if u < 0:
            raise ValueError(f"no path {src} -> {dst}")
        out.append(u)
        if u == dst:
            return out
    raise RuntimeError("next-hop pointers do not terminate")
