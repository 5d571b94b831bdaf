"""Pure-Python centrality kernels.

Fallback twin of the compiled module `idrisk._centrality`; both operate on
CSR adjacency arrays and must produce identical results. Used automatically
when the extension is not built (or when forced via IDRISK_PURE_PYTHON=1).
"""

from __future__ import annotations

from collections import deque

import numpy as np

COMPILED = False


def brandes_betweenness(indptr, indices, n: int) -> np.ndarray:
    """Directed unweighted betweenness, raw pair-dependency sums (no endpoints)."""
    bc = np.zeros(n, dtype=np.float64)
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0.0] * n
        dist = [-1] * n
        sigma[s] = 1.0
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v]
            for idx in range(indptr[v], indptr[v + 1]):
                w = int(indices[idx])
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


def incoming_closeness(rindptr, rindices, n: int) -> np.ndarray:
    """Wasserman-Faust closeness over incoming distances.

    Arguments are the CSR of the reversed graph, so a BFS from v walks the
    nodes that can reach v. For r reachers at total distance D:
    closeness = (r / (n-1)) * (r / D); zero when r or D is zero.
    """
    out = np.zeros(n, dtype=np.float64)
    if n <= 1:
        return out
    dist = [-1] * n
    for v in range(n):
        for i in range(n):
            dist[i] = -1
        dist[v] = 0
        reachers = 0
        total = 0
        queue = deque([v])
        while queue:
            u = queue.popleft()
            du = dist[u]
            for idx in range(rindptr[u], rindptr[u + 1]):
                w = int(rindices[idx])
                if dist[w] < 0:
                    dist[w] = du + 1
                    reachers += 1
                    total += du + 1
                    queue.append(w)
        if reachers > 0 and total > 0:
            out[v] = (reachers / (n - 1)) * (reachers / total)
    return out
