"""Benchmark the compiled centrality kernels against the pure-Python fallback.

Usage: python benchmarks/bench_centrality.py [--attributes N] [--cases M]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from idrisk._backend import HAVE_COMPILED, get_kernels
from idrisk.cases import SynthConfig, synthesize_cases
from idrisk.graph import build_graph


def time_kernel(fn, *args, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--attributes", type=int, default=800)
    parser.add_argument("--cases", type=int, default=5000)
    parser.add_argument("--communities", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = SynthConfig(
        n_attributes=args.attributes,
        n_cases=args.cases,
        n_communities=args.communities,
        intra_community_bias=0.9,
        seed=args.seed,
    )
    g = build_graph(synthesize_cases(config))
    indptr, indices, _ = g.csr()
    rindptr, rindices, _ = g.csr(reverse=True)
    n = g.n_nodes
    print(f"graph: {g.label()} ({g.total_weight} total weight)")

    py = get_kernels("python")
    rows = []
    py_bc = time_kernel(py.brandes_betweenness, indptr, indices, n, repeats=1)
    py_cl = time_kernel(py.incoming_closeness, rindptr, rindices, n, repeats=1)
    rows.append(("python", py_bc, py_cl))

    if HAVE_COMPILED:
        cy = get_kernels("compiled")
        cy_bc = time_kernel(cy.brandes_betweenness, indptr, indices, n)
        cy_cl = time_kernel(cy.incoming_closeness, rindptr, rindices, n)
        rows.append(("compiled", cy_bc, cy_cl))
        same_bc = np.array_equal(
            py.brandes_betweenness(indptr, indices, n),
            cy.brandes_betweenness(indptr, indices, n),
        )
        same_cl = np.array_equal(
            py.incoming_closeness(rindptr, rindices, n),
            cy.incoming_closeness(rindptr, rindices, n),
        )
    else:
        print("compiled kernels not built; showing the fallback only")
        same_bc = same_cl = True

    print(f"{'backend':<10} {'betweenness':>14} {'closeness':>14}")
    for name, bc, cl in rows:
        print(f"{name:<10} {bc:>13.3f}s {cl:>13.3f}s")
    if HAVE_COMPILED:
        print(f"{'speedup':<10} {py_bc / cy_bc:>13.1f}x {py_cl / cy_cl:>13.1f}x")
        print(f"results identical: betweenness={same_bc}, closeness={same_cl}")


if __name__ == "__main__":
    main()
