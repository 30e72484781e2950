#!/usr/bin/env python3
"""Measure LSH recall@k against exact cosine search across parameter
settings. Useful when retuning tables/bits/candidate budget for a new
gallery size.

Usage: python scripts/lsh_recall_sweep.py [--n 1000] [--dim 128] [--queries 100]
"""

import argparse
import time

import numpy as np

from handscroll.similarity import build_lsh


def recall(n, dim, tables, bits, budget, queries, k, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    vectors = {f"v:{i:05d}": x[i] for i in range(n)}
    ids = list(vectors)
    index = build_lsh(vectors, tables=tables, bits=bits, seed=seed)
    qs = rng.choice(n, size=queries, replace=False)
    hits = 0
    t0 = time.perf_counter()
    for qi in qs:
        sims = x @ x[qi]
        exact = [ids[j] for j in np.argsort(-sims) if j != qi][:k]
        got = {i for i, _ in index.query(x[qi], k=k + 1, candidate_budget=budget)
               if i != ids[qi]}
        hits += sum(1 for t in exact if t in got)
    dt = (time.perf_counter() - t0) / queries
    return hits / (k * queries), dt


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=128)
    parser.add_argument("--queries", type=int, default=100)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--seeds", type=int, default=3)
    args = parser.parse_args()

    print(f"{'tables':>6} {'bits':>5} {'budget':>7} {'recall':>7} {'ms/query':>9}")
    for tables, bits in ((4, 12), (8, 16), (8, 24), (16, 16)):
        for budget in (100, 200, 500, 1000):
            rs, ts = [], []
            for seed in range(args.seeds):
                r, t = recall(args.n, args.dim, tables, bits, budget,
                              args.queries, args.k, seed)
                rs.append(r)
                ts.append(t)
            print(f"{tables:>6} {bits:>5} {budget:>7} {np.mean(rs):>7.3f} "
                  f"{1000 * np.mean(ts):>9.2f}")


if __name__ == "__main__":
    main()
