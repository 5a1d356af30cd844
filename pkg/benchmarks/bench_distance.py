#!/usr/bin/env python3
"""Throughput comparison of the edit-distance backends.

Runs the compiled Cython kernel and the pure-Python twin on identical
workloads: pairwise distances over random word pairs, and nearest-word
scans over a synthetic vocabulary (the hot path of OOV resolution).

Usage: python3 benchmarks/bench_distance.py [--pairs N] [--vocab N]
"""
import argparse
import random
import string
import time

from finhyp import _editdist_py

try:
    from finhyp import _editdist
except ImportError:
    _editdist = None


def make_words(rng, count, min_len=3, max_len=14):
    return [
        "".join(rng.choices(string.ascii_lowercase, k=rng.randint(min_len, max_len)))
        for _ in range(count)
    ]


def bench_pairs(impl, pairs):
    start = time.perf_counter()
    total = 0
    for a, b in pairs:
        total += impl.levenshtein(a, b)
    elapsed = time.perf_counter() - start
    return elapsed, total


def bench_nearest(impl, queries, vocab):
    start = time.perf_counter()
    sink = 0
    for q in queries:
        i, _ = impl.nearest(q, vocab)
        sink += i
    elapsed = time.perf_counter() - start
    return elapsed, sink


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=200_000)
    parser.add_argument("--vocab", type=int, default=20_000)
    parser.add_argument("--queries", type=int, default=200)
    args = parser.parse_args()

    rng = random.Random(12345)
    words = make_words(rng, 2 * args.pairs)
    pairs = list(zip(words[: args.pairs], words[args.pairs :]))
    vocab = sorted(set(make_words(rng, args.vocab)))
    queries = make_words(rng, args.queries)

    backends = [("python", _editdist_py)]
    if _editdist is not None:
        backends.insert(0, ("c", _editdist))
    else:
        print("compiled kernel not built; timing the pure-Python backend only")

    results = {}
    for name, impl in backends:
        t_pairs, check_pairs = bench_pairs(impl, pairs)
        t_near, check_near = bench_nearest(impl, queries, vocab)
        results[name] = (t_pairs, t_near, check_pairs, check_near)
        print(
            f"{name:>7}: {args.pairs / t_pairs:>12,.0f} pairs/s"
            f"   {args.queries / t_near:>8,.1f} nearest-scans/s"
            f"   ({len(vocab):,}-word vocabulary)"
        )

    if len(results) == 2:
        c_res, py_res = results["c"], results["python"]
        if (c_res[2], c_res[3]) != (py_res[2], py_res[3]):
            raise SystemExit("backend outputs disagree; benchmark aborted")
        print(
            f"speedup: {py_res[0] / c_res[0]:.1f}x on pairs, "
            f"{py_res[1] / c_res[1]:.1f}x on nearest scans"
        )


if __name__ == "__main__":
    main()
