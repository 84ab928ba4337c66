#!/usr/bin/env python3
"""Time the numba and numpy kernel backends side by side.

Covers the two hot paths (full-joint construction and forward sampling)
on the bundled 16-node scenario plus a wider synthetic graph, checks the
backends agree bit-for-bit, and prints a speedup table.

Run from the repository root:

    python3 benchmarks/bench_kernels.py --samples 1000000 --repeat 5
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from helpers import make_random_graph  # noqa: E402

from defgraph import _kernels, load_bundled_gps  # noqa: E402
from defgraph.graph import topological_order  # noqa: E402
from defgraph.inference import _encode  # noqa: E402


def best_of(repeat: int, fn, *args) -> float:
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def bench_case(name: str, repeat: int, numpy_fn, numba_fn, *args) -> None:
    t_numpy = best_of(repeat, numpy_fn, *args)
    if numba_fn is None:
        print(f"{name:<34} numpy {t_numpy * 1e3:9.2f} ms   numba unavailable")
        return
    numba_fn(*args)  # compile outside the timer
    t_numba = best_of(repeat, numba_fn, *args)
    assert np.array_equal(numpy_fn(*args), numba_fn(*args)), "backends disagree"
    print(f"{name:<34} numpy {t_numpy * 1e3:9.2f} ms   "
          f"numba {t_numba * 1e3:9.2f} ms   speedup {t_numpy / t_numba:6.2f}x")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1_000_000,
                        help="forward-sampling draw count (default 1e6)")
    parser.add_argument("--nodes", type=int, default=20,
                        help="node count of the synthetic graph (default 20)")
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best-of is reported (default 5)")
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    cases = [
        ("bundled GPS scenario", load_bundled_gps()),
        (f"synthetic {args.nodes}-node graph",
         make_random_graph(np.random.default_rng(args.seed), max_nodes=args.nodes)),
    ]
    print(f"numba available: {_kernels.JIT_ENABLED}   "
          f"(active backend: {_kernels.BACKEND})")
    for label, graph in cases:
        order = topological_order(graph)
        enc = _encode(graph, order)
        bench_case(f"joint table, {label}", args.repeat,
                   _kernels.joint_table_numpy, _kernels.joint_table_numba,
                   len(order), *enc)
        u = np.random.default_rng(args.seed).random((args.samples, len(order)))
        bench_case(f"{args.samples:.0e} samples, {label}", args.repeat,
                   _kernels.sample_counts_numpy, _kernels.sample_counts_numba,
                   *enc, u)
    return 0


if __name__ == "__main__":
    sys.exit(main())
