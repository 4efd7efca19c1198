"""Compare the compiled and pure-Python refinement kernels.

    python benchmarks/bench_fixpoint.py [--sizes 100 300 1000] [--repeat 3]

Each instance is a random deterministic pre-level graph and a random
post-level graph over a shared label set with a few new labels; every pair
is seeded into the relation.  Both backends must return identical arrays.
"""

import argparse
import time

import numpy as np

from archsubst import fixpoint


def instance(n, rng, n_lbl=8, out_degree=3, new_share=0.25):
    is_new = rng.random(n_lbl) < new_share
    is_new[0] = False
    src = np.repeat(np.arange(n), out_degree)
    r_edges = np.stack([src, rng.integers(0, n_lbl, src.size), rng.integers(0, n, src.size)], axis=1)
    r_edges = np.unique(r_edges, axis=0)
    a_edges = []
    for a in range(n):
        for lbl in rng.choice(n_lbl, size=out_degree, replace=False):
            if not is_new[lbl]:
                a_edges.append((a, int(lbl), int(rng.integers(0, n))))
    seed = np.where(rng.random(n * n) < 0.02, fixpoint.STRUCTURAL, fixpoint.KEPT).astype(np.int8)
    return n, n, r_edges, np.array(a_edges), is_new, seed


def mirror(n, rng, n_lbl=8, out_degree=3):
    """Post level identical to the pre level; only pairs of equivalent states survive."""
    _, _, _, a_edges, _, _ = instance(n, rng, n_lbl, out_degree, new_share=0.0)
    seed = np.full(n * n, fixpoint.KEPT, dtype=np.int8)
    return n, n, a_edges, a_edges, np.zeros(n_lbl, dtype=bool), seed


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(kind, n, inst, backends, repeat):
    results = {b: best_of(repeat, lambda b=b: fixpoint.refine(*inst, backend=b)) for b in backends}
    outs = [results[b][1] for b in backends]
    for other in outs[1:]:
        assert all(np.array_equal(x, y) for x, y in zip(outs[0][:3], other[:3])), "backends disagree"
    speed = ""
    if "cython" in results:
        speed = f"{results['python'][0] / results['cython'][0]:7.1f}x"
    times = " ".join(f"{results[b][0]:>12.4f}" for b in backends)
    print(f"{kind:>8} {n:>11} {n * n:>9} {outs[0][3]:>8} {times} {speed}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 1000])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    backends = sorted(fixpoint.BACKENDS)
    header = " ".join(f"{b + ' (s)':>12}" for b in backends)
    print(f"{'instance':>8} {'states/side':>11} {'pairs':>9} {'removed':>8} {header} {'speedup':>8}")
    for kind, make in (("random", instance), ("mirror", mirror)):
        for n in args.sizes:
            run(kind, n, make(n, rng), backends, args.repeat)


if __name__ == "__main__":
    main()
