"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]

Both backends run the same inputs; results must agree before timings are
reported.
"""

import argparse
import random
import time

import numpy as np

from ucqres import _fallback

try:
    from ucqres import _kernels
except ImportError:
    _kernels = None


def hom_instances(rng, count, n_src, n_tgt, p_src, p_tgt):
    """Random digraph pairs; sources are sparse paths/cycles so answers vary."""
    out = []
    for _ in range(count):
        edges = [(0, u, v) for u in range(n_src) for v in range(n_src) if u != v and rng.random() < p_src]
        adj = np.zeros((1, n_tgt, n_tgt), dtype=np.uint8)
        for a in range(n_tgt):
            for b in range(n_tgt):
                if a != b and rng.random() < p_tgt:
                    adj[0, a, b] = 1
        dom = np.ones((n_src, n_tgt), dtype=np.uint8)
        out.append((n_src, np.array(edges, dtype=np.int32).reshape(-1, 3), n_tgt, adj, dom))
    return out


def hitting_instances(rng, count, m, k):
    out = []
    for _ in range(count):
        masks = []
        for _ in range(k):
            w = rng.sample(range(m), rng.randint(1, 4))
            masks.append(sum(1 << i for i in w))
        out.append((masks, [rng.randint(1, 3) for _ in range(m)]))
    return out


def _norm(r):
    if r is None:
        return None
    if isinstance(r, tuple):
        return r
    return tuple(int(x) for x in r)


def timed(fn, cases, repeat):
    best = float("inf")
    results = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        results = [_norm(fn(*c)) for c in cases]
        best = min(best, time.perf_counter() - t0)
    return best, results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    suites = {
        "hom_search_binary": ("hom_search_binary", hom_instances(rng, 40, 10, 9, 0.2, 0.35)),
        "min_hitting_deletion": ("min_hitting_deletion", hitting_instances(rng, 40, 20, 30)),
    }
    print(f"{'kernel':<22} {'python (s)':>11} {'cython (s)':>11} {'speedup':>8}")
    for name, (fn, cases) in suites.items():
        tp, rp = timed(getattr(_fallback, fn), cases, args.repeat)
        if _kernels is None:
            print(f"{name:<22} {tp:11.4f} {'n/a':>11} {'n/a':>8}")
            continue
        tc, rc = timed(getattr(_kernels, fn), cases, args.repeat)
        if rp != rc:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<22} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
