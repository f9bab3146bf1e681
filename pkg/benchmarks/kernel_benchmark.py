"""Benchmark the compiled feature kernels against the NumPy fallback.

Usage:
    python benchmarks/kernel_benchmark.py [--trials 20000] [--samples 120]

Times all five kernels over a corpus of random trajectories and prints
per-backend timings with the compiled/python speedup. Typical cursor
trajectories are short (tens to ~190 samples at 16 ms), which is exactly
the regime where per-call dispatch overhead dominates the NumPy path.
"""

import argparse
import statistics
import time

import numpy as np

from impulsekit.kernels import available_backends


def make_corpus(n_trials: int, n_samples: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n_trials):
        dt = rng.integers(8, 25, size=n_samples - 1).astype(float)
        t = np.concatenate([[0.0], np.cumsum(dt)])
        x = np.ascontiguousarray(np.cumsum(rng.normal(0, 0.02, n_samples)))
        y = np.ascontiguousarray(np.cumsum(rng.normal(0, 0.02, n_samples)))
        onset = float(rng.uniform(0, t[-1]))
        corpus.append((t, x, y, onset))
    return corpus


def run_backend(mod, corpus):
    sink = 0.0
    start = time.perf_counter()
    for t, x, y, onset in corpus:
        sink += mod.path_length(x, y)
        sink += mod.max_segment_speed(t, x, y)
        sink += mod.max_accel(t, x, y, True)
        sink += mod.max_accel(t, x, y, False)
        sink += mod.chord_auc(x, y, x[0], y[0], x[-1] + 1e-3, y[-1])
        sink += mod.distance_after(t, x, y, onset)
    return time.perf_counter() - start, sink


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--samples", type=int, default=120)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "cython" not in backends:
        print("note: compiled extension not built; benchmarking python only")

    corpus = make_corpus(args.trials, args.samples)
    results = {}
    checks = {}
    for name, mod in backends.items():
        times = []
        for _ in range(args.repeats):
            elapsed, sink = run_backend(mod, corpus)
            times.append(elapsed)
        results[name] = statistics.median(times)
        checks[name] = sink

    names = list(backends)
    if len(names) == 2:
        a, b = checks[names[0]], checks[names[1]]
        agree = abs(a - b) / max(abs(a), 1e-30)
        print(f"cross-backend agreement: {agree:.2e} relative")

    print(f"\n{args.trials} trajectories x {args.samples} samples, "
          f"5 kernels each (median of {args.repeats}):")
    for name, t in sorted(results.items(), key=lambda kv: kv[1]):
        rate = args.trials / t
        print(f"  {name:>7}: {t * 1000:8.1f} ms   ({rate:,.0f} trajectories/s)")
    if "cython" in results and "python" in results:
        print(f"\nspeedup (python / cython): "
              f"{results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
