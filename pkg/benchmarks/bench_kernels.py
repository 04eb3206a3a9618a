"""Compare the compiled assignment kernel against the pure-Python fallback.

Runs `assign_and_masses` on seeded random instances of increasing size
with both backends, reports the median wall time of each, and the
speedup ratio.  Exits nonzero if the compiled extension is unavailable
(`pip install -e .` builds it).
"""

import argparse
import statistics
import sys
import time

import numpy as np

DEFAULT_SIZES = ((200, 5), (1000, 20), (3000, 60), (10000, 100))


def _parse_sizes(text):
    sizes = []
    for chunk in text.split(","):
        n, _, k = chunk.partition("x")
        sizes.append((int(n), int(k)))
    return tuple(sizes)


def _time_callable(fn, args, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes",
        default=",".join(f"{n}x{k}" for n, k in DEFAULT_SIZES),
        help="comma-separated instance sizes as NxK (samples x sites)",
    )
    parser.add_argument("--repeats", type=int, default=20,
                        help="timed runs per backend and size (median is reported)")
    parser.add_argument("--seed", type=int, default=0, help="instance seed")
    args = parser.parse_args(argv)

    try:
        from otclust import _kernels as compiled
    except ImportError:
        print("compiled extension not importable; build it with `pip install -e .`",
              file=sys.stderr)
        return 1
    from otclust import _kernels_py as pure

    rng = np.random.default_rng(args.seed)
    print(f"{'size':>12}  {'compiled':>12}  {'pure python':>12}  {'speedup':>8}")
    for n, k in _parse_sizes(args.sizes):
        points = rng.random((n, 2))
        weights = np.full(n, 1.0 / n)
        positions = rng.random((k, 2))
        offsets = rng.normal(scale=0.01, size=k)
        call = (points, weights, positions, offsets)

        check_c = compiled.assign_and_masses(*call)
        check_p = pure.assign_and_masses(*call)
        if not np.array_equal(check_c[0], check_p[0]):
            print(f"{n}x{k}: backends disagree on labels", file=sys.stderr)
            return 1

        t_compiled = _time_callable(compiled.assign_and_masses, call, args.repeats)
        t_pure = _time_callable(pure.assign_and_masses, call, args.repeats)
        print(
            f"{f'{n}x{k}':>12}  {t_compiled * 1e6:>10.1f}us  {t_pure * 1e6:>10.1f}us  "
            f"{t_pure / t_compiled:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
