"""Time the numba and pure-numpy LSTM kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--hidden 200] [--steps 10] [--batch 8] [--repeat 50]

The first JIT call compiles (cached on disk afterwards) and is excluded.
"""

import argparse
import timeit

import numpy as np

from treeaug.tagger import kernels


def make_inputs(T, B, D, H, dtype, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-0.1, 0.1, size=(T, B, D)).astype(dtype)
    mask = np.ones((T, B), dtype=dtype)
    mask[T // 2:, B // 2:] = 0.0  # ragged batch, like left-aligned character sequences
    Wx = rng.uniform(-0.1, 0.1, size=(D, 4 * H)).astype(dtype)
    Wh = rng.uniform(-0.1, 0.1, size=(H, 4 * H)).astype(dtype)
    b = rng.uniform(-0.1, 0.1, size=4 * H).astype(dtype)
    dH = rng.normal(size=(T, B, H)).astype(dtype)
    return X, mask, Wx, Wh, b, dH


def bench(pair, inputs, repeat):
    fwd, bwd = pair
    X, mask, Wx, Wh, b, dH = inputs

    def step():
        cache = fwd(X, mask, Wx, Wh, b)
        bwd(dH, X, mask, Wx, Wh, *cache)

    step()  # warm-up / compile
    return min(timeit.repeat(step, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--hidden", type=int, nargs="+", default=[8, 50, 200])
    ap.add_argument("--steps", type=int, default=10)
    ap.add_argument("--batch", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--dtype", choices=("float32", "float64"), default="float64")
    args = ap.parse_args()
    if kernels.jit_kernels is None:
        raise SystemExit("numba is not importable; only the numpy kernels are available")
    print(f"{'hidden':>6} {'numpy ms':>9} {'numba ms':>9} {'speedup':>8}")
    for H in args.hidden:
        inputs = make_inputs(args.steps, args.batch, H, H, args.dtype)
        t_np = bench(kernels.numpy_kernels, inputs, args.repeat)
        t_jit = bench(kernels.jit_kernels, inputs, args.repeat)
        print(f"{H:>6} {1e3 * t_np:>9.3f} {1e3 * t_jit:>9.3f} {t_np / t_jit:>7.2f}x")


if __name__ == "__main__":
    main()
