"""Benchmark the numpy kernels against the compiled extension.

Runs each hot kernel (LSTM recurrence, 1-D convolution, max pooling) at
the shapes the pipeline actually produces and prints per-backend wall
times, the speedup, and the worst output disagreement. The numpy
fallback is always measured; the compiled column appears when the
extension is importable.

    python3 benchmarks/bench_kernels.py [--repeats N] [--batch B]
"""

import argparse
import time

import numpy as np

from serkit.nn._backend import available_backends, backend_name


def best_of(fn, repeats):
    """Best wall time in seconds over `repeats` calls (1 warmup)."""
    fn()
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64)
                               - np.asarray(b, dtype=np.float64))))


def lstm_cases(batch, hidden, rng):
    for t_steps, tag in ((469, "32ms"), (149, "100ms")):
        xp = rng.standard_normal((t_steps, batch, 4 * hidden))
        wh = 0.2 * rng.standard_normal((hidden, 4 * hidden))
        h0 = np.zeros((batch, hidden))
        c0 = np.zeros((batch, hidden))
        dh = rng.standard_normal((t_steps, batch, hidden))

        def fwd(k, xp=xp, wh=wh, h0=h0, c0=c0):
            return k.lstm_loop_forward(xp, wh, h0, c0)

        def bwd(k, xp=xp, wh=wh, h0=h0, c0=c0, dh=dh):
            h, c, gates = k.lstm_loop_forward(xp, wh, h0, c0)
            return k.lstm_loop_backward(dh, h, c, gates, wh, h0, c0)

        shape = f"T={t_steps} B={batch} H={hidden}"
        yield f"lstm fwd {tag}", shape, fwd
        yield f"lstm fwd+bwd {tag}", shape, bwd


def conv_cases(batch, rng):
    x = rng.standard_normal((batch, 469, 52))
    w = 0.2 * rng.standard_normal((5, 52, 64))
    b = rng.standard_normal(64)
    t_out = 469 - 5 + 1
    dy = rng.standard_normal((batch, t_out, 64))

    def fwd(k):
        return k.conv1d_forward(x, w, b, 1)

    def bwd(k):
        return k.conv1d_backward(x, w, 1, dy)

    shape = f"B={batch} T=469 52->64 k=5"
    yield "conv1d fwd", shape, fwd
    yield "conv1d bwd", shape, bwd


def pool_cases(batch, rng):
    x = rng.standard_normal((batch, 465, 64))
    _, argmax = available_backends()["python"].maxpool1d_forward(x, 2, 2)
    dy = rng.standard_normal((batch, argmax.shape[1], 64))

    def fwd(k):
        return k.maxpool1d_forward(x, 2, 2)

    def bwd(k):
        return k.maxpool1d_backward(dy, argmax, 465)

    shape = f"B={batch} T=465 C=64 pool=2"
    yield "maxpool fwd", shape, fwd
    yield "maxpool bwd", shape, bwd


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed calls per case (default 5, best-of)")
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--hidden", type=int, default=128)
    args = parser.parse_args()

    backends = available_backends()
    print(f"active backend: {backend_name()}; "
          f"available: {', '.join(backends)}; numpy {np.__version__}")
    if "compiled" not in backends:
        print("compiled extension not built; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    cases = [
        *lstm_cases(args.batch, args.hidden, rng),
        *conv_cases(args.batch, rng),
        *pool_cases(args.batch, rng),
    ]

    header = (f"{'kernel':<22}{'shape':<26}{'python':>10}"
              f"{'compiled':>10}{'speedup':>9}{'max|diff|':>11}")
    print(header)
    print("-" * len(header))
    for name, shape, fn in cases:
        py_time = best_of(lambda: fn(backends["python"]), args.repeats)
        row = f"{name:<22}{shape:<26}{py_time * 1e3:>8.1f}ms"
        if "compiled" in backends:
            c_time = best_of(lambda: fn(backends["compiled"]), args.repeats)
            diff = max_diff(fn(backends["python"]), fn(backends["compiled"]))
            row += f"{c_time * 1e3:>8.1f}ms{py_time / c_time:>8.1f}x{diff:>11.1e}"
        print(row)


if __name__ == "__main__":
    main()
