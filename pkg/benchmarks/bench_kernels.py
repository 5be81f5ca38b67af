"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--out benchmarks/results] [--repeat 5]

Kernel timings call both backends in-process.  The end-to-end epoch is
timed in a subprocess per backend, because the backend is chosen once at
import from ``SQUARELOSS_NO_NUMBA``.  A BLAS ``@`` row is included for
reference only; the library does not use it because its summation order
is not fixed.
"""

import argparse
import csv
import json
import os
import subprocess
import sys
import time

import numpy as np

from squareloss import kernels

EPOCH_SNIPPET = r"""
import json, time
import numpy as np
from squareloss import kernels
from squareloss.data import Dataset
from squareloss.losses import parse_loss
from squareloss.nn import ModelSpec
from squareloss.training import FixedEpochs, TrainConfig, train_run

rng = np.random.default_rng(0)
n = {n}
train = Dataset("bench", rng.random((n, 784)), rng.integers(0, 10, n), 10)
spec = ModelSpec.mlp([784, 256, 10])
out = {{"backend": kernels.BACKEND}}
for loss in ("ce", "sq"):
    cfg = TrainConfig(parse_loss(loss), 0.1, 0.5, 64, 1, FixedEpochs(1), 0)
    train_run(spec, train.subset(np.arange(64)), None, cfg)  # warm-up / JIT
    t = time.perf_counter()
    train_run(spec, train, None, cfg)
    out[loss] = time.perf_counter() - t
print(json.dumps(out))
"""


def best_of(fn, args, repeat):
    fn(*args)  # warm-up, includes JIT compilation on first call
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases(rng):
    x = rng.random((64, 784))
    w = rng.standard_normal((256, 784))
    g = rng.standard_normal((64, 256))
    labels = rng.integers(0, 10, 64)
    return [
        ("matmul 64x784 @ 784x256 (forward)", "matmul", (x, np.ascontiguousarray(w.T))),
        ("matmul 256x64 @ 64x784 (weight grad)", "matmul", (np.ascontiguousarray(g.T), x)),
        ("ce_batch 64x10", "ce_batch", (rng.standard_normal((64, 10)), labels)),
        ("sq_batch 64x10", "sq_batch", (rng.standard_normal((64, 10)), labels, 1.0, 1.0)),
        ("ce_batch 64x1000", "ce_batch", (rng.standard_normal((64, 1000)), rng.integers(0, 1000, 64))),
        ("sq_batch 64x1000 k=15 M=30", "sq_batch", (rng.standard_normal((64, 1000)), rng.integers(0, 1000, 64), 15.0, 30.0)),
        ("true_class_rank 10000x10", "true_class_rank", (rng.standard_normal((10000, 10)), rng.integers(0, 10, 10000))),
    ]


def time_epoch(no_numba, n):
    env = dict(os.environ, SQUARELOSS_NO_NUMBA="1" if no_numba else "0")
    r = subprocess.run(
        [sys.executable, "-c", EPOCH_SNIPPET.format(n=n)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(r.stdout.strip().splitlines()[-1])


def fmt_time(t):
    return f"{t:.3f} s" if t >= 1 else f"{t * 1e3:.3f} ms"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "results"))
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--epoch-rows", type=int, default=10000, help="rows in the timed training epoch")
    args = ap.parse_args(argv)
    if kernels.numba_backend is None:
        sys.exit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    rows = []
    for label, name, case in kernel_cases(rng):
        t_numba = best_of(getattr(kernels.numba_backend, name), case, args.repeat)
        t_numpy = best_of(getattr(kernels.numpy_backend, name), case, args.repeat)
        blas = best_of(np.matmul, case, args.repeat) if name == "matmul" else None
        rows.append((label, t_numba, t_numpy, blas))
        print(f"{label:40s} numba {t_numba * 1e3:9.3f} ms  numpy {t_numpy * 1e3:9.3f} ms")

    epochs = [time_epoch(False, args.epoch_rows), time_epoch(True, args.epoch_rows)]
    for loss in ("ce", "sq"):
        label = f"train epoch {args.epoch_rows}x784, MLP 784-256-10, {loss}"
        rows.append((label, epochs[0][loss], epochs[1][loss], None))
        print(f"{label:40s} numba {epochs[0][loss]:9.3f} s   numpy {epochs[1][loss]:9.3f} s")

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "kernels.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "numba_s", "numpy_s", "speedup", "blas_reference_s"])
        for label, a, b, blas in rows:
            w.writerow([label, f"{a:.6g}", f"{b:.6g}", f"{b / a:.2f}", "" if blas is None else f"{blas:.6g}"])
    lines = [
        "| case | numba | numpy fallback | speedup | BLAS `@` (reference) |",
        "|---|---:|---:|---:|---:|",
    ]
    for label, a, b, blas in rows:
        ref = "" if blas is None else fmt_time(blas)
        lines.append(f"| {label} | {fmt_time(a)} | {fmt_time(b)} | {b / a:.1f}x | {ref} |")
    with open(os.path.join(args.out, "kernels.md"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}/kernels.csv and kernels.md")


if __name__ == "__main__":
    main()
