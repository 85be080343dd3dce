"""Timing harness comparing the jit kernel backend with the numpy one.

Both implementations ship in-tree; this runs each public kernel on
representative pipeline shapes and reports per-call milliseconds, so a
deployment can check what the jit actually buys on its hardware.
"""

import time

import numpy as np

from .kernels import numpy_backend

try:
    from .kernels import numba_backend
except ImportError:  # pragma: no cover - numba is an install-time choice
    numba_backend = None


def _time_call(fn, args, repeats):
    fn(*args)  # warmup; also triggers jit compilation
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1000


def _cases(rng):
    image = rng.integers(0, 256, (480, 640, 3)).astype(np.uint8)
    act = rng.standard_normal((1, 100, 133, 32)).astype(np.float32)
    cols = rng.standard_normal((100 * 133, 9 * 32)).astype(np.float32)
    grad = rng.standard_normal((1, 50, 66, 32)).astype(np.float32)
    boxes = np.column_stack([
        rng.uniform(0, 150, 400), rng.uniform(0, 150, 400),
        rng.uniform(8, 60, 400), rng.uniform(8, 60, 400)])
    scores = rng.uniform(0, 1, 400)
    pooled, arg = numpy_backend.maxpool2x2(act)
    return [
        ("im2col 100x133x32 k3", "im2col", (act, 3, 3, 1, 1)),
        ("col2im 100x133x32 k3", "col2im", (cols, act.shape, 3, 3, 1, 1)),
        ("maxpool 100x133x32", "maxpool2x2", (act,)),
        ("maxpool_bwd 100x133x32", "maxpool2x2_backward", (grad, arg, act.shape)),
        ("resize 480x640->200x267", "bilinear_resize", (image, 200, 267)),
        ("iou 400x400", "iou_matrix", (boxes, boxes)),
        ("nms 400 boxes", "nms", (boxes, scores, 0.7)),
    ]


def run_benchmark(repeats: int = 5, seed: int = 0) -> list:
    """Rows of {case, numpy_ms, numba_ms, speedup}; numba fields are None
    when that backend is unavailable."""
    rng = np.random.default_rng(seed)
    rows = []
    for label, name, args in _cases(rng):
        row = {"case": label, "numpy_ms": _time_call(getattr(numpy_backend, name), args, repeats)}
        if numba_backend is not None:
            row["numba_ms"] = _time_call(getattr(numba_backend, name), args, repeats)
            row["speedup"] = row["numpy_ms"] / row["numba_ms"] if row["numba_ms"] > 0 else None
        else:
            row["numba_ms"] = None
            row["speedup"] = None
        rows.append(row)
    return rows


def format_benchmark(rows) -> str:
    lines = ["%-26s %10s %10s %8s" % ("case", "numpy ms", "numba ms", "speedup")]
    for r in rows:
        numba_ms = "-" if r["numba_ms"] is None else "%.3f" % r["numba_ms"]
        speedup = "-" if r["speedup"] is None else "%.2fx" % r["speedup"]
        lines.append("%-26s %10.3f %10s %8s" % (r["case"], r["numpy_ms"], numba_ms, speedup))
    return "\n".join(lines)
