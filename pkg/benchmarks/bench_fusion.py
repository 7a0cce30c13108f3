"""Time the compiled fusion kernel against the numpy fallback.

Both kernels must agree bit for bit; the benchmark fails loudly if they do
not, because backend selection is supposed to be a pure speed choice.
"""

import argparse
import sys
import time

import numpy as np

from kfid._fusion_py import fused_matrix as fallback_kernel
from kfid.kernels import BACKEND

try:
    from kfid._fusion_cy import fused_matrix as compiled_kernel
except ImportError:
    compiled_kernel = None


def best_time(kernel, feats, anchors, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        kernel(feats, anchors)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=2000)
    parser.add_argument("--dim", type=int, default=2048)
    parser.add_argument("--anchors", type=int, default=32)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    feats = rng.standard_normal((args.frames, args.dim))
    anchors = rng.standard_normal((args.anchors, args.dim))

    print(f"workload: {args.frames} frames x {args.dim} dims, "
          f"{args.anchors} anchors (package selected: {BACKEND})")

    fallback = best_time(fallback_kernel, feats, anchors, args.repeats)
    print(f"fallback (numpy):  {fallback * 1e3:8.2f} ms")

    if compiled_kernel is None:
        print("compiled (cython): not built, skipping comparison")
        return 0

    compiled = best_time(compiled_kernel, feats, anchors, args.repeats)
    print(f"compiled (cython): {compiled * 1e3:8.2f} ms  "
          f"({fallback / compiled:.2f}x vs fallback)")

    a = compiled_kernel(feats, anchors)
    b = fallback_kernel(feats, anchors)
    if a.tobytes() != b.tobytes():
        print("ERROR: backends disagree bitwise", file=sys.stderr)
        return 1
    print("backends agree bit for bit")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
