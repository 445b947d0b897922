"""Time the compiled and pure-Python RAC trial loops on identical inputs.

    python benchmarks/bench_kernels.py [--samples 200000]
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from fbox import kernels
from fbox.boxes import make_noise, make_pr, mix
from fbox.mc import draw_block, rac_guesses
from fbox.protocols import RacConfig

CASES = [(3, 3, "basic"), (5, 5, "basic"), (3, 27, "recursive"), (2, 64, "recursive")]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'case':<22}{'backend':<9}{'best s':>9}{'trials/s':>14}{'speedup':>9}")
    for p, N, mode in CASES:
        box = mix([make_pr(p), make_noise(p)], [Fraction(3, 4), Fraction(1, 4)])
        cfg = RacConfig(p, N, 0, box, mode)
        draws = draw_block(cfg, np.random.default_rng(0), args.samples)
        timings, outputs = {}, {}
        for name in sorted(kernels.BACKENDS):
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                outputs[name] = rac_guesses(cfg, *draws, backend=name)
                best = min(best, time.perf_counter() - t0)
            timings[name] = best
        if len(outputs) > 1:
            assert np.array_equal(outputs["cython"], outputs["python"]), "backends disagree"
        for name, t in timings.items():
            speed = timings["python"] / t
            print(f"{f'{mode} p={p} N={N}':<22}{name:<9}{t:>9.4f}{args.samples / t:>14,.0f}{speed:>8.1f}x")


if __name__ == "__main__":
    main()
