"""Seeded Monte Carlo estimates of RAC success on the compiled trial loop."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .engine import run_blocks
from .protocols import RacConfig
from .zp import lagrange_index_poly


@dataclass
class McEstimate:
    successes: int
    samples: int
    seed: int
    backend: str

    @property
    def estimate(self) -> float:
        return self.successes / self.samples

    @property
    def stderr(self) -> float:
        q = self.estimate
        return math.sqrt(q * (1 - q) / self.samples)


def cumulative_table(box) -> np.ndarray:
    """Row ``x*p + y`` holds the cumulative joint distribution over ``a*p + b``."""
    p = box.p
    probs = box.to_float().reshape(p * p, p * p)
    cum = np.cumsum(probs, axis=1)
    for row, pr in zip(cum, probs):
        last = int(np.flatnonzero(pr)[-1])
        row[last:] = 1.0
    return cum


def _shape(cfg: RacConfig) -> tuple[int, int]:
    if cfg.mode == "basic":
        return cfg.N, 1
    return cfg.p, cfg.levels


def draw_block(cfg: RacConfig, rng: np.random.Generator, count: int):
    """Inputs and per-box randomness for ``count`` trials, in a fixed draw order."""
    p, N = cfg.p, cfg.N
    xs = rng.integers(p, size=(count, N), dtype=np.int64)
    ys = rng.integers(N, size=count, dtype=np.int64)
    rints = rng.integers(p, size=(count, N - 1, 3), dtype=np.int64)
    us = rng.random((count, N - 1))
    return xs, ys, rints, us


def rac_guesses(cfg: RacConfig, xs, ys, rints, us, backend: str | None = None) -> np.ndarray:
    group, levels = _shape(cfg)
    F = np.array(lagrange_index_poly(cfg.p, group), dtype=np.int64)
    kernel = kernels.get_backend(backend)
    return kernel(cfg.p, group, levels, cfg.c, F, cumulative_table(cfg.box), xs, ys, rints, us)


def rac_mc(cfg: RacConfig, samples: int, seed: int = 0, block_size: int = 50_000, workers: int = 1,
           backend: str | None = None) -> McEstimate:
    """Success frequency over uniformly random task inputs."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    group, levels = _shape(cfg)
    F = np.array(lagrange_index_poly(cfg.p, group), dtype=np.int64)
    cum = cumulative_table(cfg.box)
    kernel = kernels.get_backend(backend)

    def block(rng, count):
        xs, ys, rints, us = draw_block(cfg, rng, count)
        guesses = kernel(cfg.p, group, levels, cfg.c, F, cum, xs, ys, rints, us)
        return int(np.count_nonzero(guesses == xs[np.arange(count), ys]))

    hits = sum(run_blocks(block, samples, seed, block_size, workers))
    return McEstimate(hits, samples, seed, backend or kernels.BACKEND)
