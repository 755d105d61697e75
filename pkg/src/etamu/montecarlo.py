"""Monte-Carlo oracle for the combined SNR and its metrics.

A branch SNR is drawn as the sum of two independent Gamma variates whose
product of MGFs is the branch MGF.  Draws are organised in fixed-size
blocks; block ``j`` uses a Philox generator seeded from
``SeedSequence(seed, spawn_key=(j,))``, so every estimate depends only on
``(seed, replicas)`` and never on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaincc
from scipy.stats import kstwobign

from .channel import BranchParams, _as_format1, derived_coeffs
from .errors import DomainError
from .metrics import DEFAULT_FIT, CapacityFit, ModulationScheme
from .sumstats import MrcChannel, sum_cdf_array

__all__ = [
    "SimConfig",
    "BLOCK_SIZE",
    "block_generator",
    "sample_branch",
    "sample_sum",
    "simulate_sum",
    "estimate_outage",
    "estimate_ser",
    "estimate_capacity",
    "ks_statistic",
    "ks_band",
]

BLOCK_SIZE = 65536
Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo settings.

    ``stream_count`` only sets the number of worker threads; results are a
    function of ``seed`` and ``replicas`` alone.
    """

    seed: int = 0
    replicas: int = 1_000_000
    stream_count: int = 1

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2 ** 64):
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not (isinstance(self.replicas, (int, np.integer)) and self.replicas >= 1):
            raise DomainError(f"replicas must be a positive integer, got {self.replicas!r}")
        if not (isinstance(self.stream_count, (int, np.integer)) and self.stream_count >= 1):
            raise DomainError(f"stream_count must be a positive integer, got {self.stream_count!r}")


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _branch_scales(f1: BranchParams):
    k = derived_coeffs(f1)
    return (k.b_coef, 1.0 / k.a_coef), (k.d_coef, 1.0 / k.c_coef)


def sample_branch(f1, stream: np.random.Generator, size=None):
    """Draw branch SNRs as ``Gamma(B, 1/A) + Gamma(D, 1/C)``."""
    f1 = _as_format1(f1)
    (b, sa), (d, sc) = _branch_scales(f1)
    return stream.gamma(b, sa, size) + stream.gamma(d, sc, size)


def sample_sum(ch: MrcChannel, stream: np.random.Generator, size=None):
    """Draw combined SNRs; branches are drawn in channel order."""
    out = 0.0
    for br in ch.branches:
        out = out + sample_branch(br, stream, size)
    return out


def _blocks(replicas: int):
    n_full, rest = divmod(replicas, BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * n_full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _map_blocks(fn: Callable[[np.ndarray], np.ndarray], ch: MrcChannel, cfg: SimConfig):
    """Apply ``fn`` to each block of draws and return per-block (sum, sum of squares)."""
    def work(item):
        j, size = item
        x = np.asarray(fn(sample_sum(ch, block_generator(cfg.seed, j), size)), dtype=float)
        return math.fsum(x), math.fsum(x * x)

    items = _blocks(cfg.replicas)
    if cfg.stream_count > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=cfg.stream_count) as pool:
            return list(pool.map(work, items))
    return [work(it) for it in items]


def simulate_sum(ch: MrcChannel, cfg: SimConfig) -> np.ndarray:
    """All ``cfg.replicas`` combined-SNR draws, concatenated in block order."""
    items = _blocks(cfg.replicas)

    def work(item):
        j, size = item
        return sample_sum(ch, block_generator(cfg.seed, j), size)

    if cfg.stream_count > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=cfg.stream_count) as pool:
            parts = list(pool.map(work, items))
    else:
        parts = [work(it) for it in items]
    return np.concatenate(parts)


def _mean_halfwidth(sums, n) -> Tuple[float, float]:
    s1 = math.fsum(s for s, _ in sums)
    s2 = math.fsum(q for _, q in sums)
    mean = s1 / n
    if n < 2:
        return mean, math.inf
    var = max(s2 - n * mean * mean, 0.0) / (n - 1)
    return mean, Z95 * math.sqrt(var / n)


def estimate_outage(ch: MrcChannel, threshold: float, cfg: SimConfig) -> Tuple[float, float]:
    """Fraction of draws at or below ``threshold`` with an Agresti-Coull 95% half-width."""
    if threshold < 0:
        raise DomainError("threshold must be >= 0")
    sums = _map_blocks(lambda x: (x <= threshold).astype(float), ch, cfg)
    n = cfg.replicas
    k = math.fsum(s for s, _ in sums)
    n_t = n + Z95 ** 2
    p_t = (k + Z95 ** 2 / 2.0) / n_t
    return k / n, Z95 * math.sqrt(p_t * (1.0 - p_t) / n_t)


def estimate_ser(ch: MrcChannel, mod: ModulationScheme, cfg: SimConfig) -> Tuple[float, float]:
    """Mean of the conditional SER ``beta * Q(zeta, delta * gamma)`` over draws."""
    return _mean_halfwidth(
        _map_blocks(lambda x: mod.beta * gammaincc(mod.zeta, mod.delta * x), ch, cfg), cfg.replicas
    )


def estimate_capacity(ch: MrcChannel, cfg: SimConfig, exact_log: bool = True,
                      fit: CapacityFit = DEFAULT_FIT) -> Tuple[float, float]:
    """Mean of ``log2(1 + gamma)`` (or of the exponential fit) over draws."""
    if exact_log:
        def fn(x):
            return np.log1p(x) / math.log(2.0)
    else:
        fn = fit
    return _mean_halfwidth(_map_blocks(fn, ch, cfg), cfg.replicas)


def ks_band(n: int, level: float = 0.99) -> float:
    """Asymptotic Kolmogorov-Smirnov acceptance band for ``n`` draws."""
    return float(kstwobign.ppf(level)) / math.sqrt(n)


def ks_statistic(draws, cdf=None, ch: MrcChannel = None, grid_points: int = 4000) -> float:
    """Two-sided KS distance between ``draws`` and a model CDF.

    ``cdf`` is a vectorized CDF; alternatively pass ``ch`` to use the
    contour CDF of the combined SNR, evaluated on a quantile grid and
    interpolated monotonically (PCHIP) at every draw.
    """
    x = np.sort(np.asarray(draws, dtype=float))
    n = x.size
    if cdf is not None:
        F = np.asarray(cdf(x), dtype=float)
    else:
        if ch is None:
            raise DomainError("pass either cdf or ch")
        grid = np.quantile(x, np.linspace(0.0, 1.0, grid_points))
        grid = np.unique(np.concatenate(([x[0] * 0.5], grid, [x[-1] * 1.01])))
        F = np.clip(PchipInterpolator(grid, sum_cdf_array(ch, grid))(x), 0.0, 1.0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
