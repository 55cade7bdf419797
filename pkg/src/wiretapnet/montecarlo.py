"""Seeded Monte Carlo for wiretap channels.

Random numbers come from numpy's Philox, a counter-based generator. Trials
are cut into fixed blocks of :data:`BLOCK` and block ``b`` draws from the
stream whose counter starts at ``b * 2**192``, so results do not depend on
how blocks are spread over threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channelmath import Distribution, WiretapChannel, entropy

BLOCK = 1 << 16
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int = 0
    input_dist: Distribution | None = None
    threads: int = 1

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if int(self.threads) < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class JointCounts:
    """Counts of ``(x, y, z)`` triples, indexed ``counts[x, y, z]``."""

    counts: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def marginal(self, pair: str) -> np.ndarray:
        if pair == "xy":
            return self.counts.sum(axis=2)
        if pair == "xz":
            return self.counts.sum(axis=1)
        if pair == "yz":
            return self.counts.sum(axis=0)
        raise ValueError(f"pair must be 'xy', 'xz' or 'yz', got {pair!r}")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Generator for trial block ``block`` of stream ``seed``."""
    bitgen = np.random.Philox(key=[int(seed) & _MASK64, 0], counter=[0, 0, 0, int(block)])
    return np.random.Generator(bitgen)


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range((trials + BLOCK - 1) // BLOCK)]


def _map_blocks(fn, trials: int, threads: int):
    jobs = _blocks(trials)
    if threads == 1 or len(jobs) == 1:
        return [fn(b, size) for b, size in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda j: fn(*j), jobs))


def _inverse_cdf(cum: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the first cumulative entry above ``u``, row by row."""
    idx = (u[:, None] >= cum).sum(axis=1)
    return np.minimum(idx, cum.shape[1] - 1)


def simulate_channel(wt: WiretapChannel, cfg: SimConfig) -> JointCounts:
    """Sample ``x`` from the input law, then ``y`` given ``x`` and ``z`` given ``y``."""
    F = wt.forward.rows
    D = wt.degrading.rows
    nx, ny = F.shape
    nz = D.shape[1]
    px = cfg.input_dist.probs if cfg.input_dist is not None else np.full(nx, 1.0 / nx)
    if px.shape[0] != nx:
        raise ValueError(f"input distribution has {px.shape[0]} entries, channel has {nx} inputs")
    cx = np.cumsum(px)
    cy = np.cumsum(F, axis=1)
    cz = np.cumsum(D, axis=1)

    def run(b: int, size: int) -> np.ndarray:
        u = block_generator(cfg.seed, b).random((size, 3))
        x = _inverse_cdf(cx[None, :].repeat(size, 0), u[:, 0])
        y = _inverse_cdf(cy[x], u[:, 1])
        z = _inverse_cdf(cz[y], u[:, 2])
        flat = (x * ny + y) * nz + z
        return np.bincount(flat, minlength=nx * ny * nz)

    parts = _map_blocks(run, int(cfg.trials), int(cfg.threads))
    return JointCounts(np.sum(parts, axis=0).reshape(nx, ny, nz))


def empirical_mi(counts: JointCounts, pair: str = "xy") -> float:
    """Plug-in mutual information of a marginal pair, in bits."""
    joint = counts.marginal(pair).astype(float)
    total = joint.sum()
    if total <= 0:
        raise ValueError("no samples")
    p = joint / total
    mi = entropy(p.sum(axis=1)) + entropy(p.sum(axis=0)) - entropy(p.ravel())
    return max(float(mi), 0.0)


def plugin_sigma(counts: JointCounts, pair: str = "xy") -> float:
    """Delta-method standard deviation of the plug-in estimate."""
    joint = counts.marginal(pair).astype(float)
    N = joint.sum()
    p = joint / N
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        info = np.where(p > 0, np.log2(p / (px * py)), 0.0)
    mean = float((p * info).sum())
    var = float((p * info**2).sum()) - mean**2
    return float(np.sqrt(max(var, 0.0) / N))


def double_exposure(erasure_prob: float, cfg: SimConfig) -> float:
    """Fraction of trials in which at least one of two independently
    erased copies of a bit gets through."""
    if not 0.0 <= erasure_prob <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {erasure_prob}")

    def run(b: int, size: int) -> int:
        u = block_generator(cfg.seed, b).random((size, 2))
        return int(np.count_nonzero((u >= erasure_prob).any(axis=1)))

    hits = sum(_map_blocks(run, int(cfg.trials), int(cfg.threads)))
    return hits / int(cfg.trials)
