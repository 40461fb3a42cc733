"""Seeded Monte Carlo study of coverage for a data-selected coordinate mean.

Each replication draws ``n`` observations of ``p`` independent N(0, 1)
coordinates, picks one coordinate with a screening design, and reports
whether the known-variance normal interval for its mean covers zero.

Randomness is counter based: replication ``r`` under seed ``k`` reads the
Philox stream with key ``k`` starting at counter ``r * 2**192``. A
replication's outcome is therefore a pure function of ``(seed, r)`` and
results do not depend on execution order or on the number of workers.

Two draw modes are available. ``"matrix"`` materialises the full ``n x p``
matrix. ``"summary"`` (the default) draws, per coordinate, the standardised
sums of the first ``n // 2`` and the remaining observations, which have
exactly the same joint law as the corresponding sums of the matrix and
cost ``3p`` normals per replication instead of ``n p + p``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from selcover.errors import DomainError, ValidationError
from selcover.probkit import normal_cdf, normal_quantile

DEFAULT_SEED = 20240917
CHUNK_SIZE = 1000
# normals held in memory at once in matrix mode
_MATRIX_BATCH = 2_000_000
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class FixedCoordinate:
    """No selection: always report coordinate ``j`` (1-based)."""

    j: int = 1
    name = "fixed"

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 1:
            raise DomainError(f"coordinate index must be a positive integer, got {self.j!r}")

    @property
    def label(self) -> str:
        return "No selection; fixed coordinate"

    def to_dict(self) -> dict:
        return {"design": self.name, "j": self.j}


@dataclass(frozen=True)
class SameSample:
    """Select the largest coordinate mean and report its interval from the same data."""

    name = "same"
    label = "Same-sample selection"

    def to_dict(self) -> dict:
        return {"design": self.name}


@dataclass(frozen=True)
class SplitSample:
    """Select on the first half of the observations, infer on the second."""

    name = "split"
    label = "Split-sample selection"

    def to_dict(self) -> dict:
        return {"design": self.name}


@dataclass(frozen=True)
class NoisyScreening:
    """Select the largest coordinate mean after adding N(0, tau^2) noise."""

    tau: float
    name = "noisy"

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be positive and finite, got {self.tau!r}")

    @property
    def label(self) -> str:
        return f"Noisy screening, tau = {self.tau:.2f}"

    def to_dict(self) -> dict:
        return {"design": self.name, "tau": self.tau}


ScreeningDesign = Union[FixedCoordinate, SameSample, SplitSample, NoisyScreening]


def design_from_name(name: str, tau: float | None = None, j: int = 1) -> ScreeningDesign:
    if name == "fixed":
        return FixedCoordinate(j)
    if name == "same":
        return SameSample()
    if name == "split":
        return SplitSample()
    if name == "noisy":
        if tau is None:
            raise ValidationError("noisy screening needs a noise scale tau")
        return NoisyScreening(tau)
    raise ValidationError(f"unknown design {name!r}")


@dataclass(frozen=True)
class SimulationConfig:
    design: ScreeningDesign
    n: int = 400
    p: int = 50
    alpha: float = 0.05
    reps: int = 10_000
    seed: int = DEFAULT_SEED
    draw: str = "summary"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"p must be a positive integer, got {self.p!r}")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise DomainError(f"reps must be a positive integer, got {self.reps!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed <= _MASK64):
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.draw not in ("summary", "matrix"):
            raise DomainError(f"draw must be 'summary' or 'matrix', got {self.draw!r}")
        if isinstance(self.design, SplitSample) and self.n % 2:
            raise DomainError("split-sample design needs an even n")
        if isinstance(self.design, SplitSample) and self.n < 2:
            raise DomainError("split-sample design needs n >= 2")
        if isinstance(self.design, FixedCoordinate) and self.design.j > self.p:
            raise DomainError(f"coordinate {self.design.j} exceeds p={self.p}")


@dataclass(frozen=True)
class CoverageReport:
    coverage: float
    mc_se: float
    reps: int
    design: ScreeningDesign
    config: SimulationConfig = field(repr=False)
    exact_coverage: Optional[float] = None

    def to_dict(self) -> dict:
        c = self.config
        return {
            "design": self.design.to_dict(),
            "label": self.design.label,
            "coverage": self.coverage,
            "mc_se": self.mc_se,
            "reps": self.reps,
            "exact_coverage": self.exact_coverage,
            "n": c.n,
            "p": c.p,
            "alpha": c.alpha,
            "seed": c.seed,
            "draw": c.draw,
        }


def replication_uniforms(seed: int, rep: int, size: int) -> np.ndarray:
    """``size`` uniforms in (0, 1) from the stream of replication ``rep``.

    Each 64-bit Philox output keeps its top 52 bits ``k`` and maps to
    ``(k + 0.5) / 2**52``, which is exact and never hits 0 or 1.
    """
    bitgen = np.random.Philox(key=seed, counter=rep << 192)
    raw = bitgen.random_raw(size)
    return ((raw >> np.uint64(12)).astype(float) + 0.5) * 2.0**-52


def _half_sums(config: SimulationConfig, start: int, stop: int):
    """Per-coordinate sums over the first ``n // 2`` and the remaining
    observations, plus the standard normal screening noise, for each
    replication in ``[start, stop)``."""
    n, p, seed = config.n, config.p, config.seed
    n1 = n // 2
    if config.draw == "matrix":
        per_rep = n * p + p
        step = max(1, _MATRIX_BATCH // per_rep)
        first, second, noise = [], [], []
        for lo in range(start, stop, step):
            reps = range(lo, min(lo + step, stop))
            z = normal_quantile(np.stack([replication_uniforms(seed, r, per_rep) for r in reps]))
            x = z[:, : n * p].reshape(-1, n, p)
            first.append(x[:, :n1].sum(axis=1))
            second.append(x[:, n1:].sum(axis=1))
            noise.append(z[:, n * p:])
        return np.concatenate(first), np.concatenate(second), np.concatenate(noise)
    u = np.stack([replication_uniforms(seed, r, 3 * p) for r in range(start, stop)])
    z = normal_quantile(u)
    return math.sqrt(n1) * z[:, :p], math.sqrt(n - n1) * z[:, p: 2 * p], z[:, 2 * p:]


def _covered_block(config: SimulationConfig, start: int, stop: int) -> np.ndarray:
    first, second, noise = _half_sums(config, start, stop)
    n = config.n
    z = normal_quantile(1.0 - config.alpha / 2.0)
    rows = np.arange(stop - start)
    design = config.design

    if isinstance(design, SplitSample):
        half = n // 2
        chosen = np.argmax(first / half, axis=1)
        estimate = second[rows, chosen] / (n - half)
        return np.abs(estimate) <= z / math.sqrt(n - half)

    means = (first + second) / n
    if isinstance(design, FixedCoordinate):
        chosen = np.full(rows.size, design.j - 1)
    elif isinstance(design, SameSample):
        chosen = np.argmax(means, axis=1)
    elif isinstance(design, NoisyScreening):
        chosen = np.argmax(means + design.tau * noise, axis=1)
    else:
        raise TypeError(f"unsupported design {type(design).__name__}")
    return np.abs(means[rows, chosen]) <= z / math.sqrt(n)


def run_replication(config: SimulationConfig, rep_index: int) -> bool:
    """Whether the interval for the selected coordinate covers zero in
    replication ``rep_index``."""
    if not (0 <= rep_index < config.reps):
        raise DomainError(f"rep_index must lie in [0, {config.reps}), got {rep_index!r}")
    return bool(_covered_block(config, rep_index, rep_index + 1)[0])


def _block_job(args):
    config, start, stop = args
    return _covered_block(config, start, stop)


def covered_sequence(config: SimulationConfig, workers: int = 1) -> np.ndarray:
    """Coverage indicators for every replication, in replication order.

    Blocks are cut at fixed offsets independent of ``workers``, so the
    output is identical for any degree of parallelism.
    """
    blocks = [(config, s, min(s + CHUNK_SIZE, config.reps))
              for s in range(0, config.reps, CHUNK_SIZE)]
    if workers is None or workers < 1:
        workers = os.cpu_count() or 1
    if workers == 1 or len(blocks) == 1:
        parts = [_block_job(b) for b in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block_job, blocks))
    return np.concatenate(parts)


def exact_same_sample_coverage(p: int, alpha: float) -> float:
    """Coverage of the same-sample design: ``Phi(z_{alpha/2}) ** p``."""
    if int(p) != p or p < 1:
        raise DomainError(f"p must be a positive integer, got {p!r}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return normal_cdf(normal_quantile(1.0 - alpha / 2.0)) ** p


def _exact_coverage(config: SimulationConfig) -> Optional[float]:
    if isinstance(config.design, FixedCoordinate):
        return 1.0 - config.alpha
    if isinstance(config.design, SameSample):
        return exact_same_sample_coverage(config.p, config.alpha)
    return None


def run_simulation(config: SimulationConfig, workers: int = 1) -> CoverageReport:
    covered = covered_sequence(config, workers)
    c = int(covered.sum()) / config.reps
    return CoverageReport(
        coverage=c,
        mc_se=math.sqrt(c * (1.0 - c) / config.reps),
        reps=config.reps,
        design=config.design,
        config=config,
        exact_coverage=_exact_coverage(config),
    )


TABLE1_DESIGNS = (
    FixedCoordinate(1),
    SameSample(),
    NoisyScreening(0.25),
    NoisyScreening(0.5),
    NoisyScreening(1.0),
    SplitSample(),
)


def table1(seed: int = DEFAULT_SEED, reps: int = 10_000, workers: int = 1,
           draw: str = "summary") -> list[CoverageReport]:
    """The six screening designs at n=400, p=50, alpha=0.05."""
    if reps < 1:
        raise DomainError(f"reps must be positive, got {reps!r}")
    return [
        run_simulation(
            SimulationConfig(design, n=400, p=50, alpha=0.05, reps=reps, seed=seed, draw=draw),
            workers,
        )
        for design in TABLE1_DESIGNS
    ]
