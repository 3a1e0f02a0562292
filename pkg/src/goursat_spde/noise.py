"""Space-time white-noise increments and Brownian-sheet paths.

Every trial owns an independent Philox stream keyed by
``SeedSequence(master_seed, spawn_key=(trial_index,))``. Standard normals
come from numpy's ziggurat sampler (``Generator.standard_normal``), which is
exact. Draws are consumed cell by cell with t as the outer index and x as the
inner one, so a grid can be generated whole or in column blocks and produce
the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .grid import GridSpec, ScalarField

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class NoiseConfig:
    sigma: float = 0.0
    master_seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma!r}")
        if not 0 <= int(self.master_seed) <= MAX_SEED:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed!r}")
        if int(self.trial_index) < 0:
            raise ValueError(f"trial_index must be >= 0, got {self.trial_index!r}")


@dataclass(frozen=True, eq=False)
class IncrementField:
    """Standard-normal N[i, j] for cell (i, j), i.e. the update of lattice point (i + 1, j + 1)."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.spec.n_x, self.spec.n_t):
            raise ValueError(
                f"increment shape {values.shape} does not match ({self.spec.n_x}, {self.spec.n_t})"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.Philox(ss))


def increment_blocks(spec: GridSpec, cfg: NoiseConfig, block: int) -> Iterator[np.ndarray]:
    """Yield ``(n_x, b)`` slabs of increments covering t-cells in order."""
    rng = trial_rng(cfg.master_seed, cfg.trial_index)
    for start in range(0, spec.n_t, block):
        b = min(block, spec.n_t - start)
        yield rng.standard_normal((b, spec.n_x)).T


def sample_increments(spec: GridSpec, cfg: NoiseConfig) -> IncrementField:
    rng = trial_rng(cfg.master_seed, cfg.trial_index)
    return IncrementField(spec, rng.standard_normal((spec.n_t, spec.n_x)).T)


def brownian_sheet(spec: GridSpec, cfg: NoiseConfig, increments: IncrementField | None = None) -> ScalarField:
    """Sample path of sigma * W on the lattice, zero on both axes.

    Computed by the marching scheme with F = 0 so that it agrees bit for bit
    with ``solver.solve``; the closed form is the scaled double cumulative sum
    of the increments.
    """
    from .grid import constant_boundary
    from .solver import solve
    from .source import Zero

    bc = constant_boundary(spec, 0.0)
    if cfg.sigma == 0:
        return solve(spec, bc, Zero(), 0.0).field
    if increments is None:
        increments = sample_increments(spec, cfg)
    return solve(spec, bc, Zero(), cfg.sigma, increments, guard=np.inf).field


def sheet_by_cumsum(spec: GridSpec, sigma: float, increments: IncrementField) -> np.ndarray:
    """sigma * sqrt(dx dt) * sum_{k<i, l<j} N[k, l], evaluated with numpy cumulative sums."""
    W = np.zeros(spec.shape)
    W[1:, 1:] = np.cumsum(np.cumsum(increments.values, axis=0), axis=1)
    return sigma * np.sqrt(spec.dx * spec.dt) * W
