"""Monte Carlo ensembles: pointwise mean, SD, confidence half-widths, singular counts.

Trials are grouped into fixed chunks of ``CHUNK`` consecutive indices. Each
chunk folds its trials in index order with Welford updates, and the chunk
accumulators are merged in chunk order (Chan et al.). The partition does not
depend on the thread count, so statistics are bit-identical for any
``threads`` value.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import BoundaryData, GridSpec, ScalarField
from .noise import NoiseConfig, sample_increments
from .solver import DEFAULT_GUARD, Record, RecordPlan, solve, solve_recorded
from .source import Source

CHUNK = 8
Z95 = 1.96


class EmptyEnsembleError(RuntimeError):
    """Raised when every trial of an ensemble diverged."""


@dataclass(frozen=True)
class EnsembleSpec:
    n_trials: int
    master_seed: int = 0
    record: Record = field(default_factory=Record.full)
    guard: float = DEFAULT_GUARD

    def __post_init__(self):
        if int(self.n_trials) < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed!r}")


class _Moments:
    """Welford accumulator over flat vectors; NaN samples are skipped."""

    def __init__(self, size):
        self.n = np.zeros(size, dtype=np.int64)
        self.mean = np.zeros(size)
        self.m2 = np.zeros(size)

    def push(self, v):
        ok = np.isfinite(v)
        self.n[ok] += 1
        delta = np.where(ok, v - self.mean, 0.0)
        self.mean[ok] += delta[ok] / self.n[ok]
        self.m2[ok] += delta[ok] * (v[ok] - self.mean[ok])

    def merge(self, other: "_Moments"):
        n = self.n + other.n
        nz = n > 0
        delta = other.mean - self.mean
        w = np.divide(other.n, n, out=np.zeros_like(self.mean), where=nz)
        self.mean = np.where(nz, self.mean + delta * w, 0.0)
        self.m2 = self.m2 + other.m2 + delta * delta * self.n * w
        self.n = n


@dataclass(eq=False)
class EnsembleStats:
    """Pointwise ensemble statistics over a recorded subset of the lattice.

    ``mean_flat``, ``sd_flat`` and ``counts`` follow ``plan``'s flat order.
    Points that only singular trials ever reached stay out of every sample;
    where no trial contributes, mean and SD are NaN.
    """

    plan: RecordPlan
    mean_flat: np.ndarray
    sd_flat: np.ndarray
    counts: np.ndarray
    n_trials: int
    n_singular: int
    singular_sites: dict
    sigma: float
    master_seed: int

    @property
    def spec(self) -> GridSpec:
        return self.plan.spec

    @property
    def n_completed(self) -> int:
        return self.n_trials - self.n_singular

    @property
    def mean(self) -> ScalarField:
        return self._as_field(self.mean_flat)

    @property
    def sd(self) -> ScalarField:
        return self._as_field(self.sd_flat)

    def _as_field(self, flat):
        if self.plan.record.mode != "full":
            raise ValueError("full fields are only available with Record.full()")
        return ScalarField(self.spec, flat.reshape(self.spec.shape))

    @property
    def extrema_of_mean(self) -> tuple[float, float]:
        return (float(np.nanmin(self.mean_flat)), float(np.nanmax(self.mean_flat)))

    @property
    def ci95_flat(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return Z95 * self.sd_flat / np.sqrt(self.counts)

    def _flat_index(self, x, t):
        i, j = self.spec.index(x, t)
        hit = np.flatnonzero((self.plan.I == i) & (self.plan.J == j))
        if hit.size == 0:
            raise KeyError(f"({x}, {t}) was not recorded")
        return int(hit[0])

    def at(self, x: float, t: float) -> dict:
        """Mean, SD, sample count and 95% CI half-width at the site nearest ``(x, t)``."""
        k = self._flat_index(x, t)
        return {
            "x": self.spec.coord(*self.spec.index(x, t))[0],
            "t": self.spec.coord(*self.spec.index(x, t))[1],
            "mean": float(self.mean_flat[k]),
            "sd": float(self.sd_flat[k]),
            "count": int(self.counts[k]),
            "ci95_halfwidth": float(self.ci95_flat[k]),
        }

    def segment(self, label: str) -> dict:
        """Coordinates and statistics along one recorded slice or point."""
        for name, a, b in self.plan.segments:
            if name == label:
                I, J = self.plan.I[a:b], self.plan.J[a:b]
                return {
                    "x": I * self.spec.dx,
                    "t": J * self.spec.dt,
                    "mean": self.mean_flat[a:b],
                    "sd": self.sd_flat[a:b],
                    "count": self.counts[a:b],
                }
        raise KeyError(label)

    def summary(self) -> dict:
        lo, hi = self.extrema_of_mean
        return {
            "n_trials": self.n_trials,
            "n_completed": self.n_completed,
            "n_singular": self.n_singular,
            "singular_sites": {str(k): list(v) for k, v in sorted(self.singular_sites.items())},
            "min_mean": lo,
            "max_mean": hi,
            "sigma": self.sigma,
            "master_seed": self.master_seed,
        }


def _run_chunk(args):
    spec, bc, src, sigma, es, plan, trials = args
    acc = _Moments(plan.size)
    singular = {}
    for k in trials:
        cfg = NoiseConfig(sigma, es.master_seed, k)
        if plan.record.mode == "full":
            incr = sample_increments(spec, cfg) if sigma > 0 else None
            res = solve(spec, bc, src, sigma, incr, es.guard)
            values = res.field.values.ravel()
        else:
            res = solve_recorded(spec, bc, src, sigma, cfg, plan, es.guard)
            values = res.values
        if res.singular_site is not None:
            singular[k] = res.singular_site
        acc.push(values)
    return acc, singular


def default_threads() -> int:
    return os.cpu_count() or 1


def run_ensemble(
    spec: GridSpec,
    bc: BoundaryData,
    src: Source,
    sigma: float,
    es: EnsembleSpec,
    threads: int | None = None,
) -> EnsembleStats:
    """Run ``es.n_trials`` independent trials; trial k uses stream (master_seed, k)."""
    bc.check(spec)
    plan = RecordPlan.build(spec, es.record)
    n = int(es.n_trials)
    if sigma == 0:
        # every trial is the deterministic path
        res = solve_recorded(spec, bc, src, 0.0, None, plan, es.guard)
        ok = np.isfinite(res.values)
        singular = {k: res.singular_site for k in range(n)} if res.singular_site else {}
        stats = EnsembleStats(
            plan, np.where(ok, res.values, np.nan), np.where(ok, 0.0, np.nan),
            np.where(ok, n, 0).astype(np.int64), n, len(singular), singular, 0.0, int(es.master_seed),
        )
    else:
        chunks = [range(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
        jobs = [(spec, bc, src, sigma, es, plan, c) for c in chunks]
        threads = threads or default_threads()
        total = _Moments(plan.size)
        singular = {}
        if threads == 1:
            results = map(_run_chunk, jobs)
        else:
            pool = ThreadPoolExecutor(max_workers=threads)
            results = pool.map(_run_chunk, jobs)
        for acc, sing in results:
            total.merge(acc)
            singular.update(sing)
        if threads != 1:
            pool.shutdown()
        with np.errstate(invalid="ignore", divide="ignore"):
            var = np.where(total.n > 1, total.m2 / (total.n - 1), np.where(total.n == 1, 0.0, np.nan))
        mean = np.where(total.n > 0, total.mean, np.nan)
        stats = EnsembleStats(
            plan, mean, np.sqrt(np.maximum(var, 0.0)), total.n, n, len(singular), singular,
            float(sigma), int(es.master_seed),
        )
    if stats.n_completed == 0:
        raise EmptyEnsembleError(f"all {n} trials diverged (guard {es.guard:g})")
    return stats


def sample_points(
    spec: GridSpec,
    bc: BoundaryData,
    src: Source,
    sigma: float,
    points,
    n_trials: int,
    master_seed: int = 0,
    guard: float = DEFAULT_GUARD,
) -> np.ndarray:
    """Raw per-trial values at ``points``; shape ``(n_trials, len(points))``."""
    plan = RecordPlan.build(spec, Record.of_points(points))
    out = np.empty((n_trials, plan.size))
    for k in range(n_trials):
        out[k] = solve_recorded(spec, bc, src, sigma, NoiseConfig(sigma, master_seed, k), plan, guard).values
    return out


def sd_growth_fit(sigmas, sds) -> float:
    """Least-squares slope through the origin of SD against sigma."""
    sigmas = np.asarray(sigmas, dtype=float)
    sds = np.asarray(sds, dtype=float)
    if sigmas.shape != sds.shape or sigmas.ndim != 1:
        raise ValueError("sigmas and sds must be 1-d sequences of equal length")
    if sigmas.size < 3:
        raise ValueError(f"need at least 3 (sigma, SD) points, got {sigmas.size}")
    if np.unique(sigmas[sigmas > 0]).size < 2:
        raise ValueError("need at least two distinct positive sigma values")
    return float(np.dot(sigmas, sds) / np.dot(sigmas, sigmas))
