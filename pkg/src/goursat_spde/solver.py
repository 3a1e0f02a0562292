"""Explicit marching for Y_xt = F(Y) + sigma * W_xt with Goursat data.

For i, j >= 1 the update is

    Y[i, j] = Y[i-1, j] + Y[i, j-1] - Y[i-1, j-1]
              + dx*dt*F(Y[i-1, j-1]) + sigma*sqrt(dx*dt)*N[i-1, j-1]

swept with t outer and x inner. A value that is non-finite or exceeds
``guard`` in magnitude marks the run singular; every site on or past that
anti-diagonal is stored as NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .grid import BoundaryData, GridSpec, ScalarField
from .noise import IncrementField, NoiseConfig, increment_blocks
from .source import Affine, Source

DEFAULT_GUARD = 1e6
STREAM_BLOCK = 64
COMPLETED = "completed"
SINGULAR = "singular"


class SolverInputError(ValueError):
    pass


class UnsupportedClaimError(ValueError):
    """Raised when an exactness claim is requested for a source it does not hold for."""


@dataclass(frozen=True, eq=False)
class SolveResult:
    field: ScalarField
    status: str
    singular_site: tuple[int, int] | None
    guard: float

    @property
    def singular(self) -> bool:
        return self.status == SINGULAR

    @property
    def singular_diagonal(self) -> int | None:
        return None if self.singular_site is None else sum(self.singular_site)


def _check_inputs(spec, bc, sigma, increments, guard):
    bc.check(spec)
    if not math.isfinite(sigma) or sigma < 0:
        raise SolverInputError(f"sigma must be finite and >= 0, got {sigma!r}")
    if not guard > 0:
        raise SolverInputError(f"guard must be positive, got {guard!r}")
    if sigma > 0 and increments is None:
        raise SolverInputError("increments are required when sigma > 0")
    if increments is not None and increments.values.shape != (spec.n_x, spec.n_t):
        raise SolverInputError(
            f"increment shape {increments.values.shape} does not match grid cells ({spec.n_x}, {spec.n_t})"
        )


def _empty_field(spec: GridSpec, bc: BoundaryData) -> np.ndarray:
    Y = np.empty(spec.shape, order="F")
    Y[:, 0] = bc.f
    Y[0, :] = bc.g
    return Y


def solve(
    spec: GridSpec,
    bc: BoundaryData,
    src: Source,
    sigma: float = 0.0,
    increments: IncrementField | None = None,
    guard: float = DEFAULT_GUARD,
) -> SolveResult:
    """March the scheme over the full lattice.

    Parameters
    ----------
    spec : GridSpec
    bc : BoundaryData
        Sampled f (t = 0) and g (x = 0).
    src : Source
        Drift F.
    sigma : float
        Noise amplitude; ``increments`` must be given when positive.
    increments : IncrementField, optional
    guard : float
        Divergence threshold on |Y|.
    """
    _check_inputs(spec, bc, sigma, increments, guard)
    Y = _empty_field(spec, bc)
    use_noise = sigma > 0
    N = increments.values if use_noise else np.zeros((1, 1))
    p0, p1 = src.params
    smin, si, sj = _kernels.march(
        Y, src.kind, p0, p1, spec.dx * spec.dt, sigma * math.sqrt(spec.dx * spec.dt),
        N, use_noise, float(guard), 0, _kernels.NO_SINGULARITY,
    )
    site = None
    if smin != _kernels.NO_SINGULARITY:
        _kernels.blank_diagonals(Y, smin, 0)
        site = (int(si), int(sj))
    return SolveResult(
        field=ScalarField(spec, np.ascontiguousarray(Y)),
        status=SINGULAR if site else COMPLETED,
        singular_site=site,
        guard=float(guard),
    )


# --- recording subsets of the lattice -------------------------------------------


@dataclass(frozen=True)
class Record:
    """Which part of each trial to keep.

    ``mode`` is ``"full"``, ``"slices"`` or ``"points"``. Slices are given as
    ``("t", value)`` for Y(., t) or ``("x", value)`` for Y(x, .); points as
    ``(x, t)`` pairs. Coordinates snap to the nearest lattice site.
    """

    mode: str = "full"
    slices: tuple = ()
    points: tuple = ()

    def __post_init__(self):
        if self.mode not in ("full", "slices", "points"):
            raise ValueError(f"unknown record mode {self.mode!r}")
        slices = tuple((str(axis), float(v)) for axis, v in self.slices)
        for axis, _ in slices:
            if axis not in ("x", "t"):
                raise ValueError(f"slice axis must be 'x' or 't', got {axis!r}")
        object.__setattr__(self, "slices", slices)
        object.__setattr__(self, "points", tuple((float(x), float(t)) for x, t in self.points))
        if self.mode == "slices" and not slices:
            raise ValueError("slices mode needs at least one slice")
        if self.mode == "points" and not self.points:
            raise ValueError("points mode needs at least one point")

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def of_slices(cls, slices: Iterable[tuple[str, float]], points: Iterable = ()):
        return cls("slices", tuple(slices), tuple(points))

    @classmethod
    def of_points(cls, points: Iterable[tuple[float, float]]):
        return cls("points", (), tuple(points))


@dataclass(frozen=True, eq=False)
class RecordPlan:
    """Flat lattice indices ``(I, J)`` realizing a ``Record`` on a grid.

    ``segments`` lists ``(label, start, stop)`` ranges into the flat vector
    and ``snap`` the distance from each requested coordinate to its site.
    """

    spec: GridSpec
    record: Record
    I: np.ndarray
    J: np.ndarray
    segments: list = field(default_factory=list)
    snap: list = field(default_factory=list)

    @classmethod
    def build(cls, spec: GridSpec, record: Record) -> "RecordPlan":
        if record.mode == "full":
            I, J = np.meshgrid(np.arange(spec.n_x + 1), np.arange(spec.n_t + 1), indexing="ij")
            return cls(spec, record, I.ravel(), J.ravel(), [("full", 0, I.size)], [])
        Is, Js, segments, snap = [], [], [], []
        pos = 0
        for axis, value in record.slices:
            if axis == "t":
                j = spec.t_index(value)
                I = np.arange(spec.n_x + 1)
                J = np.full(I.size, j)
                snap.append((f"t={value:g}", abs(j * spec.dt - value)))
            else:
                i = spec.x_index(value)
                J = np.arange(spec.n_t + 1)
                I = np.full(J.size, i)
                snap.append((f"x={value:g}", abs(i * spec.dx - value)))
            Is.append(I)
            Js.append(J)
            segments.append((f"{axis}={value:g}", pos, pos + I.size))
            pos += I.size
        for x, t in record.points:
            i, j = spec.index(x, t)
            Is.append(np.array([i]))
            Js.append(np.array([j]))
            segments.append((f"({x:g},{t:g})", pos, pos + 1))
            snap.append((f"({x:g},{t:g})", math.hypot(i * spec.dx - x, j * spec.dt - t)))
            pos += 1
        return cls(spec, record, np.concatenate(Is), np.concatenate(Js), segments, snap)

    @property
    def size(self) -> int:
        return int(self.I.size)

    def extract(self, Y: np.ndarray) -> np.ndarray:
        return Y[self.I, self.J]

    def segment(self, flat: np.ndarray, label: str) -> np.ndarray:
        for name, a, b in self.segments:
            if name == label:
                return flat[a:b]
        raise KeyError(label)


@dataclass(frozen=True, eq=False)
class RecordedRun:
    values: np.ndarray
    status: str
    singular_site: tuple[int, int] | None


def solve_recorded(
    spec: GridSpec,
    bc: BoundaryData,
    src: Source,
    sigma: float,
    cfg: NoiseConfig | None,
    plan: RecordPlan,
    guard: float = DEFAULT_GUARD,
    block: int = STREAM_BLOCK,
) -> RecordedRun:
    """Stream the march in column blocks, keeping only ``plan``'s sites.

    Memory is O(n_x * block) instead of O(n_x * n_t). Increments are drawn
    from ``cfg``'s stream in the same order as ``sample_increments``, so the
    recorded values equal those of a full ``solve`` with the same trial.
    """
    if sigma > 0 and cfg is None:
        raise SolverInputError("a NoiseConfig is required when sigma > 0")
    _check_inputs(spec, bc, 0.0, None, guard)
    if not math.isfinite(sigma) or sigma < 0:
        raise SolverInputError(f"sigma must be finite and >= 0, got {sigma!r}")
    use_noise = sigma > 0
    p0, p1 = src.params
    dxdt = spec.dx * spec.dt
    scale = sigma * math.sqrt(dxdt)
    out = np.empty(plan.size)
    on_t0 = plan.J == 0
    out[on_t0] = bc.f[plan.I[on_t0]]

    blocks = increment_blocks(spec, cfg, block) if use_noise else None
    prev = np.asarray(bc.f, dtype=float)
    smin = _kernels.NO_SINGULARITY
    site = None
    zeros = np.zeros((1, 1))
    for start in range(0, spec.n_t, block):
        b = min(block, spec.n_t - start)
        Yb = np.empty((spec.n_x + 1, b + 1), order="F")
        Yb[:, 0] = prev
        Yb[0, 1:] = bc.g[start + 1 : start + b + 1]
        N = np.asfortranarray(next(blocks)) if use_noise else zeros
        smin, si, sj = _kernels.march(Yb, src.kind, p0, p1, dxdt, scale, N, use_noise, float(guard), start, smin)
        if si >= 0:
            site = (int(si), int(sj))
        if smin != _kernels.NO_SINGULARITY:
            _kernels.blank_diagonals(Yb, smin, start)
        sel = (plan.J > start) & (plan.J <= start + b)
        out[sel] = Yb[plan.I[sel], plan.J[sel] - start]
        prev = Yb[:, -1].copy()
    if site is not None:
        out[plan.I + plan.J >= smin] = np.nan
    return RecordedRun(out, SINGULAR if site else COMPLETED, site)


def mean_matches_deterministic_check(spec, bc, src, sigma, n_trials, master_seed=0, threads=None):
    """Compare the ensemble mean to the deterministic solve (affine drift only).

    Returns a dict with the sup-norm discrepancy, the Monte Carlo standard
    error at that site, and the fraction of lattice points whose discrepancy
    lies within 4 standard errors.
    """
    if not isinstance(src, Affine):
        raise UnsupportedClaimError(
            f"mean equals deterministic solution only for affine drift, not {src.name!r}"
        )
    from .ensemble import EnsembleSpec, run_ensemble

    det = solve(spec, bc, src, 0.0).field.values
    stats = run_ensemble(spec, bc, src, sigma, EnsembleSpec(n_trials, master_seed), threads=threads)
    mean = stats.mean.values
    diff = np.abs(mean - det)
    se = stats.sd.values / np.sqrt(np.maximum(stats.counts.reshape(spec.shape), 1))
    k = np.unravel_index(np.nanargmax(diff), diff.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        within = (diff <= 4 * se) | (diff == 0)
    return {
        "max_discrepancy": float(diff[k]),
        "site": spec.coord(*k),
        "standard_error": float(se[k]),
        "fraction_within_4se": float(np.mean(within)),
        "n_trials": n_trials,
    }
