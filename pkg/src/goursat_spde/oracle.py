"""Reference solutions used to check the marching solver.

The Picard solver iterates the Goursat integral equation

    Y = f(x) + g(t) - c + iint_0^x iint_0^t F(Y) + sigma * W

with left-endpoint rectangle sums, built from numpy cumulative sums rather
than the compiled kernel. Its fixed point is the marching solution, so the
two agree to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import BoundaryData, GridSpec, ScalarField
from .noise import IncrementField
from .source import Source, apply


class PicardConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LinearExactParams:
    c1: float
    c2: float
    alpha: float


@dataclass(frozen=True)
class KinkParams:
    u: float = 0.0
    x0: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if not abs(self.u) < 1:
            raise ValueError(f"kink speed must satisfy |u| < 1, got {self.u!r}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 (kink) or -1 (anti-kink), got {self.sign!r}")


@dataclass(frozen=True)
class BreatherParams:
    omega: float

    def __post_init__(self):
        if not 0 < self.omega < 1:
            raise ValueError(f"breather frequency must lie in (0, 1), got {self.omega!r}")


def linear_exact(p: LinearExactParams, x, t):
    """c1 e^{alpha x + t} + c2 e^{x + alpha t}, a solution of Y_xt = alpha Y."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return p.c1 * np.exp(p.alpha * x + t) + p.c2 * np.exp(x + p.alpha * t)


def linear_exact_boundary(spec: GridSpec, p: LinearExactParams) -> BoundaryData:
    return BoundaryData(linear_exact(p, spec.x, 0.0), linear_exact(p, 0.0, spec.t))


def linear_exact_field(spec: GridSpec, p: LinearExactParams) -> ScalarField:
    X, T = np.meshgrid(spec.x, spec.t, indexing="ij")
    return ScalarField(spec, linear_exact(p, X, T))


def kink(p: KinkParams, x, t):
    """Sine-Gordon kink (sign=+1) or anti-kink (sign=-1) in Euclidean coordinates."""
    gamma = 1.0 / math.sqrt(1.0 - p.u * p.u)
    z = p.sign * (np.asarray(x, dtype=float) - p.x0 - p.u * np.asarray(t, dtype=float)) * gamma
    with np.errstate(over="ignore"):
        return 4.0 * np.arctan(np.exp(z))


def breather(p: BreatherParams, x, t):
    """Stationary sine-Gordon breather with frequency omega."""
    w = p.omega
    s = math.sqrt(1.0 - w * w)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        return 4.0 * np.arctan(s * np.sin(w * t) / (w * np.cosh(x * s)))


def lightcone_to_euclidean(x, t):
    return (x + t, x - t)


def euclidean_to_lightcone(xi, eta):
    return ((xi + eta) / 2, (xi - eta) / 2)


def _prefix2(a: np.ndarray) -> np.ndarray:
    """S[i, j] = sum_{k<i, l<j} a[k, l]; shape grows by one in each axis."""
    S = np.zeros((a.shape[0] + 1, a.shape[1] + 1))
    S[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    return S


def picard_solve(
    spec: GridSpec,
    bc: BoundaryData,
    src: Source,
    sigma: float = 0.0,
    increments: IncrementField | None = None,
    max_iter: int | None = None,
    tol: float = 1e-13,
) -> ScalarField:
    """Fixed-point iteration of the discrete Goursat integral equation.

    Starts from f + g - c. Sweep k only updates anti-diagonals i + j <= k + 1
    and leaves the rest at the starting guess: the sum operator is strictly
    lower triangular in that index, so values further out are not yet
    determined and iterating them only invites overflow for superlinear
    drifts. Convergence is declared when the unmasked update moves no site by
    more than ``tol`` (relative to max |Y|); for F = 0 that is the first sweep.
    """
    bc.check(spec)
    if sigma > 0 and increments is None:
        raise ValueError("increments are required when sigma > 0")
    if max_iter is None:
        max_iter = 2 * (spec.n_x + spec.n_t) + 10
    base = bc.f[:, None] + bc.g[None, :] - bc.c
    if sigma > 0:
        base = base + sigma * math.sqrt(spec.dx * spec.dt) * _prefix2(increments.values)
    h = spec.dx * spec.dt
    diag = np.add.outer(np.arange(spec.n_x + 1), np.arange(spec.n_t + 1))
    last = spec.n_x + spec.n_t
    Y = base.copy()
    change = math.inf
    for it in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            full = base + h * _prefix2(apply(src, Y[:-1, :-1]))
            change = float(np.max(np.abs(full - Y)))
        if change < tol * max(1.0, float(np.max(np.abs(Y)))):
            return ScalarField(spec, full)
        new = np.where(diag <= it + 1, full, base) if it < last else full
        if not np.all(np.isfinite(new)):
            raise PicardConvergenceError(f"iterate became non-finite at sweep {it}")
        Y = new
    raise PicardConvergenceError(f"no convergence in {max_iter} sweeps (last change {change:.3e})")


def euclidean_residual(phi: np.ndarray, h: float) -> np.ndarray:
    """phi_tt - phi_xx + sin(phi) on interior sites by centered differences.

    ``phi`` is sampled with x along axis 0 and t along axis 1, spacing ``h``
    in both; the result has shape ``(nx - 2, nt - 2)``.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or min(phi.shape) < 3:
        raise ValueError(f"need a lattice of at least 3 x 3, got {phi.shape}")
    c = phi[1:-1, 1:-1]
    tt = (phi[1:-1, 2:] - 2 * c + phi[1:-1, :-2]) / h**2
    xx = (phi[2:, 1:-1] - 2 * c + phi[:-2, 1:-1]) / h**2
    return tt - xx + np.sin(c)
