"""Quarter-plane lattice, Goursat boundary data and lattice-valued fields."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class InvalidSpecError(ValueError):
    """Raised for non-positive extents or cell counts."""


class InconsistentCornerError(ValueError):
    """Raised when f(0) and g(0) disagree beyond the corner tolerance."""


CORNER_RTOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice on [0, x_f] x [0, t_f].

    Point ``(i, j)`` sits at ``(i * dx, j * dt)`` with 0-based indices, so the
    lattice holds ``(n_x + 1) * (n_t + 1)`` points.
    """

    x_f: float
    t_f: float
    n_x: int
    n_t: int

    def __post_init__(self):
        for name in ("n_x", "n_t"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise InvalidSpecError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("x_f", "t_f"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise InvalidSpecError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def dx(self) -> float:
        return self.x_f / self.n_x

    @property
    def dt(self) -> float:
        return self.t_f / self.n_t

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x + 1, self.n_t + 1)

    @property
    def n_points(self) -> int:
        return (self.n_x + 1) * (self.n_t + 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_x + 1) * self.dx

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_t + 1) * self.dt

    def coord(self, i: int, j: int) -> tuple[float, float]:
        return (float(i * self.dx), float(j * self.dt))

    def index(self, x: float, t: float) -> tuple[int, int]:
        """Nearest lattice index to ``(x, t)``, clipped to the rectangle."""
        i = int(np.clip(round(x / self.dx), 0, self.n_x))
        j = int(np.clip(round(t / self.dt), 0, self.n_t))
        return (i, j)

    def x_index(self, x: float) -> int:
        return int(np.clip(round(x / self.dx), 0, self.n_x))

    def t_index(self, t: float) -> int:
        return int(np.clip(round(t / self.dt), 0, self.n_t))

    def as_dict(self) -> dict:
        return {"x_f": self.x_f, "t_f": self.t_f, "n_x": self.n_x, "n_t": self.n_t,
                "dx": self.dx, "dt": self.dt}


def build_grid(x_f: float, t_f: float, n_x: int, n_t: int) -> GridSpec:
    return GridSpec(x_f, t_f, n_x, n_t)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values on the ``(n_x + 1) x (n_t + 1)`` lattice.

    NaN entries are the sentinel for sites that did not participate (a
    singular trial past its divergence anti-diagonal, or a lattice point no
    completed trial reached).
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise ValueError(f"field shape {values.shape} does not match grid {self.spec.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def at(self, x: float, t: float) -> float:
        return float(self.values[self.spec.index(x, t)])

    def x_slice(self, t: float) -> np.ndarray:
        """Y(., t) along x at the lattice row nearest ``t``."""
        return self.values[:, self.spec.t_index(t)]

    def t_slice(self, x: float) -> np.ndarray:
        """Y(x, .) along t at the lattice column nearest ``x``."""
        return self.values[self.spec.x_index(x), :]

    def nanmax(self) -> float:
        return float(np.nanmax(self.values))

    def nanmin(self) -> float:
        return float(np.nanmin(self.values))


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Sampled Goursat data: ``f`` along t = 0, ``g`` along x = 0, corner ``c``."""

    f: np.ndarray
    g: np.ndarray
    c: float = field(default=None)

    def __post_init__(self):
        f = np.array(self.f, dtype=float).ravel()
        g = np.array(self.g, dtype=float).ravel()
        if f.size < 2 or g.size < 2:
            raise ValueError("boundary sequences need at least two samples")
        if abs(f[0] - g[0]) > CORNER_RTOL * max(1.0, abs(f[0])):
            raise InconsistentCornerError(f"f(0)={f[0]!r} but g(0)={g[0]!r}")
        f.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "c", float(f[0]))

    def check(self, spec: GridSpec) -> None:
        if self.f.size != spec.n_x + 1 or self.g.size != spec.n_t + 1:
            raise ValueError(
                f"boundary lengths ({self.f.size}, {self.g.size}) do not match "
                f"grid ({spec.n_x + 1}, {spec.n_t + 1})"
            )


def sample_boundary(spec: GridSpec, f: Callable, g: Callable) -> BoundaryData:
    """Sample ``f`` at the x-lattice and ``g`` at the t-lattice.

    ``f`` and ``g`` may be scalar or vectorized; both are called pointwise if
    they do not return an array of matching size.
    """
    return BoundaryData(_sample(f, spec.x), _sample(g, spec.t))


def constant_boundary(spec: GridSpec, value: float) -> BoundaryData:
    return BoundaryData(np.full(spec.n_x + 1, float(value)), np.full(spec.n_t + 1, float(value)))


def _sample(fn: Callable, points: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(fn(points), dtype=float)
        if out.shape == points.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(p)) for p in points])
