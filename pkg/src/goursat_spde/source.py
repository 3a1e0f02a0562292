"""Drift terms F(Y) for Y_xt = F(Y) + sigma * W_xt.

Each source is a small frozen dataclass; ``kind`` and ``params`` are what the
numba kernels dispatch on, so adding a variant means touching ``_kernels`` too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

# kernel dispatch codes
ZERO, AFFINE, QUADRATIC, CUBIC, SINE, EXPONENTIAL = range(6)


class SourceDomainError(ValueError):
    """Raised when F is evaluated at a non-finite argument."""


class Source:
    """Base class for the closed set of drift variants."""

    name: ClassVar[str]
    kind: ClassVar[int]

    @property
    def params(self) -> tuple[float, float]:
        return (0.0, 0.0)

    def __call__(self, y: float) -> float:
        return evaluate(self, y)

    def _f(self, y):
        raise NotImplementedError

    def as_dict(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class Zero(Source):
    name: ClassVar[str] = "zero"
    kind: ClassVar[int] = ZERO

    def _f(self, y):
        return 0.0 * y


@dataclass(frozen=True)
class Affine(Source):
    """F = alpha * Y + beta."""

    alpha: float = 1.0
    beta: float = 0.0
    name: ClassVar[str] = "affine"
    kind: ClassVar[int] = AFFINE

    @property
    def params(self):
        return (float(self.alpha), float(self.beta))

    def _f(self, y):
        return self.alpha * y + self.beta

    def as_dict(self):
        return {"name": self.name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class Quadratic(Source):
    """F = k * Y * (1 - Y)."""

    k: float = 1.0
    name: ClassVar[str] = "quadratic"
    kind: ClassVar[int] = QUADRATIC

    @property
    def params(self):
        return (float(self.k), 0.0)

    def _f(self, y):
        return self.k * y * (1.0 - y)

    def as_dict(self):
        return {"name": self.name, "k": self.k}


@dataclass(frozen=True)
class Cubic(Source):
    """F = k * Y * (1 - Y) * (Y - y1)."""

    k: float = 4.0
    y1: float = 0.5
    name: ClassVar[str] = "cubic"
    kind: ClassVar[int] = CUBIC

    @property
    def params(self):
        return (float(self.k), float(self.y1))

    def _f(self, y):
        return self.k * y * (1.0 - y) * (y - self.y1)

    def as_dict(self):
        return {"name": self.name, "k": self.k, "y1": self.y1}


@dataclass(frozen=True)
class SineGordon(Source):
    """F = sign * sin(Y); sign = -1 is the variant used in the inverse-scattering literature."""

    sign: int = 1

    kind: ClassVar[int] = SINE

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    @property
    def name(self):
        return "sine-gordon" if self.sign == 1 else "neg-sine-gordon"

    @property
    def params(self):
        return (float(self.sign), 0.0)

    def _f(self, y):
        return self.sign * np.sin(y)

    def as_dict(self):
        return {"name": self.name}


@dataclass(frozen=True)
class Exponential(Source):
    """F = exp(Y) (Liouville)."""

    name: ClassVar[str] = "exponential"
    kind: ClassVar[int] = EXPONENTIAL

    def _f(self, y):
        with np.errstate(over="ignore"):
            return np.exp(y)


def evaluate(src: Source, y: float) -> float:
    """F(y) for a single finite ``y``."""
    y = float(y)
    if not math.isfinite(y):
        raise SourceDomainError(f"source evaluated at non-finite y={y!r}")
    return float(src._f(y))


def apply(src: Source, y: np.ndarray) -> np.ndarray:
    """Vectorized F over an array; no finiteness check."""
    return np.asarray(src._f(np.asarray(y, dtype=float)), dtype=float)


SOURCE_NAMES = ("zero", "affine", "quadratic", "cubic", "sine-gordon", "neg-sine-gordon", "exponential")


def make_source(name: str, **params) -> Source:
    """Build a source from its textual name; unknown parameters are rejected."""
    key = name.strip().lower().replace("_", "-")
    builders = {
        "zero": Zero,
        "affine": Affine,
        "linear": Affine,
        "quadratic": Quadratic,
        "cubic": Cubic,
        "sine-gordon": lambda: SineGordon(1),
        "neg-sine-gordon": lambda: SineGordon(-1),
        "exponential": Exponential,
    }
    if key not in builders:
        raise ValueError(f"unknown source {name!r}; expected one of {', '.join(SOURCE_NAMES)}")
    if key in ("sine-gordon", "neg-sine-gordon", "zero", "exponential") and params:
        raise ValueError(f"source {key!r} takes no parameters, got {sorted(params)}")
    return builders[key](**params)
