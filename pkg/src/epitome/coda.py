"""Aitchison geometry on the simplex.

Closure, zero replacement, the centered log-ratio transform and the distances
built on it. Nothing in here knows about demographics; the dimension D is
whatever the caller passes in.

All arithmetic is float64.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUM_RTOL = 1e-9
CLR_ATOL = 1e-9
CENTER_TOL = 1e-6


class CodaError(ValueError):
    """Base class for invalid compositional input."""


class NonPositivePart(CodaError):
    pass


class EmptyVector(CodaError):
    pass


class AllZero(CodaError):
    pass


class NotCentered(CodaError):
    pass


class DimensionMismatch(CodaError):
    pass


def _as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise CodaError(f"expected a 1-d vector, got shape {arr.shape}")
    if arr.size < 2:
        raise EmptyVector(f"need at least 2 parts, got {arr.size}")
    return arr


@dataclass(frozen=True, eq=False)
class Composition:
    """A point of the simplex: D >= 2 strictly positive parts summing to ``k``."""

    parts: np.ndarray
    k: float = 1.0

    def __post_init__(self):
        parts = _as_vector(self.parts)
        if not np.all(np.isfinite(parts)) or np.any(parts <= 0):
            raise NonPositivePart("every part must be finite and > 0")
        if not self.k > 0:
            raise CodaError(f"closure constant must be > 0, got {self.k}")
        total = parts.sum()
        if abs(total - self.k) > SUM_RTOL * self.k:
            raise CodaError(f"parts sum to {total!r}, expected {self.k!r}")
        parts = parts.copy()
        parts.flags.writeable = False
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "k", float(self.k))

    @property
    def D(self) -> int:
        return self.parts.size

    @property
    def shares(self) -> np.ndarray:
        """Parts re-closed to 1."""
        return self.parts / self.k

    def __len__(self):
        return self.D

    def __eq__(self, other):
        if not isinstance(other, Composition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.parts, other.parts)

    def __repr__(self):
        return f"Composition({np.array2string(self.parts, precision=4)}, k={self.k:g})"


@dataclass(frozen=True, eq=False)
class ClrVector:
    """Image of a composition under clr; coordinates sum to zero."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _as_vector(self.coords).copy()
        if abs(coords.sum()) > CLR_ATOL * coords.size:
            raise NotCentered(f"clr coordinates sum to {coords.sum()!r}")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def D(self) -> int:
        return self.coords.size


def closure(v, k: float = 1.0) -> Composition:
    """Rescale a positive vector so that its parts sum to ``k``.

    >>> closure([3, 1], k=100).parts
    array([75., 25.])
    """
    arr = _as_vector(v)
    if np.any(arr <= 0):
        raise NonPositivePart(f"closure needs strictly positive parts, got {arr.tolist()}")
    if not k > 0:
        raise CodaError(f"closure constant must be > 0, got {k}")
    parts = k * arr / arr.sum()
    # one correction pass keeps the sum within rounding of k for long vectors
    parts *= k / parts.sum()
    return Composition(parts, k)


def zero_replace(v, delta: float) -> np.ndarray:
    """Multiplicative zero replacement.

    Zeros become ``delta``; every nonzero part is shrunk by the factor
    ``1 - z * delta / sum(v)`` (``z`` = number of zeros), so the total is kept.
    ``delta`` is in the same units as ``v``.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise EmptyVector("zero_replace needs a non-empty 1-d vector")
    if not delta > 0:
        raise CodaError(f"delta must be > 0, got {delta}")
    if np.any(arr < 0):
        raise NonPositivePart("zero_replace needs nonnegative input")
    total = arr.sum()
    if total <= 0:
        raise AllZero("every component is zero")
    zeros = arr == 0
    z = int(zeros.sum())
    if z == 0:
        return arr.copy()
    factor = 1.0 - z * delta / total
    if factor <= 0:
        raise CodaError(f"delta={delta} too large: {z} zeros would consume the whole total {total}")
    return np.where(zeros, delta, arr * factor)


def geometric_mean(x: Composition) -> float:
    return float(np.exp(np.mean(np.log(x.parts))))


def clr(x: Composition) -> ClrVector:
    logs = np.log(x.parts)
    return ClrVector(logs - logs.mean())


def clr_inverse(z: ClrVector | np.ndarray, k: float = 1.0) -> Composition:
    coords = z.coords if isinstance(z, ClrVector) else _as_vector(z)
    if abs(coords.sum()) > CENTER_TOL * coords.size:
        raise NotCentered(f"clr coordinates sum to {coords.sum()!r}")
    # shifting by the max avoids overflow and cancels in the closure
    return closure(np.exp(coords - coords.max()), k)


def _check_same_dim(x: Composition, y: Composition):
    if x.D != y.D:
        raise DimensionMismatch(f"D={x.D} vs D={y.D}")


def aitchison_distance(x: Composition, y: Composition) -> float:
    """Euclidean distance between the clr images of ``x`` and ``y``.

    Shares are used internally, so the closure constants of the two arguments
    may differ.
    """
    _check_same_dim(x, y)
    diff = clr(x).coords - clr(y).coords
    return float(np.sqrt(np.dot(diff, diff)))


def aitchison_distance_logratio(x: Composition, y: Composition) -> float:
    """Same distance via the single log-ratio form, ln(x_d g(y) / (y_d g(x)))."""
    _check_same_dim(x, y)
    xs, ys = x.shares, y.shares
    gx = np.exp(np.mean(np.log(xs)))
    gy = np.exp(np.mean(np.log(ys)))
    r = np.log((xs * gy) / (ys * gx))
    return float(np.sqrt(np.dot(r, r)))


def euclidean_distance(x: Composition, y: Composition) -> float:
    """Plain Euclidean distance between the two compositions as percentages."""
    _check_same_dim(x, y)
    diff = 100.0 * (x.shares - y.shares)
    return float(np.sqrt(np.dot(diff, diff)))


def perturbation(p: Composition, x: Composition) -> Composition:
    """Simplex group operation: componentwise product, closed to ``x.k``."""
    _check_same_dim(p, x)
    return closure(p.shares * x.shares, x.k)


def clr_matrix(compositions) -> np.ndarray:
    """Stack the clr images of many compositions into an (n, D) array."""
    comps = list(compositions)
    if not comps:
        return np.zeros((0, 0))
    D = comps[0].D
    for c in comps:
        if c.D != D:
            raise DimensionMismatch(f"D={D} vs D={c.D}")
    logs = np.log(np.vstack([c.parts for c in comps]))
    return logs - logs.mean(axis=1, keepdims=True)
