"""Constellations, normalization, rank reduction and complex embedding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

__all__ = [
    "Constellation",
    "ConstellationError",
    "ReducedConstellation",
    "complex_embed",
    "cube",
    "energy_normalize",
    "min_distance",
    "new_constellation",
    "psk",
    "qam3d",
    "reduce",
    "square_qam",
]

# Relative tolerance for declaring two symbols identical.
DUPLICATE_TOL = 1e-12
PRIOR_SUM_TOL = 1e-12


class ConstellationError(ValueError):
    """Raised for malformed constellation input."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Constellation:
    """Signal points stored column-wise with their prior probabilities.

    Attributes
    ----------
    points : ndarray, shape (N, M)
        One column per symbol.
    priors : ndarray, shape (M,)
        Probability of transmitting each symbol.
    label : str
        Free-form name used in reports.
    """

    points: np.ndarray
    priors: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        if pts.ndim != 2:
            raise ConstellationError("points must be a 2-D matrix (dimension x symbols)")
        if not np.all(np.isfinite(pts)):
            raise ConstellationError("points must be finite")
        n, m = pts.shape
        if m < 2:
            raise ConstellationError("a constellation needs at least two symbols")
        if n < 1:
            raise ConstellationError("points must have at least one row")
        scale = float(np.max(np.abs(pts))) or 1.0
        d = pdist(pts.T)
        if np.any(d <= DUPLICATE_TOL * scale):
            raise ConstellationError("duplicate symbol: two columns coincide")
        pri = np.asarray(self.priors, dtype=float).reshape(-1)
        if pri.shape != (m,):
            raise ConstellationError(f"priors must have length {m}, got {pri.size}")
        if np.any(~np.isfinite(pri)) or np.any(pri < 0):
            raise ConstellationError("priors must be nonnegative")
        if abs(pri.sum() - 1.0) > PRIOR_SUM_TOL:
            raise ConstellationError(f"priors must sum to 1 (got {pri.sum():.15g})")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "priors", _frozen(pri))

    @property
    def dim(self) -> int:
        """Ambient dimension N."""
        return self.points.shape[0]

    @property
    def size(self) -> int:
        """Number of symbols M."""
        return self.points.shape[1]

    def with_points(self, points: np.ndarray, label: str | None = None) -> Constellation:
        return Constellation(points, self.priors, self.label if label is None else label)


@dataclass(frozen=True)
class ReducedConstellation:
    """Distance-preserving re-expression of a constellation in its span.

    ``points`` holds the first ``reduced_dim`` rows of ``diag(s) @ Vt`` from
    the SVD of the source matrix.
    """

    points: np.ndarray
    reduced_dim: int
    rotation: np.ndarray
    singular_values: np.ndarray
    priors: np.ndarray = field(default=None)  # type: ignore[assignment]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _frozen(self.points))
        object.__setattr__(self, "rotation", _frozen(self.rotation))
        object.__setattr__(self, "singular_values", _frozen(self.singular_values))
        m = self.points.shape[1]
        pri = np.full(m, 1.0 / m) if self.priors is None else self.priors
        object.__setattr__(self, "priors", _frozen(pri))

    @property
    def size(self) -> int:
        return self.points.shape[1]

    def as_constellation(self) -> Constellation:
        return Constellation(self.points, self.priors, self.label)


def new_constellation(points, priors=None, label: str = "") -> Constellation:
    """Validate ``points`` (N x M) and ``priors`` into a :class:`Constellation`.

    Priors default to uniform.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise ConstellationError("points must be a 2-D matrix (dimension x symbols)")
    m = pts.shape[1]
    if priors is None:
        priors = np.full(m, 1.0 / max(m, 1))
    return Constellation(pts, np.asarray(priors, dtype=float), label)


def energy_normalize(c: Constellation) -> Constellation:
    """Scale all points by one factor so that the mean symbol energy is 1.

    The mean is the unweighted average over symbols.
    """
    energy = float(np.mean(np.sum(c.points**2, axis=0)))
    if energy == 0.0:
        raise ConstellationError("cannot normalize an all-zero constellation")
    return c.with_points(c.points / np.sqrt(energy))


def min_distance(c: Constellation | ReducedConstellation | np.ndarray) -> float:
    """Smallest pairwise Euclidean distance between symbols."""
    pts = c if isinstance(c, np.ndarray) else c.points
    return float(np.min(pdist(np.asarray(pts, dtype=float).T)))


def max_norm(c: Constellation | ReducedConstellation | np.ndarray) -> float:
    pts = c if isinstance(c, np.ndarray) else c.points
    return float(np.max(np.linalg.norm(pts, axis=0)))


def reduce(c: Constellation | ReducedConstellation, rank_tol: float | None = None) -> ReducedConstellation:
    """Project a constellation onto its span via the SVD.

    Parameters
    ----------
    c : Constellation or ReducedConstellation
    rank_tol : float, optional
        Singular values above this count toward the reduced dimension.
        Default is ``max(N, M) * eps * sigma_max``.

    Returns
    -------
    ReducedConstellation
        Points are the leading ``N*`` rows of ``diag(s) @ Vt``, so pairwise
        distances are preserved.
    """
    pts = np.asarray(c.points, dtype=float)
    n, m = pts.shape
    u, s, vt = np.linalg.svd(pts, full_matrices=True)
    if rank_tol is None:
        rank_tol = max(n, m) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    elif rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    rank = int(np.sum(s > rank_tol))
    reduced = s[:rank, None] * vt[:rank, :]
    return ReducedConstellation(
        points=reduced,
        reduced_dim=rank,
        rotation=u,
        singular_values=s,
        priors=np.asarray(c.priors, dtype=float),
        label=getattr(c, "label", ""),
    )


def complex_embed(points, priors=None, label: str = "") -> Constellation:
    """Stack real and imaginary parts of complex points (N x M) into 2N x M."""
    z = np.asarray(points, dtype=complex)
    if z.ndim == 1:
        z = z[None, :]
    return new_constellation(np.vstack([z.real, z.imag]), priors, label)


def square_qam(m: int, normalize: bool = True) -> Constellation:
    """Square M-QAM on the odd-integer grid, energy-normalized by default."""
    k = int(round(np.sqrt(m)))
    if k * k != m or k < 2:
        raise ConstellationError(f"M={m} is not a square >= 4")
    levels = np.arange(-(k - 1), k, 2, dtype=float)
    x, y = np.meshgrid(levels, levels, indexing="ij")
    c = new_constellation(np.vstack([x.ravel(), y.ravel()]), label=f"{m}-QAM")
    return energy_normalize(c) if normalize else c


def psk(m: int, phase: float = 0.0) -> Constellation:
    """Unit-energy M-PSK in two real dimensions."""
    ang = phase + 2 * np.pi * np.arange(m) / m
    return new_constellation(np.vstack([np.cos(ang), np.sin(ang)]), label=f"{m}-PSK")


def cube(half_side: float = 1.0) -> Constellation:
    """Vertices of the cube ``{-h, +h}^3``."""
    v = np.array(np.meshgrid([-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], indexing="ij"))
    return new_constellation(half_side * v.reshape(3, -1), label="cube")


def qam3d() -> Constellation:
    """Sixteen-point 3-D constellation made of two nested cubes.

    Inner cube at ``(±1/√6)^3`` and outer cube at ``(±1/√2)^3``; the mean
    energy is 1.
    """
    inner = cube(1 / np.sqrt(6)).points
    outer = cube(1 / np.sqrt(2)).points
    return new_constellation(np.hstack([inner, outer]), label="3-D square QAM")
