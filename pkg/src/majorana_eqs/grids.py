"""Momentum grids, their dual position grids, and the transforms between them.

Everything runs in dimensionless units (hbar = c = 1).  Momentum grids are
exactly symmetric about zero so that every point p has its mirror -p on the
grid; uniform grids use an odd point count to keep p = 0 on-grid.  The dual
position grid is fixed by N * dx * dp = 2*pi, which makes the two discrete
Fourier matrices exact inverses of each other (Parseval holds to round-off).

Two grid flavours are supported:

* ``MomentumGrid.uniform`` -- an evenly spaced grid for wave packets, with
  trapezoidal quadrature weights.
* ``MomentumGrid.modes`` -- a finite symmetric set of discrete plane-wave
  modes with unit (counting) weights, used for plane-wave scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["MomentumGrid", "SpatialGrid", "same_grid"]


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Uniform position grid dual to a uniform momentum grid."""

    points: np.ndarray
    weights: np.ndarray
    dx: float

    @property
    def n(self) -> int:
        return self.points.size


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Symmetric set of momentum points with quadrature weights.

    ``points`` is sorted ascending and exactly antisymmetric:
    ``points[::-1] == -points``.  ``weights`` are trapezoidal for uniform
    grids and 1 for discrete mode sets.
    """

    points: np.ndarray
    weights: np.ndarray
    is_uniform: bool
    p_max: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("momentum grid needs a 1d, non-empty point set")
        if not np.array_equal(pts, np.sort(pts)):
            raise ValueError("momentum points must be sorted ascending")
        if not np.allclose(pts, -pts[::-1], atol=1e-12):
            raise ValueError("momentum grid must contain -p for every p")
        if np.any(np.asarray(self.weights) <= 0):
            raise ValueError("quadrature weights must be positive")

    @classmethod
    def uniform(cls, p_max: float = 4.0, n: int = 65) -> "MomentumGrid":
        """Evenly spaced grid on [-p_max, p_max] with odd point count."""
        if p_max <= 0:
            raise ValueError("p_max must be positive")
        if n < 3 or n % 2 == 0:
            raise ValueError("uniform grids need an odd point count >= 3")
        dp = 2.0 * p_max / (n - 1)
        idx = np.arange(n) - (n - 1) // 2
        points = idx * dp  # exactly antisymmetric, p = 0 on-grid
        weights = np.full(n, dp)
        weights[0] = weights[-1] = dp / 2.0
        return cls(points=points, weights=weights, is_uniform=True, p_max=float(p_max))

    @classmethod
    def modes(cls, values) -> "MomentumGrid":
        """Discrete symmetric set of plane-wave modes with unit weights."""
        vals = np.unique(np.asarray(values, dtype=float))
        if not np.allclose(vals, -vals[::-1], atol=1e-12):
            raise ValueError("mode set must contain -p for every p")
        vals = (vals - vals[::-1]) / 2.0  # enforce exact antisymmetry
        return cls(points=vals, weights=np.ones(vals.size), is_uniform=False,
                   p_max=float(np.max(np.abs(vals))) if vals.size else 0.0)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def dp(self) -> float:
        if not self.is_uniform:
            raise ValueError("dp is only defined for uniform grids")
        return 2.0 * self.p_max / (self.n - 1)

    @property
    def neg_index(self) -> np.ndarray:
        """Permutation i -> j with points[j] == -points[i] (index reversal)."""
        return np.arange(self.n)[::-1]

    @property
    def spatial(self) -> SpatialGrid:
        """The Fourier-dual position grid (uniform grids only)."""
        if not self.is_uniform:
            raise ValueError("mode grids have no position-space dual")
        x, _, _ = _dft_matrices(self.n, self.p_max)
        dx = x[1] - x[0]
        wx = np.full(self.n, dx)
        wx[0] = wx[-1] = dx / 2.0
        return SpatialGrid(points=x, weights=wx, dx=dx)

    def to_position(self, f_p: np.ndarray) -> np.ndarray:
        """Transform momentum-space data (leading axis = grid) to position."""
        _, _, f_inv = _dft_matrices(self.n, self.p_max)
        return f_inv @ f_p

    def to_momentum(self, f_x: np.ndarray) -> np.ndarray:
        """Transform position-space data (leading axis = grid) to momentum."""
        _, f_fwd, _ = _dft_matrices(self.n, self.p_max)
        return f_fwd @ f_x


@lru_cache(maxsize=32)
def _dft_matrices(n: int, p_max: float):
    """Position grid and the exact forward/inverse DFT matrices.

    Forward:  phi(p_k) = sum_j psi(x_j) exp(-i p_k x_j) dx / sqrt(2 pi)
    Inverse:  psi(x_j) = sum_k phi(p_k) exp(+i p_k x_j) dp / sqrt(2 pi)

    With N dx dp = 2 pi the two matrices are exact matrix inverses.
    """
    dp = 2.0 * p_max / (n - 1)
    dx = 2.0 * np.pi / (n * dp)
    idx = np.arange(n) - (n - 1) // 2
    x = idx * dx
    p = idx * dp
    phase = np.outer(p, x)
    f_fwd = np.exp(-1j * phase) * dx / np.sqrt(2.0 * np.pi)
    f_inv = np.exp(1j * phase).T * dp / np.sqrt(2.0 * np.pi)
    return x, f_fwd, f_inv


def same_grid(a: MomentumGrid, b: MomentumGrid) -> bool:
    return a is b or (a.n == b.n and np.array_equal(a.points, b.points))
