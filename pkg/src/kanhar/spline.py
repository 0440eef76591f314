"""Uniform-knot B-spline bases (Cox-de Boor) and their derivatives.

All functions accept a scalar or an array of points and return an array whose
last axis indexes the ``grid_size + order`` basis functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SplineGrid:
    """Uniform knot layout with ``order`` extra knots on each side of the domain."""

    grid_size: int = 5
    order: int = 3
    range_lo: float = -2.0
    range_hi: float = 2.0
    knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.grid_size) != self.grid_size or self.grid_size < 1:
            raise ValueError(f"grid_size must be a positive integer, got {self.grid_size}")
        if int(self.order) != self.order or self.order < 0:
            raise ValueError(f"order must be a non-negative integer, got {self.order}")
        if not (np.isfinite(self.range_lo) and np.isfinite(self.range_hi)):
            raise ValueError("grid range must be finite")
        if not self.range_lo < self.range_hi:
            raise ValueError(f"need range_lo < range_hi, got [{self.range_lo}, {self.range_hi}]")
        h = (self.range_hi - self.range_lo) / self.grid_size
        inner = np.linspace(self.range_lo, self.range_hi, self.grid_size + 1)
        ext = h * np.arange(1, self.order + 1)
        knots = np.concatenate([self.range_lo - ext[::-1], inner, self.range_hi + ext])
        if not np.all(np.diff(knots) > 0):
            raise ValueError("knots are not strictly increasing")
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)

    @property
    def n_basis(self) -> int:
        return self.grid_size + self.order

    @property
    def spacing(self) -> float:
        return (self.range_hi - self.range_lo) / self.grid_size

    def clamp(self, x):
        return np.clip(x, self.range_lo, self.range_hi)


def _degree_zero(grid: SplineGrid, x: np.ndarray) -> np.ndarray:
    t = grid.knots
    # Span index restricted to the active domain so x == range_hi lands in the last interval.
    span = np.searchsorted(t, x, side="right") - 1
    span = np.clip(span, grid.order, grid.order + grid.grid_size - 1)
    n_intervals = len(t) - 1
    out = np.zeros(x.shape + (n_intervals,))
    np.put_along_axis(out, span[..., None], 1.0, axis=-1)
    return out


def _raise_degree(grid: SplineGrid, x: np.ndarray, bases: np.ndarray, k: int) -> np.ndarray:
    """One Cox-de Boor step: degree k-1 bases -> degree k bases."""
    t = grid.knots
    xe = x[..., None]
    m = bases.shape[-1] - 1
    left = (xe - t[:m]) / (t[k : k + m] - t[:m])
    right = (t[k + 1 : k + 1 + m] - xe) / (t[k + 1 : k + 1 + m] - t[1 : 1 + m])
    return left * bases[..., :-1] + right * bases[..., 1:]


def _bases_up_to(grid: SplineGrid, x: np.ndarray, degree: int) -> np.ndarray:
    bases = _degree_zero(grid, x)
    for k in range(1, degree + 1):
        bases = _raise_degree(grid, x, bases, k)
    return bases


def basis_values(grid: SplineGrid, x) -> np.ndarray:
    """B_1(x), ..., B_{G+K}(x) with x clamped to the grid domain."""
    x = grid.clamp(np.asarray(x, dtype=np.float64))
    return _bases_up_to(grid, x, grid.order)


def basis_derivatives(grid: SplineGrid, x) -> np.ndarray:
    """dB_i/dx of the clamped basis; zero outside the grid domain."""
    x = np.asarray(x, dtype=np.float64)
    k = grid.order
    if k == 0:
        return np.zeros(x.shape + (grid.n_basis,))
    xc = grid.clamp(x)
    lower = _bases_up_to(grid, xc, k - 1)
    t = grid.knots
    n = grid.n_basis
    a = k / (t[k : k + n] - t[:n])
    b = k / (t[k + 1 : k + 1 + n] - t[1 : 1 + n])
    deriv = a * lower[..., :-1] - b * lower[..., 1:]
    outside = (x < grid.range_lo) | (x > grid.range_hi)
    return np.where(outside[..., None], 0.0, deriv)


def spline_eval(grid: SplineGrid, coefficients, x):
    """Sum of coefficient-weighted basis functions."""
    c = np.asarray(coefficients, dtype=np.float64)
    if c.shape[-1] != grid.n_basis:
        raise ValueError(f"expected {grid.n_basis} coefficients, got {c.shape[-1]}")
    return basis_values(grid, x) @ c
