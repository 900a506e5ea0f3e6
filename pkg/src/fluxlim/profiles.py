"""Initial-condition constructors: bumps, normalized spikes, uniform fields."""

from __future__ import annotations

import numpy as np

from .grid import Field, Grid, integrate

__all__ = ["gaussian_bump", "poly_spike", "uniform_field"]


def _squared_distance(grid: Grid, center) -> np.ndarray:
    cc = np.atleast_1d(np.asarray(center, dtype=float))
    if cc.shape != (grid.dim,):
        raise ValueError(f"center {center!r} does not match grid dimension {grid.dim}")
    r2 = np.zeros(grid.shape)
    for k, ax in enumerate(grid.centers()):
        r2 = r2 + (ax - cc[k]) ** 2
    return r2


def gaussian_bump(grid: Grid, width: float, center=None, mass: float | None = None,
                  amplitude: float | None = None) -> Field:
    """Gaussian exp(-r^2 / (2 width^2)), strictly positive on the whole box.

    Exactly one of ``mass`` (discrete integral) or ``amplitude`` fixes the
    scale; ``mass`` is matched by discrete rescaling.
    """
    if width <= 0.0:
        raise ValueError("width must be positive")
    if (mass is None) == (amplitude is None):
        raise ValueError("give exactly one of mass or amplitude")
    center = np.zeros(grid.dim) if center is None else center
    vals = np.exp(-_squared_distance(grid, center) / (2.0 * width * width))
    if amplitude is not None:
        return Field.density(grid, amplitude * vals)
    f = Field.density(grid, vals)
    return Field.density(grid, vals * (mass / integrate(f)))


def poly_spike(grid: Grid, width: float, p: float, center=None, p_norm: float = 1.0) -> Field:
    """Compactly supported bump (1 - (r/width)^2)_+^2 normalized in Lp.

    The support is exact, so no box-truncation bias enters the
    normalization: the discrete Lp norm equals ``p_norm`` to roundoff.
    """
    if width <= 0.0:
        raise ValueError("width must be positive")
    if p < 1.0:
        raise ValueError("p must be >= 1")
    center = np.zeros(grid.dim) if center is None else center
    z = 1.0 - _squared_distance(grid, center) / (width * width)
    vals = np.where(z > 0.0, z, 0.0) ** 2
    norm = float(np.sum(vals**p) * grid.cell_volume) ** (1.0 / p)
    if norm <= 0.0:
        raise ValueError("spike support contains no cell centers; widen it or refine the grid")
    return Field.density(grid, vals * (p_norm / norm))


def uniform_field(grid: Grid, value: float) -> Field:
    """Constant field; handy for mass-law and fixed-point checks."""
    if value < 0.0:
        raise ValueError("value must be nonnegative")
    return Field.density(grid, np.full(grid.shape, float(value)))
