"""Pointwise flux-limited diffusion coefficient and its monotonicity probes.

The flux is (1 - chi*rho/|grad|)_+ * grad plus an optional viscous part
eps*grad. The positive part kills the flux wherever |grad| <= chi*rho, which
is what makes the underlying vector map monotone; removing the clamp breaks
monotonicity, and ``unclamped_gap`` exists only to demonstrate that.

Conventions: the coefficient is exactly 0.0 (bitwise) on the clamped set,
including |grad| = 0, so degenerate regions freeze and vacuum stays vacuum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Params",
    "limiter",
    "face_flux",
    "monotone_gap",
    "unclamped_gap",
    "flux_deviation",
]


@dataclass(frozen=True)
class Params:
    """Physical and regularization constants.

    chi is the sensitivity in the limiter threshold; eps the viscosity of the
    regularized equation. chi = 0 is allowed as a pure-heat control mode
    (the limiter is then identically 1 away from flat faces).
    """

    chi: float
    eps: float = 0.0
    limiter_floor: float = 0.0  # value taken at |grad| = 0; fixed convention

    def __post_init__(self) -> None:
        if not (np.isfinite(self.chi) and self.chi >= 0.0):
            raise ValueError(f"chi must be finite and >= 0, got {self.chi}")
        if not (np.isfinite(self.eps) and self.eps >= 0.0):
            raise ValueError(f"eps must be finite and >= 0, got {self.eps}")
        if self.limiter_floor != 0.0:
            raise ValueError("the limiter value at zero gradient is fixed to 0")


def limiter(rho, grad_norm, chi: float):
    """Diffusion coefficient (1 - chi*rho/grad_norm)_+ in [0, 1].

    Returns exactly 0.0 wherever grad_norm <= chi*rho (including
    grad_norm = 0), and a value < 1 whenever rho > 0.
    Accepts scalars or broadcastable arrays.
    """
    r = np.asarray(rho, dtype=float)
    g = np.asarray(grad_norm, dtype=float)
    thresh = chi * r
    out = np.zeros(np.broadcast_shapes(r.shape, g.shape))
    active = g > thresh
    if out.ndim == 0:
        if active:
            return 1.0 - float(thresh) / float(g)
        return 0.0
    tb = np.broadcast_to(thresh, out.shape)
    gb = np.broadcast_to(g, out.shape)
    out[active] = 1.0 - tb[active] / gb[active]
    return out


def face_flux(rho_face, grad_vec, params: Params) -> np.ndarray:
    """Flux vector (limiter(rho, |grad|) + eps) * grad at one or more faces.

    ``grad_vec`` carries the components along its last axis; ``rho_face`` is
    the arithmetic mean of the two adjacent cell densities.
    """
    gvec = np.asarray(grad_vec, dtype=float)
    gnorm = np.linalg.norm(gvec, axis=-1)
    coeff = limiter(rho_face, gnorm, params.chi) + params.eps
    return np.asarray(coeff)[..., None] * gvec


def _clamped_map(v: np.ndarray, c: float) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    coeff = np.zeros_like(n)
    active = n > c
    coeff[active] = 1.0 - c / n[active]
    return coeff * v


def _unclamped_map(v: np.ndarray, c: float) -> np.ndarray:
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(n > 0.0, n, 1.0)
    coeff = np.where(n > 0.0, 1.0 - c / safe, 0.0)
    return coeff * v


def monotone_gap(w, z, c: float):
    """[F(w) - F(z)] . (w - z) for the clamped map F(v) = (1 - c/|v|)_+ v.

    Mathematically >= 0 for every pair; F(0) = 0 by the limiter convention.
    Inputs carry vector components along the last axis; batches broadcast.
    """
    wv = np.atleast_2d(np.asarray(w, dtype=float))
    zv = np.atleast_2d(np.asarray(z, dtype=float))
    gap = np.sum((_clamped_map(wv, c) - _clamped_map(zv, c)) * (wv - zv), axis=-1)
    return float(gap[0]) if np.asarray(w, dtype=float).ndim <= 1 else gap


def unclamped_gap(w, z, c: float):
    """Same pairing for the non-clamped map (1 - c/|v|) v; can be negative.

    Counterexample: c = 1, w = (0.5, 0), z = (-0.25, 0) gives -0.9375.
    Kept out of the solver; only the monotonicity study calls it.
    """
    wv = np.atleast_2d(np.asarray(w, dtype=float))
    zv = np.atleast_2d(np.asarray(z, dtype=float))
    gap = np.sum((_unclamped_map(wv, c) - _unclamped_map(zv, c)) * (wv - zv), axis=-1)
    return float(gap[0]) if np.asarray(w, dtype=float).ndim <= 1 else gap


def flux_deviation(rho, grad_vec, chi: float):
    """|limiter * grad - grad|: how far the limited flux sits from pure diffusion.

    Bounded by chi*rho: equal to chi*rho where the limiter is active, and to
    |grad| <= chi*rho where it is clamped.
    """
    gvec = np.asarray(grad_vec, dtype=float)
    gnorm = np.linalg.norm(gvec, axis=-1)
    coeff = limiter(rho, gnorm, chi)
    dev = (1.0 - np.asarray(coeff)) * gnorm
    return float(dev) if dev.ndim == 0 else dev
