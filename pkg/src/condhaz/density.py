"""Projection estimation of the reference density f and its lower bound.

The density of the measure driving the empirical inner product is
``f(x, z) = E(Y(z) | X = x) f_X(x)``; its projection coefficients have the
closed form ``b[j,k] = (1/n) sum_i phi_j(x_i) int_0^{R_i} psi_k`` with no
linear solve.  Only a rough lower bound f0 is needed by the estimator
guard, obtained as the floored infimum of a small trigonometric fit over
a uniform grid of cell midpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bases import TRIGONOMETRIC, basis_of_dimension
from .models import ModelIndex, direction_cap
from .estimator import UnitSample

F0_FLOOR = 1e-3


@dataclass
class DensityFit:
    model: ModelIndex
    coefficients: np.ndarray  # (D1, D2)
    f0_hat: float | None = None
    grid_resolution: int | None = None


def density_coefficients(model: ModelIndex, sample: UnitSample) -> np.ndarray:
    """Projection coefficients of the reference density; shape (D1, D2)."""
    bx = basis_of_dimension(model.kind_x, model.m1_dim)
    bz = basis_of_dimension(model.kind_z, model.m2_dim)
    phi = bx.design_matrix(sample.x)  # (n, D1)
    psi_int = bz.prefix_integrals(sample.risk_end)  # (n, D2)
    return phi.T @ psi_int / sample.n


def fit_density(model: ModelIndex, sample: UnitSample) -> DensityFit:
    return DensityFit(model, density_coefficients(model, sample))


def density_eval(fit: DensityFit, x, z) -> np.ndarray:
    """Evaluate the fitted density surface at points (x, z)."""
    bx = basis_of_dimension(fit.model.kind_x, fit.model.m1_dim)
    bz = basis_of_dimension(fit.model.kind_z, fit.model.m2_dim)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return np.einsum("ij,jk,ik->i", bx.design_matrix(x), fit.coefficients, bz.design_matrix(z))


def _f0_model_dims(n: int):
    cap = direction_cap(TRIGONOMETRIC, n)
    d1 = 1
    while d1 < math.ceil(math.log(n)):
        d1 *= 2
    return min(d1, cap), cap


def f0_density_fit(sample: UnitSample, grid_resolution: int = 200) -> DensityFit:
    """Trigonometric density fit used for the lower-bound estimate.

    The covariate dimension is the smallest dyadic value at or above
    log(n), clamped to the trigonometric cap; the time direction takes the
    cap itself.  The reported f0 is the grid infimum over cell midpoints,
    floored away from zero so the guard threshold stays positive.
    """
    if sample.n < 8:
        raise ValueError("need n >= 8 to estimate f0")
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be >= 1")
    d1, d2 = _f0_model_dims(sample.n)
    model = ModelIndex(d1, d2, TRIGONOMETRIC, TRIGONOMETRIC)
    fit = fit_density(model, sample)
    mid = (np.arange(grid_resolution) + 0.5) / grid_resolution
    bx = basis_of_dimension(TRIGONOMETRIC, d1)
    bz = basis_of_dimension(TRIGONOMETRIC, d2)
    surface = bx.design_matrix(mid) @ fit.coefficients @ bz.design_matrix(mid).T
    fit.f0_hat = max(float(surface.min()), F0_FLOOR)
    fit.grid_resolution = grid_resolution
    return fit


def estimate_f0(sample: UnitSample, grid_resolution: int = 200) -> float:
    """Floored grid infimum of the trigonometric density fit."""
    return f0_density_fit(sample, grid_resolution).f0_hat
