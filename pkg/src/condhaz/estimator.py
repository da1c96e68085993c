"""Guarded least-squares intensity estimation with penalized model selection.

The observation unit is a sample on the unit square: covariates x_i, the
jump times of each counting process and the end R_i of each at-risk
interval [0, R_i].  Per model the normal equations are G a = Upsilon with

    G[(j,k),(l,p)] = (1/n) sum_i phi_j(x_i) phi_l(x_i) int_0^{R_i} psi_k psi_p,
    Upsilon[(j,k)] = (1/n) sum_i phi_j(x_i) sum_{t in jumps_i} psi_k(t),

solved only when the smallest eigenvalue of G clears the guard threshold
``max(f0_hat / 3, n^{-1/2})``; otherwise the estimator is identically zero.
Selection minimizes contrast + penalty over the collection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .bases import HISTOGRAM, Basis1D, basis_of_dimension
from .models import ModelCollection, ModelIndex


class NumericalBreakdownError(RuntimeError):
    """Linear solve failed although the eigenvalue guard passed."""


@dataclass
class UnitSample:
    """n individuals rescaled to the unit square.

    ``jumps[i]`` holds the sorted event times of individual i in (0, 1];
    ``risk_end[i]`` is R_i, so the at-risk indicator is 1(z <= R_i).
    Individuals are stored in a canonical order (sorted by covariate,
    then risk end, then jumps) so that every assembled quantity is exactly
    invariant under permutations of the input.
    """

    x: np.ndarray
    jumps: tuple
    risk_end: np.ndarray
    rescale_factor: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        risk = np.asarray(self.risk_end, dtype=float)
        jumps = [np.asarray(j, dtype=float) for j in self.jumps]
        if not (x.size == risk.size == len(jumps)):
            raise ValueError("x, jumps and risk_end must have equal length")
        if x.size == 0:
            raise ValueError("empty sample")
        if np.any((x < 0) | (x > 1)) or np.any((risk < 0) | (risk > 1)):
            raise ValueError("covariates and risk ends must lie in [0, 1]")
        for j, r in zip(jumps, risk):
            if j.size and (np.any(np.diff(j) < 0) or j[0] <= 0 or j[-1] > r + 1e-12):
                raise ValueError("jump times must be sorted, in (0, 1] and <= risk_end")
        if self.rescale_factor <= 0:
            raise ValueError("rescale_factor must be positive")
        first = np.array([j[0] if j.size else np.inf for j in jumps])
        njump = np.array([j.size for j in jumps])
        order = np.lexsort((first, njump, risk, x))
        self.x = x[order]
        self.risk_end = risk[order]
        self.jumps = tuple(jumps[i] for i in order)
        self._flat = None

    @property
    def n(self) -> int:
        return self.x.size

    def flat_jumps(self):
        """All jump times concatenated, with their owner indices."""
        if self._flat is None:
            owners = np.repeat(np.arange(self.n), [j.size for j in self.jumps])
            times = (
                np.concatenate(self.jumps) if owners.size else np.empty(0, dtype=float)
            )
            self._flat = (times, owners)
        return self._flat


def rescale_sample(x, times, delta, quantile_level: float = 0.95) -> UnitSample:
    """Map raw censored-regression data onto the unit square.

    The rescale factor is the nearest-rank empirical quantile of the
    observed times; individuals whose rescaled time exceeds 1 stay at risk
    on all of [0, 1] with their event dropped.
    """
    x = np.asarray(x, dtype=float)
    times = np.asarray(times, dtype=float)
    delta = np.asarray(delta, dtype=int)
    if not 0 < quantile_level <= 1:
        raise ValueError("quantile_level must be in (0, 1]")
    if times.size == 0:
        raise ValueError("empty sample")
    rank = math.ceil(quantile_level * times.size)
    tau = float(np.sort(times)[rank - 1])
    if tau <= 0:
        raise ValueError("all observed times are zero; cannot rescale")
    z = times / tau
    risk = np.minimum(z, 1.0)
    jumps = tuple(
        np.array([zi]) if (d == 1 and zi <= 1.0) else np.empty(0)
        for zi, d in zip(z, delta)
    )
    return UnitSample(x=x, jumps=jumps, risk_end=risk, rescale_factor=tau)


def cox_unit_sample(x, jumps) -> UnitSample:
    """Sample from processes observed on [0, 1] with everyone at risk."""
    x = np.asarray(x, dtype=float)
    return UnitSample(
        x=x,
        jumps=tuple(np.asarray(j, dtype=float) for j in jumps),
        risk_end=np.ones(x.size),
        rescale_factor=1.0,
    )


@dataclass
class GramSystem:
    model: ModelIndex
    gram: np.ndarray
    upsilon: np.ndarray | None
    min_eigenvalue: float


@dataclass
class FittedModel:
    model: ModelIndex
    coefficients: np.ndarray  # (D1, D2); all zero when the guard fails
    guard_passed: bool
    contrast: float
    penalty: float = 0.0

    @property
    def criterion(self) -> float:
        return self.contrast + self.penalty


@dataclass
class AdaptiveFit:
    selected: ModelIndex
    fit: FittedModel
    all_criteria: tuple  # FittedModel per model, in collection order
    sup_plugin: float
    f0_hat: float
    rescale_factor: float


def _bases_for(model: ModelIndex):
    return (
        basis_of_dimension(model.kind_x, model.m1_dim),
        basis_of_dimension(model.kind_z, model.m2_dim),
    )


def _assemble(model: ModelIndex, sample: UnitSample, basis_x=None, basis_z=None):
    """Return (G, Upsilon) for one model; exact up to float rounding."""
    bx = basis_x or basis_of_dimension(model.kind_x, model.m1_dim)
    bz = basis_z or basis_of_dimension(model.kind_z, model.m2_dim)
    n = sample.n
    phi = bx.design_matrix(sample.x)  # (n, D1)
    psi_pref = bz.prefix_pair_integrals(sample.risk_end)  # (n, D2, D2)
    d1, d2 = bx.dimension, bz.dimension
    # G[(j,k),(l,p)] = sum_i phi[i,j] phi[i,l] psi_pref[i,k,p] / n
    w = phi[:, :, None] * phi[:, None, :]  # (n, D1, D1)
    g4 = np.tensordot(w.reshape(n, -1), psi_pref.reshape(n, -1), axes=(0, 0)) / n
    g4 = g4.reshape(d1, d1, d2, d2).transpose(0, 2, 1, 3)
    gram = g4.reshape(d1 * d2, d1 * d2)
    times, owners = sample.flat_jumps()
    psi_jumps = bz.design_matrix(times) if times.size else np.zeros((0, d2))
    upsilon = (phi[owners].T @ psi_jumps / n).reshape(-1) if times.size else np.zeros(d1 * d2)
    return gram, upsilon


def gram_matrix(model: ModelIndex, sample: UnitSample) -> GramSystem:
    """The Gram matrix of the empirical inner product, with its smallest eigenvalue."""
    gram, _ = _assemble(model, sample)
    min_eig = float(np.linalg.eigvalsh(gram)[0])
    return GramSystem(model, gram, None, min_eig)


def response_vector(model: ModelIndex, sample: UnitSample) -> np.ndarray:
    _, upsilon = _assemble(model, sample)
    return upsilon


def guard_threshold(f0_hat: float, n: int) -> float:
    return max(f0_hat / 3.0, n**-0.5)


def fit_model(
    model: ModelIndex,
    sample: UnitSample,
    f0_hat: float,
    *,
    basis_x=None,
    basis_z=None,
) -> FittedModel:
    """Least-squares fit on one model, or the zero estimator off the guard set."""
    if f0_hat <= 0:
        raise ValueError("f0_hat must be positive")
    gram, upsilon = _assemble(model, sample, basis_x, basis_z)
    min_eig = float(np.linalg.eigvalsh(gram)[0])
    d1, d2 = model.m1_dim, model.m2_dim
    if min_eig < guard_threshold(f0_hat, sample.n):
        return FittedModel(model, np.zeros((d1, d2)), False, 0.0)
    try:
        c, low = scipy.linalg.cho_factor(gram)
        coef = scipy.linalg.cho_solve((c, low), upsilon)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - guard should prevent this
        raise NumericalBreakdownError(
            f"solve failed for model {d1}x{d2} despite min eigenvalue {min_eig:.3e}"
        ) from exc
    # at the minimizer, gamma_n = a' G a - 2 a' Upsilon = -a' Upsilon
    contrast = -float(coef @ upsilon)
    return FittedModel(model, coef.reshape(d1, d2), True, contrast)


def penalty(model: ModelIndex, sup_plugin: float, k0: float, n: int, form: str) -> float:
    """Dimension-proportional penalty, theorem or practical flavor."""
    if sup_plugin < 0 or k0 <= 0:
        raise ValueError("sup_plugin must be >= 0 and k0 > 0")
    if form == "theorem":
        return k0 * (1.0 + sup_plugin) * model.product_dim / n
    if form == "practical":
        return k0 * sup_plugin * model.product_dim / n
    raise ValueError(f"unknown penalty form {form!r}")


def _plugin_pairs(n: int):
    """Dyadic histogram dimension pairs with product <= sqrt(n), largest first."""
    root = math.sqrt(n)
    prod = 1
    while prod * 2 <= root:
        prod *= 2
    pairs = []
    p = prod
    while p >= 1:
        k = int(math.log2(p))
        for half in range(k // 2, -1, -1):
            d1 = 2**half
            pairs.append((d1, p // d1))
        p //= 2
    return pairs


def sup_norm_plugin(
    sample: UnitSample, collection: ModelCollection, f0_hat: float = 1.0
) -> float:
    """Plug-in estimate of the sup norm: the largest histogram coefficient.

    Fitted on the largest dyadic histogram space with product dimension at
    most sqrt(n), walking down to the largest space whose guard passes;
    1.0 if none does.  Floored at zero.
    """
    if len(collection) == 0:
        raise ValueError("empty model collection")
    for d1, d2 in _plugin_pairs(sample.n):
        model = ModelIndex(d1, d2, HISTOGRAM, HISTOGRAM)
        fitted = fit_model(model, sample, f0_hat)
        if fitted.guard_passed:
            return max(0.0, float(fitted.coefficients.max()))
    return 1.0


@dataclass
class SelectionConfig:
    k0: float = 5.0
    penalty_form: str = "practical"
    f0_hat: float | None = None
    sup_plugin: float | None = None


def select_model(
    sample: UnitSample, collection: ModelCollection, config: SelectionConfig
) -> AdaptiveFit:
    """Fit every model and select by penalized contrast.

    Ties are broken toward the smaller product dimension, then the smaller
    covariate dimension.
    """
    if len(collection) == 0:
        raise ValueError("empty model collection")
    f0_hat = config.f0_hat
    if f0_hat is None:
        from .density import estimate_f0

        f0_hat = estimate_f0(sample)
    sup_plugin = config.sup_plugin
    if sup_plugin is None:
        sup_plugin = sup_norm_plugin(sample, collection, f0_hat)
    basis_x_cache = {}
    basis_z_cache = {}
    fits = []
    for model in collection:
        bx = basis_x_cache.setdefault(model.m1_dim, basis_of_dimension(model.kind_x, model.m1_dim))
        bz = basis_z_cache.setdefault(model.m2_dim, basis_of_dimension(model.kind_z, model.m2_dim))
        fitted = fit_model(model, sample, f0_hat, basis_x=bx, basis_z=bz)
        fitted.penalty = penalty(model, sup_plugin, config.k0, sample.n, config.penalty_form)
        fits.append(fitted)
    best = min(fits, key=lambda f: (f.criterion, f.model.product_dim, f.model.m1_dim))
    return AdaptiveFit(
        selected=best.model,
        fit=best,
        all_criteria=tuple(fits),
        sup_plugin=sup_plugin,
        f0_hat=f0_hat,
        rescale_factor=sample.rescale_factor,
    )


def unit_surface(fit: FittedModel, x, z) -> np.ndarray:
    """Evaluate the fitted surface on the unit square at points (x, z)."""
    bx, bz = _bases_for(fit.model)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return np.einsum(
        "ij,jk,ik->i", bx.design_matrix(x), fit.coefficients, bz.design_matrix(z)
    )


def unit_surface_grid(fit: FittedModel, x, z) -> np.ndarray:
    """Surface on the product grid ``x`` times ``z``; shape (len(x), len(z))."""
    bx, bz = _bases_for(fit.model)
    return bx.design_matrix(np.asarray(x)) @ fit.coefficients @ bz.design_matrix(np.asarray(z)).T

def eval_estimate(fit: AdaptiveFit, x, z_original) -> np.ndarray:
    """Intensity estimate in original time units, zero past the horizon."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z_original, dtype=float))
    x, z = np.broadcast_arrays(x, z)
    tau = fit.rescale_factor
    u = z / tau
    inside = u <= 1.0
    out = np.zeros(x.shape)
    if np.any(inside):
        out[inside] = unit_surface(fit.fit, x[inside], u[inside]) / tau
    return out
