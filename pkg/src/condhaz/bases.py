"""Orthonormal 1-D function systems on [0, 1] with exact integration.

Three families are provided: dyadic histograms, trigonometric polynomials
and piecewise Legendre polynomials on dyadic cells.  All of them evaluate
pairwise integrals ``int_a^b psi_k psi_p`` in closed form, which is the
primitive the Gram assembly downstream relies on (no quadrature error).

Cells are half-open ``[lo, hi)`` except the terminal cell, which includes 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

MAX_POLY_DEGREE = 8  # Legendre recurrences stay well conditioned up to here


@dataclass(frozen=True)
class BasisKind:
    """Family tag plus the polynomial degree (piecewise polynomials only)."""

    tag: str
    degree: int = 0

    def __post_init__(self):
        if self.tag not in ("histogram", "trigonometric", "piecewise_polynomial"):
            raise ValueError(f"unknown basis family {self.tag!r}")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if self.tag == "piecewise_polynomial" and self.degree > MAX_POLY_DEGREE:
            raise ValueError(f"degree {self.degree} exceeds cap {MAX_POLY_DEGREE}")

    @property
    def localized(self) -> bool:
        """True for families with compact per-function support."""
        return self.tag != "trigonometric"


HISTOGRAM = BasisKind("histogram")
TRIGONOMETRIC = BasisKind("trigonometric")


def piecewise_polynomial(degree: int) -> BasisKind:
    return BasisKind("piecewise_polynomial", degree)


class Basis1D:
    """Common interface of the three families.

    Attributes
    ----------
    kind : BasisKind
    dimension : int
        Number of functions D.
    sup_factor : float
        Constant phi such that ``sup |u|^2 <= phi * D * ||u||^2`` for every
        u in the span.
    """

    kind: BasisKind
    dimension: int
    sup_factor: float

    def design_matrix(self, x) -> np.ndarray:
        """Evaluate all functions at the points ``x``; shape (len(x), D)."""
        raise NotImplementedError

    def eval(self, j: int, x: float) -> float:
        """Value of the j-th basis function at a single point."""
        if not 0 <= j < self.dimension:
            raise IndexError(f"basis index {j} out of range [0, {self.dimension})")
        return float(self.design_matrix(np.array([x]))[0, j])

    def pair_integral(self, k: int, p: int, a: float, b: float) -> float:
        """Exact ``int_a^b psi_k psi_p`` for 0 <= a <= b <= 1."""
        self._check_pair(k, p, a, b)
        return float(
            self.prefix_pair_integrals(np.array([b]))[0, k, p]
            - self.prefix_pair_integrals(np.array([a]))[0, k, p]
        )

    def integral(self, k: int, a: float, b: float) -> float:
        """Exact ``int_a^b psi_k``."""
        self._check_pair(k, k, a, b)
        return float(
            self.prefix_integrals(np.array([b]))[0, k]
            - self.prefix_integrals(np.array([a]))[0, k]
        )

    def prefix_pair_integrals(self, upper) -> np.ndarray:
        """``int_0^{upper[i]} psi_k psi_p`` for all pairs; shape (m, D, D)."""
        raise NotImplementedError

    def prefix_integrals(self, upper) -> np.ndarray:
        """``int_0^{upper[i]} psi_k`` for all k; shape (m, D)."""
        raise NotImplementedError

    def _check_pair(self, k, p, a, b):
        if not (0 <= k < self.dimension and 0 <= p < self.dimension):
            raise IndexError("basis index out of range")
        if b < a:
            raise ValueError(f"reversed interval [{a}, {b}]")

    def __repr__(self):
        return f"{type(self).__name__}(D={self.dimension})"


class HistogramBasis(Basis1D):
    """``phi_j = sqrt(D) * 1([j/D, (j+1)/D))`` on a dyadic partition."""

    def __init__(self, n_cells: int):
        if n_cells < 1 or (n_cells & (n_cells - 1)) != 0:
            raise ValueError("histogram dimension must be a power of two >= 1")
        self.kind = HISTOGRAM
        self.dimension = n_cells
        self.sup_factor = 1.0

    def _cells(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum((x * self.dimension).astype(int), self.dimension - 1)

    def design_matrix(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((x.size, self.dimension))
        out[np.arange(x.size), self._cells(x)] = math.sqrt(self.dimension)
        return out

    def prefix_pair_integrals(self, upper):
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        D = self.dimension
        lo = np.arange(D) / D
        overlap = np.clip(upper[:, None] - lo[None, :], 0.0, 1.0 / D)
        out = np.zeros((upper.size, D, D))
        idx = np.arange(D)
        out[:, idx, idx] = D * overlap
        return out

    def prefix_integrals(self, upper):
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        D = self.dimension
        lo = np.arange(D) / D
        return math.sqrt(D) * np.clip(upper[:, None] - lo[None, :], 0.0, 1.0 / D)


def _int_cos(freq: int, a, b):
    """int_a^b cos(2 pi freq x) dx, vectorized in a, b."""
    if freq == 0:
        return np.asarray(b) - np.asarray(a)
    w = 2.0 * math.pi * freq
    return (np.sin(w * np.asarray(b)) - np.sin(w * np.asarray(a))) / w


def _int_sin(freq: int, a, b):
    """int_a^b sin(2 pi freq x) dx, vectorized in a, b."""
    if freq == 0:
        return np.zeros_like(np.asarray(b, dtype=float))
    w = 2.0 * math.pi * freq
    return (np.cos(w * np.asarray(a)) - np.cos(w * np.asarray(b))) / w


class TrigBasis(Basis1D):
    """1, sqrt(2) cos(2 pi j x), sqrt(2) sin(2 pi j x), taken in that order.

    For each frequency j the cosine precedes the sine, so an even dimension
    keeps the top-frequency cosine and drops its sine.
    """

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.kind = TRIGONOMETRIC
        self.dimension = dimension
        self.sup_factor = 2.0
        # (amplitude, is_cosine, frequency) per function
        self._spec = [(1.0, True, 0)]
        for i in range(1, dimension):
            self._spec.append((math.sqrt(2.0), i % 2 == 1, (i + 1) // 2))
        self._spec = self._spec[:dimension]

    def design_matrix(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((x.size, self.dimension))
        for i, (amp, is_cos, freq) in enumerate(self._spec):
            w = 2.0 * math.pi * freq
            out[:, i] = amp * (np.cos(w * x) if is_cos else np.sin(w * x))
        return out

    def _pair_prefix(self, k, p, upper):
        """int_0^upper psi_k psi_p via product-to-sum identities."""
        ak, ck, fk = self._spec[k]
        ap, cp, fp = self._spec[p]
        amp = 0.5 * ak * ap
        if ck and cp:
            return amp * (_int_cos(abs(fk - fp), 0.0, upper) + _int_cos(fk + fp, 0.0, upper))
        if not ck and not cp:
            return amp * (_int_cos(abs(fk - fp), 0.0, upper) - _int_cos(fk + fp, 0.0, upper))
        # one sine (frequency fs), one cosine (frequency fc)
        fs, fc = (fk, fp) if not ck else (fp, fk)
        diff = _int_sin(abs(fs - fc), 0.0, upper)
        if fs < fc:
            diff = -diff
        return amp * (_int_sin(fs + fc, 0.0, upper) + diff)

    def prefix_pair_integrals(self, upper):
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        D = self.dimension
        out = np.empty((upper.size, D, D))
        for k in range(D):
            for p in range(k, D):
                val = self._pair_prefix(k, p, upper)
                out[:, k, p] = val
                out[:, p, k] = val
        return out

    def prefix_integrals(self, upper):
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        out = np.empty((upper.size, self.dimension))
        for i, (amp, is_cos, freq) in enumerate(self._spec):
            out[:, i] = amp * (_int_cos(freq, 0.0, upper) if is_cos else _int_sin(freq, 0.0, upper))
        return out


class PiecewisePolyBasis(Basis1D):
    """L2-normalized shifted Legendre polynomials on dyadic cells.

    Index layout is cell-major: function ``cell * (r + 1) + d`` is the
    degree-d polynomial supported on cell ``cell``.  Orthonormality is exact
    by construction.
    """

    def __init__(self, level: int, degree: int):
        if level < 0:
            raise ValueError("level must be >= 0")
        if not 0 <= degree <= MAX_POLY_DEGREE:
            raise ValueError(f"degree must be in [0, {MAX_POLY_DEGREE}]")
        self.kind = piecewise_polynomial(degree)
        self.level = level
        self.degree = degree
        self.n_cells = 2**level
        self.dimension = (degree + 1) * self.n_cells
        self.sup_factor = float(degree + 1)
        r = degree
        # antiderivatives of P_d and of P_d * P_d', as Legendre series on [-1, 1]
        self._anti_single = [npleg.legint(np.eye(r + 1)[d]) for d in range(r + 1)]
        self._anti_pair = [
            [npleg.legint(npleg.legmul(np.eye(r + 1)[d], np.eye(r + 1)[e])) for e in range(r + 1)]
            for d in range(r + 1)
        ]
        self._norm = np.sqrt(2.0 * np.arange(r + 1) + 1.0)

    def _cells(self, x):
        return np.minimum((np.asarray(x) * self.n_cells).astype(int), self.n_cells - 1)

    def design_matrix(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cells = self._cells(x)
        u = 2.0 * self.n_cells * x - 2.0 * cells - 1.0
        vander = npleg.legvander(u, self.degree)  # (m, r+1)
        vals = vander * (self._norm * math.sqrt(self.n_cells))[None, :]
        out = np.zeros((x.size, self.dimension))
        cols = cells[:, None] * (self.degree + 1) + np.arange(self.degree + 1)[None, :]
        out[np.arange(x.size)[:, None], cols] = vals
        return out

    def prefix_pair_integrals(self, upper):
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        r1 = self.degree + 1
        out = np.zeros((upper.size, self.dimension, self.dimension))
        for c in range(self.n_cells):
            u = np.clip(2.0 * self.n_cells * upper - 2.0 * c - 1.0, -1.0, 1.0)
            for d in range(r1):
                for e in range(d, r1):
                    anti = self._anti_pair[d][e]
                    val = (
                        0.5
                        * self._norm[d]
                        * self._norm[e]
                        * (npleg.legval(u, anti) - npleg.legval(-1.0, anti))
                    )
                    out[:, c * r1 + d, c * r1 + e] = val
                    out[:, c * r1 + e, c * r1 + d] = val
        return out

    def prefix_integrals(self, upper):
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        r1 = self.degree + 1
        scale = self._norm / (2.0 * math.sqrt(self.n_cells))
        out = np.zeros((upper.size, self.dimension))
        for c in range(self.n_cells):
            u = np.clip(2.0 * self.n_cells * upper - 2.0 * c - 1.0, -1.0, 1.0)
            for d in range(r1):
                anti = self._anti_single[d]
                out[:, c * r1 + d] = scale[d] * (npleg.legval(u, anti) - npleg.legval(-1.0, anti))
        return out


def make_basis(kind: BasisKind, dimension_param: int) -> Basis1D:
    """Build a basis from its family index.

    ``dimension_param`` follows each family's natural parameterization:
    histogram exponent m (D = 2^m), trigonometric dimension D itself, and
    the dyadic level for piecewise polynomials (D = (degree + 1) * 2^level).
    """
    if dimension_param < 1:
        raise ValueError("dimension_param must be >= 1")
    if kind.tag == "histogram":
        return HistogramBasis(2**dimension_param)
    if kind.tag == "trigonometric":
        return TrigBasis(dimension_param)
    return PiecewisePolyBasis(dimension_param, kind.degree)


def basis_of_dimension(kind: BasisKind, dimension: int) -> Basis1D:
    """Build a basis with exactly ``dimension`` functions.

    This is the constructor used by model collections, whose dyadic ladders
    start at the smallest admissible dimension (a single constant cell for
    histograms).
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    if kind.tag == "histogram":
        return HistogramBasis(dimension)
    if kind.tag == "trigonometric":
        return TrigBasis(dimension)
    cells, rem = divmod(dimension, kind.degree + 1)
    if rem != 0 or cells < 1 or (cells & (cells - 1)) != 0:
        raise ValueError(
            f"dimension {dimension} is not (degree+1) * 2^level for degree {kind.degree}"
        )
    return PiecewisePolyBasis(cells.bit_length() - 1, kind.degree)


def sup_norm_factor(basis: Basis1D) -> float:
    """The constant phi of the sup-norm inequality for this family."""
    return basis.sup_factor
