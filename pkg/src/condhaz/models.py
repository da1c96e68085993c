"""Tensor-product model collections with dimension caps and nesting.

A model is a pair of per-direction dimensions (D1, D2) drawn from dyadic
ladders, so that spaces in each direction are nested.  Per-direction caps
are ``sqrt(n / log n)`` for localized families (histogram, piecewise
polynomial) and ``n^{1/4} / sqrt(log n)`` for the trigonometric family;
the product dimension is capped by ``n / log n`` (localized) or
``sqrt(n / log n)`` (trigonometric in either direction).  Natural
logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bases import BasisKind


@dataclass(frozen=True)
class ModelIndex:
    """One tensor-product model: per-direction dimensions and families."""

    m1_dim: int
    m2_dim: int
    kind_x: BasisKind
    kind_z: BasisKind

    def __post_init__(self):
        if self.m1_dim < 1 or self.m2_dim < 1:
            raise ValueError("model dimensions must be >= 1")

    @property
    def product_dim(self) -> int:
        return self.m1_dim * self.m2_dim


@dataclass(frozen=True)
class ModelCollection:
    models: tuple
    n: int
    dim_cap_x: int
    dim_cap_z: int
    nesting_space_dim: int

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)


def direction_cap(kind: BasisKind, n: int) -> int:
    logn = math.log(n)
    if kind.tag == "trigonometric":
        return max(1, math.floor(n**0.25 / math.sqrt(logn)))
    return max(1, math.floor(math.sqrt(n / logn)))


def dyadic_ladder(kind: BasisKind, cap: int) -> list:
    """Admissible dimensions up to ``cap``: base * 2^j with base = degree+1."""
    base = kind.degree + 1 if kind.tag == "piecewise_polynomial" else 1
    dims = []
    d = base
    while d <= cap:
        dims.append(d)
        d *= 2
    return dims or [base]  # never empty, even when the cap is degenerate


def enumerate_collection(n: int, kind_x: BasisKind, kind_z: BasisKind) -> ModelCollection:
    """All admissible (D1, D2) pairs for sample size ``n``.

    Ordered lexicographically by (D1 * D2, D1).  Raises for n < 8, where
    the cap formulas stop making sense.
    """
    if n < 8:
        raise ValueError(f"sample size {n} too small to build a model collection")
    cap_x = direction_cap(kind_x, n)
    cap_z = direction_cap(kind_z, n)
    ladder_x = dyadic_ladder(kind_x, cap_x)
    ladder_z = dyadic_ladder(kind_z, cap_z)
    logn = math.log(n)
    if kind_x.localized and kind_z.localized:
        product_cap = n / logn
    else:
        product_cap = math.sqrt(n / logn)
    pairs = [
        (d1, d2)
        for d1 in ladder_x
        for d2 in ladder_z
        if d1 * d2 <= product_cap or (d1 == ladder_x[0] and d2 == ladder_z[0])
    ]
    pairs.sort(key=lambda p: (p[0] * p[1], p[0]))
    models = tuple(ModelIndex(d1, d2, kind_x, kind_z) for d1, d2 in pairs)
    nesting_dim = max(m.m1_dim for m in models) * max(m.m2_dim for m in models)
    return ModelCollection(models, n, cap_x, cap_z, nesting_dim)


def validate_nesting(collection: ModelCollection) -> bool:
    """True iff each direction's dimension set is a divisibility chain.

    That is exactly the condition under which the per-direction spaces are
    nested and every sum of two model spaces sits inside the largest one.
    """
    for dims in (
        sorted({m.m1_dim for m in collection.models}),
        sorted({m.m2_dim for m in collection.models}),
    ):
        for small, big in zip(dims, dims[1:]):
            if big % small != 0:
                return False
    return True
