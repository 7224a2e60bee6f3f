"""Polynomial trend bases.

One-dimensional monic and Legendre polynomial families, multi-index
truncation schemes (tensor-product, total-order, hyperbolic, two-factor),
multivariate basis evaluation, and the linear/quadratic effect encoding
used by Bayesian forward selection of trend terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import product

import numpy as np

__all__ = [
    "MultiIndex",
    "PolyFamily",
    "IndexScheme",
    "MultiIndexSet",
    "BasisSpec",
    "monic_eval",
    "legendre_eval",
    "generate_index_set",
    "eval_basis",
    "bk_encode",
    "to_encoding_domain",
    "BK_DISTANCE_SCALE",
]

MultiIndex = tuple[int, ...]

# Tolerance for floating-point drift at the edges of evaluation domains.
_DOMAIN_TOL = 1e-9

# Widths of [-1, 1] and [1, 3] are equal, so the shift into the encoding
# domain preserves distances; squared affine distance factor is exactly 1.
BK_DISTANCE_SCALE = 1.0


class PolyFamily(Enum):
    MONIC = "monic"
    LEGENDRE = "legendre"


class IndexScheme(Enum):
    TENSOR_PRODUCT = "tensor-product"
    TOTAL_ORDER = "total-order"
    HYPERBOLIC = "hyperbolic"
    TWO_FACTOR = "two-factor"


def monic_eval(order, x):
    """Monic polynomial x**order. Accepts scalars or arrays."""
    if order < 0:
        raise ValueError(f"polynomial order must be >= 0, got {order}")
    xv = np.asarray(x, dtype=float)
    out = xv**order
    return float(out) if np.isscalar(x) or xv.ndim == 0 else out


def _check_legendre_domain(x):
    xv = np.asarray(x, dtype=float)
    if np.any(np.abs(xv) > 1.0 + _DOMAIN_TOL):
        raise ValueError("Legendre polynomials are defined on [-1, 1]")
    return np.clip(xv, -1.0, 1.0)


def _legendre_table(max_order, x):
    """Values of Legendre polynomials 0..max_order at x, shape (max_order+1, *x.shape).

    Orders 0..5 use the closed forms; higher orders use the Bonnet
    three-term recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}, which
    keeps the P_n(1) = 1 normalization.
    """
    x = np.asarray(x, dtype=float)
    closed = [
        lambda t: np.ones_like(t),
        lambda t: t,
        lambda t: 0.5 * (3.0 * t**2 - 1.0),
        lambda t: 0.5 * (5.0 * t**3 - 3.0 * t),
        lambda t: 0.125 * (35.0 * t**4 - 30.0 * t**2 + 3.0),
        lambda t: 0.125 * (63.0 * t**5 - 70.0 * t**3 + 15.0 * t),
    ]
    table = np.empty((max_order + 1,) + x.shape, dtype=float)
    for n in range(min(max_order, 5) + 1):
        table[n] = closed[n](x)
    for n in range(5, max_order):
        table[n + 1] = ((2 * n + 1) * x * table[n] - n * table[n - 1]) / (n + 1)
    return table


def legendre_eval(order, x):
    """Legendre polynomial of the given order at x in [-1, 1].

    Normalized so that P_n(1) = 1; raises if x is outside the domain.
    """
    if order < 0:
        raise ValueError(f"polynomial order must be >= 0, got {order}")
    xv = _check_legendre_domain(x)
    scalar = np.isscalar(x) or xv.ndim == 0
    out = _legendre_table(order, np.atleast_1d(xv))[order]
    return float(out[0]) if scalar else out.reshape(xv.shape)


@dataclass(frozen=True)
class MultiIndexSet:
    """Ordered collection of degree tuples defining a candidate trend basis."""

    indices: tuple[MultiIndex, ...]
    scheme: IndexScheme
    order: int
    nu: float | None = None

    def __post_init__(self):
        if not self.indices:
            raise ValueError("index set must not be empty")
        m = len(self.indices[0])
        zeros = (0,) * m
        if self.indices[0] != zeros:
            raise ValueError("index set must start with the constant term")
        if self.indices.count(zeros) != 1:
            raise ValueError("constant term must appear exactly once")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("duplicate multi-indices")
        for idx in self.indices:
            if len(idx) != m or any(d < 0 for d in idx):
                raise ValueError(f"malformed multi-index {idx}")

    @property
    def dimension(self) -> int:
        return len(self.indices[0])

    @property
    def cardinality(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class BasisSpec:
    """A polynomial family together with the multi-index set to expand."""

    family: PolyFamily
    index_set: MultiIndexSet

    @property
    def dimension(self) -> int:
        return self.index_set.dimension

    @property
    def size(self) -> int:
        return self.index_set.cardinality


def constant_index_set(m: int) -> MultiIndexSet:
    """The order-0 set containing only the constant term."""
    return MultiIndexSet(((0,) * m,), IndexScheme.TOTAL_ORDER, 0)


def _graded_lex(indices):
    return tuple(sorted(indices, key=lambda z: (sum(z), z)))


def generate_index_set(m, p, scheme, nu=None) -> MultiIndexSet:
    """Build the multi-index set of the requested truncation scheme.

    Ordering is graded-lexicographic (total degree first, then
    lexicographic) so downstream term selection is reproducible.
    """
    if m < 1:
        raise ValueError(f"dimension must be >= 1, got {m}")
    if p < 0:
        raise ValueError(f"order must be >= 0, got {p}")
    scheme = IndexScheme(scheme)

    if scheme is IndexScheme.TENSOR_PRODUCT:
        indices = _graded_lex(product(range(p + 1), repeat=m))
    elif scheme is IndexScheme.TOTAL_ORDER:
        indices = _graded_lex(
            z for z in product(range(p + 1), repeat=m) if sum(z) <= p
        )
    elif scheme is IndexScheme.HYPERBOLIC:
        if nu is None or not (0.0 < nu <= 1.0):
            raise ValueError("hyperbolic scheme needs nu in (0, 1]")
        indices = _graded_lex(
            z
            for z in product(range(p + 1), repeat=m)
            if sum(d**nu for d in z) ** (1.0 / nu) <= p + _DOMAIN_TOL
        )
    elif scheme is IndexScheme.TWO_FACTOR:
        # Linear/quadratic effects plus all products of two distinct factors
        # at the linear/quadratic levels: 2m^2 features plus the constant.
        if p < 2:
            raise ValueError("two-factor scheme needs p >= 2")
        out = [(0,) * m]
        for j in range(m):
            for d in (1, 2):
                z = [0] * m
                z[j] = d
                out.append(tuple(z))
        for i in range(m):
            for j in range(i + 1, m):
                for di in (1, 2):
                    for dj in (1, 2):
                        z = [0] * m
                        z[i], z[j] = di, dj
                        out.append(tuple(z))
        indices = _graded_lex(out)
    else:  # pragma: no cover
        raise ValueError(f"unknown scheme {scheme}")

    return MultiIndexSet(tuple(indices), scheme, p, nu if scheme is IndexScheme.HYPERBOLIC else None)


def _family_table(family, max_order, X):
    if family is PolyFamily.LEGENDRE:
        return _legendre_table(max_order, _check_legendre_domain(X))
    tab = np.empty((max_order + 1,) + X.shape, dtype=float)
    tab[0] = 1.0
    for n in range(1, max_order + 1):
        tab[n] = tab[n - 1] * X
    return tab


def eval_basis(spec: BasisSpec, x):
    """Evaluate the multivariate basis at one point (m,) or a batch (q, m).

    Entry k is the product over dimensions of the one-dimensional
    polynomial of degree zeta_k[j] at x[j]; ordering follows the index set.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    m = spec.dimension
    if X.shape[1] != m:
        raise ValueError(f"point dimension {X.shape[1]} != basis dimension {m}")
    Z = np.asarray(spec.index_set.indices, dtype=int)
    tab = _family_table(spec.family, int(Z.max(initial=0)), X)  # (dmax+1, q, m)
    F = np.ones((X.shape[0], Z.shape[0]))
    for j in range(m):
        F *= tab[Z[:, j], :, j].T
    return F[0] if single else F


def to_encoding_domain(x_norm):
    """Shift points from the [-1, 1] design domain into [1, 3]."""
    return np.asarray(x_norm, dtype=float) + 2.0


def bk_encode(x_scaled):
    """Linear/quadratic effect coding of points in [1, 3]^m.

    Returns (x_l, x_q) with x_l = sqrt(3/2) (x - 2) and
    x_q = (1/sqrt(2)) (3 (x - 2)^2 - 2).
    """
    X = np.asarray(x_scaled, dtype=float)
    if np.any(X < 1.0 - _DOMAIN_TOL) or np.any(X > 3.0 + _DOMAIN_TOL):
        raise ValueError("effect coding is defined on [1, 3]")
    c = X - 2.0
    x_l = math.sqrt(3.0 / 2.0) * c
    x_q = (3.0 * c**2 - 2.0) / math.sqrt(2.0)
    return x_l, x_q
