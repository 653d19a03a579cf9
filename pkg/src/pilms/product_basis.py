"""Product-form bases of symmetric subspaces.

A ``d x (n+1)`` parameter matrix with a row of ones on top and pairwise
distinct entries in every other row generates ``C(n+d-1, n)`` product
vectors ``(sum_k a[k, j_k] |k>)^{(x) n}``, one per composition
``(j_0, ..., j_{d-1})`` of ``n``, and these are linearly independent.
With ``d = 4`` and local basis ``(Z, I, X, Y)`` the same construction gives
a product-operator basis of the permutation-invariant operators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import comb, pi

import numpy as np
import scipy.linalg

from .errors import RankDeficientError
from .symcore import product_op_coords

logger = logging.getLogger(__name__)

__all__ = [
    "SCHEMES",
    "CONDITION_WARN",
    "ParamMatrix",
    "ProductStateBasis",
    "OperatorBasis",
    "compositions",
    "equilibrate",
    "make_param_matrix",
    "product_state_basis",
    "expansion_matrix",
    "certify_rank",
    "operator_basis",
]

SCHEMES = ("integer-grid", "tangent-grid")
CONDITION_WARN = 1e12


def _scheme(name):
    aliases = {"integer": "integer-grid", "tangent": "tangent-grid"}
    name = aliases.get(name, name)
    if name not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {SCHEMES}")
    return name


@lru_cache(maxsize=None)
def _compositions(n, d):
    if d == 1:
        return ((),)
    out = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for x in range(remaining + 1):
            rec(prefix + [x], remaining - x, slots - 1)

    rec([], n, d - 1)
    return tuple(out)


def compositions(n, d):
    """Compositions of ``n`` into ``d`` parts, as tuples ``(x_1, ..., x_{d-1})``.

    The zeroth part is implicit (``n - sum``).  Order is lexicographic, which
    for ``d = 4`` coincides with the symmetric-coordinate index order.
    """
    return list(_compositions(n, d))


def tangent_nodes(n):
    """``tan((j + 1/4) pi / (n + 1))`` for ``j = 0..n``.

    Quarter-step offset of the evenly spaced grid ``j pi / (n + 1)``: every
    angle stays inside ``(0, pi)`` and none lands on ``pi / 2``.
    """
    theta = (np.arange(n + 1) + 0.25) * pi / (n + 1)
    return np.tan(theta)


@dataclass(frozen=True, eq=False)
class ParamMatrix:
    """Parameter matrix ``a[k, j]`` for ``k < d`` and ``j <= n``."""

    d: int
    n: int
    scheme: str
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        if rows.shape != (self.d, self.n + 1):
            raise ValueError(
                f"parameter matrix must be {self.d}x{self.n + 1}, got {rows.shape}"
            )
        if not np.all(rows[0] == 1.0):
            raise ValueError("row 0 of a parameter matrix must be all ones")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def has_distinct_rows(self):
        return all(np.unique(r).size == r.size for r in self.rows[1:])

    def to_dict(self):
        return {
            "d": self.d,
            "n": self.n,
            "scheme": self.scheme,
            "rows": self.rows.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["d"]), int(data["n"]), str(data["scheme"]), data["rows"])


def make_param_matrix(d, n, scheme="integer-grid"):
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")
    scheme = _scheme(scheme)
    if scheme == "integer-grid":
        nodes = np.arange(n + 1, dtype=np.float64)
    else:
        nodes = tangent_nodes(n)
    rows = np.vstack([np.ones(n + 1)] + [nodes] * (d - 1))
    return ParamMatrix(d, n, scheme, rows)


@dataclass(frozen=True, eq=False)
class ProductStateBasis:
    d: int
    n: int
    keys: tuple
    vectors: tuple

    def __len__(self):
        return len(self.vectors)

    def dense(self, position):
        """Explicit ``d^n`` vector of one basis element (small ``n`` only)."""
        local = np.asarray(self.vectors[position], dtype=np.float64)
        out = np.ones(1)
        for _ in range(self.n):
            out = np.kron(out, local)
        return out


def product_state_basis(pm):
    keys = _compositions(pm.n, pm.d)
    vectors = []
    for key in keys:
        j = (pm.n - sum(key),) + key
        vectors.append(tuple(float(pm.rows[k, j[k]]) for k in range(pm.d)))
    return ProductStateBasis(pm.d, pm.n, keys, tuple(vectors))


def expansion_matrix(pm):
    """Coefficients of the product vectors in the orthogonal symmetric basis.

    Entry ``[i, j] = prod_{k>=1} a[k, j_k] ** i_k``, rows and columns both
    indexed by :func:`compositions`.
    """
    comps = _compositions(pm.n, pm.d)
    keys = np.array(comps, dtype=np.int64).reshape(len(comps), pm.d - 1)
    out = np.ones((keys.shape[0], keys.shape[0]))
    for k in range(1, pm.d):
        nodes = pm.rows[k][keys[:, k - 1]]
        out *= np.power(nodes[None, :], keys[:, k - 1][:, None])
    return out


def equilibrate(mat):
    """Scale columns, then rows, to unit 2-norm.

    Returns ``(scaled, row_scale, col_scale)`` with
    ``mat = row_scale[:, None] * scaled * col_scale[None, :]``.
    """
    cols = np.linalg.norm(mat, axis=0)
    cols[cols == 0] = 1.0
    scaled = mat / cols
    rows = np.linalg.norm(scaled, axis=1)
    rows[rows == 0] = 1.0
    return scaled / rows[:, None], rows, cols


def _numerical_rank(scaled):
    # equilibration makes the rank test blind to basis-vector scaling
    _, r, _ = scipy.linalg.qr(scaled, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return 0
    tol = max(scaled.shape) * np.finfo(float).eps * diag[0]
    return int(np.count_nonzero(diag > tol))


def certify_rank(pm):
    """Rank and condition number of :func:`expansion_matrix`.

    Both are computed after row and column equilibration, so rescaling
    individual basis vectors changes neither.  Raises
    :class:`RankDeficientError` when the matrix is not full rank.
    """
    mat, _, _ = equilibrate(expansion_matrix(pm))
    size = mat.shape[0]
    rank = _numerical_rank(mat)
    if rank < size:
        raise RankDeficientError(
            f"expansion matrix has rank {rank} < {size} "
            f"(d={pm.d}, n={pm.n}, scheme={pm.scheme})",
            d=pm.d, n=pm.n, scheme=pm.scheme, rank=rank, size=size,
        )
    cond = float(np.linalg.cond(mat))
    if cond > CONDITION_WARN:
        logger.warning(
            "expansion matrix condition number %.3g exceeds %.0e (d=%d, n=%d, %s)",
            cond, CONDITION_WARN, pm.d, pm.n, pm.scheme,
        )
    return {"rank": rank, "condition_number": cond}


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Product operators ``(a_i I + b_j X + c_k Y + Z)^{(x) n}``, ``i+j+k <= n``.

    ``keys`` holds the integer grid indices ``(i, j, k)``; ``elements`` the
    matching real triples ``(a_i, b_j, c_k)``.
    """

    n: int
    scheme: str
    params: ParamMatrix
    keys: tuple
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def coords(self, position):
        a, b, c = self.elements[position]
        return product_op_coords(a, b, c, 1.0, self.n)

    def coords_matrix(self):
        """Columns are the symmetric coordinates of each basis operator."""
        return np.column_stack([self.coords(p).values for p in range(len(self))])


@lru_cache(maxsize=32)
def _operator_basis(n, scheme):
    pm = make_param_matrix(4, n, scheme)
    certify_rank(pm)
    keys = _compositions(n, 4)
    a, b, c = pm.rows[1], pm.rows[2], pm.rows[3]
    elements = tuple((float(a[i]), float(b[j]), float(c[k])) for i, j, k in keys)
    return OperatorBasis(n, scheme, pm, keys, elements)


def operator_basis(n, scheme="tangent-grid"):
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    return _operator_basis(int(n), _scheme(scheme))


def basis_size(n, d):
    return comb(n + d - 1, n)
