"""Coordinates on the permutation-symmetric subspace of N-qubit operators.

Every permutation-invariant Hermitian operator is a real combination of

    M[i, j, k] = sum over distinct placements of I^i X^j Y^k Z^(n-i-j-k)

and the ``M`` operators are mutually orthogonal under the Hilbert-Schmidt
inner product.  A :class:`SymCoords` stores the real coefficients over this
basis, indexed lexicographically by ``(i, j, k)``.

The dense helpers (:func:`m_basis_dense`, :func:`project_to_sym`,
:func:`coords_to_dense`, :func:`twirl`) work on explicit ``2^n x 2^n``
matrices and exist to validate the coordinate path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np

from . import _backend
from .errors import InvalidObservableError

__all__ = [
    "PAULIS",
    "DENSE_MAX_QUBITS",
    "SymCoords",
    "enumerate_indices",
    "index_arrays",
    "index_position",
    "norm_const",
    "norm_consts",
    "multinomial",
    "product_op_coords",
    "m_basis_dense",
    "pauli_coefficients",
    "project_to_sym",
    "coords_to_dense",
    "twirl",
]

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)

DENSE_MAX_QUBITS = 12
ZERO_CUTOFF = 1e-14


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n!r}")
    return int(n)


@lru_cache(maxsize=None)
def _indices(n):
    return tuple(
        (i, j, k)
        for i in range(n + 1)
        for j in range(n + 1 - i)
        for k in range(n + 1 - i - j)
    )


def enumerate_indices(n):
    """All ``(i, j, k)`` with ``i + j + k <= n`` in lexicographic order.

    The implicit fourth count ``n - i - j - k`` is the number of Z factors.
    There are ``C(n + 3, 3)`` of them.
    """
    return list(_indices(_check_n(n)))


@lru_cache(maxsize=None)
def index_arrays(n):
    """Integer arrays ``(I, J, K, L)`` of the four counts, in index order."""
    idx = np.array(_indices(_check_n(n)), dtype=np.int64).reshape(-1, 3)
    i, j, k = idx.T
    arrays = (i, j, k, n - i - j - k)
    for a in arrays:
        a.setflags(write=False)
    return arrays


@lru_cache(maxsize=None)
def _position_table(n):
    table = np.full((n + 1, n + 1, n + 1), -1, dtype=np.int64)
    for p, (i, j, k) in enumerate(_indices(n)):
        table[i, j, k] = p
    table.setflags(write=False)
    return table


def index_position(n, idx):
    """Position of ``idx`` in :func:`enumerate_indices` order."""
    i, j, k = idx
    if min(i, j, k) < 0 or i + j + k > n:
        raise ValueError(f"invalid index {idx} for n={n}")
    return int(_position_table(n)[i, j, k])


def multinomial(n, i, j, k):
    l = n - i - j - k
    return factorial(n) // (factorial(i) * factorial(j) * factorial(k) * factorial(l))


def norm_const(n, idx):
    """``c = i! j! k! l! / (2^n n!)``, the inverse of ``Tr(M M)``."""
    i, j, k = idx
    return 1.0 / (multinomial(n, i, j, k) * 2.0**n)


@lru_cache(maxsize=None)
def norm_consts(n):
    out = np.array([norm_const(n, b) for b in _indices(_check_n(n))])
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SymCoords:
    """Real coefficients over the ``M[i, j, k]`` basis for ``n`` qubits."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        _check_n(self.n)
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.shape != (comb(self.n + 3, 3),):
            raise ValueError(
                f"expected {comb(self.n + 3, 3)} coordinates for n={self.n}, "
                f"got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, n):
        return cls(n, np.zeros(comb(n + 3, 3)))

    @classmethod
    def from_mapping(cls, n, mapping):
        values = np.zeros(comb(n + 3, 3))
        for idx, v in mapping.items():
            values[index_position(n, idx)] = v
        return cls(n, values)

    def __getitem__(self, idx):
        return float(self.values[index_position(self.n, idx)])

    def __len__(self):
        return self.values.size

    def items(self):
        return zip(_indices(self.n), self.values.tolist())

    def nonzero(self, cutoff=ZERO_CUTOFF):
        return {idx: v for idx, v in self.items() if abs(v) > cutoff}

    def __add__(self, other):
        self._same_n(other)
        return SymCoords(self.n, self.values + other.values)

    def __sub__(self, other):
        self._same_n(other)
        return SymCoords(self.n, self.values - other.values)

    def __mul__(self, scalar):
        return SymCoords(self.n, self.values * float(scalar))

    __rmul__ = __mul__

    def _same_n(self, other):
        if other.n != self.n:
            raise ValueError(f"qubit counts differ: {self.n} vs {other.n}")

    def max_abs_diff(self, other):
        self._same_n(other)
        return float(np.max(np.abs(self.values - other.values)))

    def to_dict(self):
        return {
            "n": self.n,
            "coords": [
                {"i": i, "j": j, "k": k, "v": v}
                for (i, j, k), v in self.nonzero().items()
            ],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])
            mapping = {
                (int(c["i"]), int(c["j"]), int(c["k"])): float(c["v"])
                for c in data["coords"]
            }
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed SymCoords document: {exc}") from exc
        return cls.from_mapping(n, mapping)


def product_op_coords(a, b, c, d, n):
    """Coordinates of ``(a I + b X + c Y + d Z)^{(x) n}``.

    The coefficient on ``M[i, j, k]`` is ``a^i b^j c^k d^(n-i-j-k)``.
    """
    i, j, k, l = index_arrays(_check_n(n))
    with np.errstate(over="ignore"):
        values = (
            np.power(float(a), i)
            * np.power(float(b), j)
            * np.power(float(c), k)
            * np.power(float(d), l)
        )
    return SymCoords(n, values)


# Dense oracle ---------------------------------------------------------------

# W[p, 2r + c] = sigma_p[c, r], so that sum_{r,c} W[p, 2r+c] op[r, c] = Tr(sigma_p op)
_TO_PAULI = np.array([P.T.reshape(4) for P in PAULIS])
# V[2r + c, p] = sigma_p[r, c]
_FROM_PAULI = np.array([P.reshape(4) for P in PAULIS]).T


def _check_dense(op):
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError("dense operator must be a square matrix")
    n = int(round(np.log2(op.shape[0])))
    if 2**n != op.shape[0] or n < 1:
        raise ValueError(f"dimension {op.shape[0]} is not 2^n")
    if n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense oracle is limited to {DENSE_MAX_QUBITS} qubits")
    return op, n


def _apply_each_axis(tensor, mat, n):
    for q in range(n):
        tensor = np.moveaxis(np.tensordot(mat, tensor, axes=([1], [q])), 0, q)
    return tensor


def pauli_coefficients(op):
    """``Tr(P op)`` for every Pauli string ``P``, as a flat array of length 4^n.

    The flat index is the base-4 string with digits I=0, X=1, Y=2, Z=3 and
    qubit ``n-1`` in the most significant digit.
    """
    op, n = _check_dense(op)
    t = op.reshape((2,) * (2 * n))
    # interleave row and column axes per qubit: (r0, c0, r1, c1, ...)
    order = [ax for q in range(n) for ax in (q, n + q)]
    t = t.transpose(order).reshape((4,) * n)
    t = _apply_each_axis(t, _TO_PAULI, n)
    # axis q is qubit q; put qubit n-1 first so it is the most significant digit
    return t.transpose(list(range(n - 1, -1, -1))).reshape(-1)


def _dense_from_pauli(coef, n):
    t = np.asarray(coef, dtype=complex).reshape((4,) * n)
    t = t.transpose(list(range(n - 1, -1, -1)))
    t = _apply_each_axis(t, _FROM_PAULI, n)
    t = t.reshape((2, 2) * n)
    order = [2 * q for q in range(n)] + [2 * q + 1 for q in range(n)]
    return t.transpose(order).reshape(2**n, 2**n)


def m_basis_dense(idx, n):
    """Dense matrix of ``M[i, j, k]`` on ``n`` qubits."""
    values = np.zeros(comb(n + 3, 3))
    values[index_position(n, idx)] = 1.0
    return coords_to_dense(SymCoords(n, values))


def project_to_sym(op, *, tol=1e-10):
    """Coordinates ``c_b Tr(M_b op)`` of a Hermitian operator.

    For an operator outside the symmetric subspace the result is the
    coordinate vector of its permutation-averaged component.
    """
    op, n = _check_dense(op)
    coef = pauli_coefficients(op)
    if coef.size and np.max(np.abs(coef.imag)) > tol:
        raise InvalidObservableError(
            "operator is not Hermitian: Pauli coefficient with imaginary part "
            f"{np.max(np.abs(coef.imag)):.3g}"
        )
    traces = _backend.bin_pauli_types(coef.real, n, _position_table(n))
    return SymCoords(n, norm_consts(n) * traces)


def coords_to_dense(coords):
    """Dense matrix of ``sum_b coords[b] M_b``."""
    n = coords.n
    if n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense oracle is limited to {DENSE_MAX_QUBITS} qubits")
    coef = _backend.spread_pauli_types(coords.values, n, _position_table(n))
    return _dense_from_pauli(coef, n)


def twirl(op):
    """Average of ``P op P^T`` over all qubit permutations ``P``.

    Computed as project-and-reconstruct in symmetric coordinates rather than
    by enumerating ``n!`` permutation matrices.
    """
    return coords_to_dense(project_to_sym(op))
