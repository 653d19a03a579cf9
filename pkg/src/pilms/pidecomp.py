"""Decompose permutation-invariant observables in a product-operator basis.

Given target coordinates ``g'`` over the orthogonal ``M`` basis, the weights
``g`` over the product operators ``O_a`` solve ``Omega g = g'`` where
``Omega[b, a] = c_b Tr(M_b O_a)``.  Changing the target changes only ``g``;
the basis, and hence the measurements, stay fixed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
import scipy.linalg

from .errors import DecompositionRejected, RankDeficientError
from .product_basis import OperatorBasis, equilibrate
from .symcore import SymCoords, index_position, product_op_coords, project_to_sym, twirl

__all__ = [
    "RESIDUAL_TOL",
    "Decomposition",
    "omega_matrix",
    "decompose",
    "decompose_dense",
    "pi_target_library",
    "parse_target",
    "diag_block_coeffs",
    "flip_pair_coeffs",
]

RESIDUAL_TOL = 1e-8
PI_DISTANCE_TOL = 1e-9


def omega_matrix(basis: OperatorBasis) -> np.ndarray:
    """Change-of-basis matrix from product operators to ``M`` coordinates.

    Built from the closed form ``a_i^{b_I} b_j^{b_X} c_k^{b_Y}``; no traces.
    """
    return basis.coords_matrix()


@lru_cache(maxsize=32)
def _omega_factor(n, scheme, elements):
    omega = np.column_stack([product_op_coords(a, b, c, 1.0, n).values for a, b, c in elements])
    scaled, rows, cols = equilibrate(omega)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(scaled, check_finite=True)
    if np.any(np.abs(np.diag(lu)) == 0.0):
        raise RankDeficientError(
            f"Omega is singular for n={n}, scheme={scheme}", n=n, scheme=scheme
        )
    return omega, (lu, piv, rows, cols), float(np.linalg.cond(scaled))


@dataclass(frozen=True, eq=False)
class Decomposition:
    n: int
    basis: OperatorBasis
    gamma: np.ndarray
    residual: float
    omega_condition: float
    target: str = "custom"
    pi_distance: float = 0.0
    non_pi_input: bool = field(default=False)

    @property
    def scheme(self):
        return self.basis.scheme

    def reconstruct(self):
        return SymCoords(self.n, omega_matrix(self.basis) @ self.gamma)

    def to_dict(self):
        return {
            "schema_version": 1,
            "n": self.n,
            "scheme": self.scheme,
            "target": self.target,
            "gamma": self.gamma.tolist(),
            "residual": self.residual,
            "omega_condition": self.omega_condition,
        }


def decompose(target: SymCoords, basis: OperatorBasis, *, tol=RESIDUAL_TOL, name="custom"):
    """Weights of ``target`` over ``basis``.

    Solves the row/column-equilibrated system by pivoted LU; the reported
    condition number is that of the equilibrated ``Omega``.

    Raises :class:`DecompositionRejected` if the max-norm reconstruction
    residual exceeds ``tol``.
    """
    if target.n != basis.n:
        raise ValueError(f"target has n={target.n}, basis has n={basis.n}")
    omega, factor, cond = _omega_factor(basis.n, basis.scheme, tuple(basis.elements))
    lu, piv, rows, cols = factor
    gamma = scipy.linalg.lu_solve((lu, piv), target.values / rows) / cols
    residual = float(np.max(np.abs(omega @ gamma - target.values)))
    if not np.isfinite(residual) or residual > tol:
        raise DecompositionRejected(
            f"reconstruction residual {residual:.3g} exceeds {tol:.1e} "
            f"(Omega condition {cond:.3g})",
            residual=residual, condition=cond,
        )
    gamma.setflags(write=False)
    return Decomposition(basis.n, basis, gamma, residual, cond, name)


def decompose_dense(op, basis: OperatorBasis, *, tol=RESIDUAL_TOL, name="custom"):
    """Decompose the permutation-invariant part of a dense operator.

    The returned decomposition records how far ``op`` was from its twirl and
    flags inputs that were not permutation invariant to begin with.
    """
    op = np.asarray(op)
    dec = decompose(project_to_sym(op), basis, tol=tol, name=name)
    dist = float(np.max(np.abs(op - twirl(op))))
    return Decomposition(
        dec.n, dec.basis, dec.gamma, dec.residual, dec.omega_condition,
        name, dist, dist > PI_DISTANCE_TOL,
    )


# Closed-form target coordinates ----------------------------------------------

def diag_block_coeffs(p, q):
    """Expand ``sum_pi P1^p P0^q`` (``P1 = (I-Z)/2``, ``P0 = (I+Z)/2``).

    Returns ``c`` with ``c[i]`` the weight of ``sum_pi I^i Z^(p+q-i)``.
    """
    size = p + q
    out = np.zeros(size + 1)
    for i in range(size + 1):
        l = size - i
        out[i] = sum(
            comb(i, r) * comb(l, p - r) * (-1) ** (p - r)
            for r in range(max(0, p - l), min(i, p) + 1)
        )
    return out / 2.0**size


def flip_pair_coeffs(t):
    """Weights of ``sum_pi X^l Y^(2t-l)`` in ``sum_pi s+^t s-^t``.

    ``s+ = |0><1| = (X + iY)/2`` and ``s- = |1><0| = (X - iY)/2``; entry ``l``
    of the result is the coefficient of the term with ``l`` X factors.
    """
    out = np.zeros(2 * t + 1)
    for l in range(2 * t + 1):
        y = 2 * t - l
        acc = sum(
            comb(y, r) * comb(l, t - r) * (1j) ** r * (-1j) ** (y - r)
            for r in range(max(0, t - l), min(y, t) + 1)
        )
        assert abs(acc.imag) < 1e-9
        out[l] = acc.real
    return out / 4.0**t


def _dicke_coords(n, m):
    values = np.zeros(comb(n + 3, 3))
    norm = comb(n, m)
    for t in range(min(m, n - m) + 1):
        diag = diag_block_coeffs(m - t, n - m - t)
        for l, alpha in enumerate(flip_pair_coeffs(t)):
            if alpha == 0.0:
                continue
            for i, c in enumerate(diag):
                values[index_position(n, (i, l, 2 * t - l))] += alpha * c / norm
    return SymCoords(n, values)


def _ghz_coords(n):
    values = np.zeros(comb(n + 3, 3))
    for i, (c0, c1) in enumerate(zip(diag_block_coeffs(0, n), diag_block_coeffs(n, 0))):
        values[index_position(n, (i, 0, 0))] += 0.5 * (c0 + c1)
    for k in range(0, n + 1, 2):
        values[index_position(n, (0, n - k, k))] += (-1) ** (k // 2) / 2.0**n
    return SymCoords(n, values)


def parse_target(spec):
    """``"ghz"``, ``"w"``, ``"dicke:m"`` -> ``(name, m)``."""
    spec = spec.strip().lower()
    if spec in ("ghz", "w"):
        return spec, (1 if spec == "w" else None)
    if spec.startswith("dicke"):
        _, _, m = spec.partition(":")
        if not m:
            raise ValueError("dicke target needs an excitation number, e.g. dicke:2")
        return "dicke", int(m)
    raise ValueError(f"unknown target {spec!r}")


def pi_target_library(name, n, m=None):
    """Exact symmetric coordinates of the GHZ, W or Dicke projector."""
    if ":" in name:
        name, m = parse_target(name)
    name = name.lower()
    if name == "ghz":
        if n < 2:
            raise ValueError("GHZ target needs n >= 2")
        return _ghz_coords(n)
    if name == "w":
        if n < 2:
            raise ValueError("W target needs n >= 2")
        return _dicke_coords(n, 1)
    if name == "dicke":
        if m is None or not 0 <= m <= n:
            raise ValueError(f"Dicke excitation number must satisfy 0 <= m <= n, got {m}")
        return _dicke_coords(n, m)
    raise ValueError(f"unknown target {name!r}")
